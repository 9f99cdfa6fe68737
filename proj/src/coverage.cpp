#include "pmp/coverage.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "pmp/errors.hpp"

namespace pmp::coverage {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct ReplicateOutcome {
    std::array<bool, 3> ok{};
    std::array<bool, 3> covered{};
    std::array<double, 3> cdf_at_truth{};
};

double truth_for(ParamId id, const model::OrthogonalParams& truth) {
    switch (id) {
        case ParamId::beta: return truth.beta;
        case ParamId::theta: return truth.theta;
        case ParamId::precision_w: return 1.0 / truth.theta;
        case ParamId::eta: return truth.eta;
    }
    return 0.0;
}

ReplicateOutcome run_replicate(const CoverageCellSpec& spec, const model::OriginalParams& params,
                               const model::OrthogonalParams& truth, std::size_t r) {
    ReplicateOutcome out;
    const auto data = model::sample(params, spec.n, mix_seed(spec.seed, spec.cell_index, r));
    model::SufficientStats stats;
    try {
        stats = model::sufficient_stats(data);
    } catch (const DegenerateDataError&) {
        return out;
    }
    for (std::size_t k = 0; k < kCoverageParams.size(); ++k) {
        const ParamId id = kCoverageParams[k];
        const double target = truth_for(id, truth);
        try {
            const auto dist = posterior::make_posterior(id, stats);
            interval::CredibleInterval ci;
            try {
                ci = interval::make_interval(dist, spec.kind, spec.level);
            } catch (const NumericalError&) {
                ci = interval::make_interval(dist, spec.kind, spec.level,
                                             interval::HpdOptions{1e-12});
            }
            out.covered[k] = ci.contains(target);
            out.cdf_at_truth[k] = dist.cdf(target);
            out.ok[k] = true;
        } catch (const NumericalError&) {
        } catch (const DegenerateDataError&) {
        }
    }
    return out;
}

}  // namespace

const ParamCoverage& CellReport::operator[](ParamId id) const {
    for (const auto& p : params) {
        if (p.param == id) return p;
    }
    throw DomainError(fmt::format("coverage report has no entry for {}", posterior::to_string(id)));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t cell, std::uint64_t replicate) {
    return splitmix64(splitmix64(splitmix64(seed) ^ cell) ^ replicate);
}

void validate(const CoverageCellSpec& spec) {
    if (!(std::abs(spec.rho) < 1.0)) throw DomainError("coverage: rho must satisfy |rho| < 1");
    if (spec.n < 4) throw DomainError("coverage: n must be at least 4");
    if (spec.replicates < 100) throw DomainError("coverage: need at least 100 replicates");
    if (!(spec.level > 0.0 && spec.level < 1.0)) throw DomainError("coverage: level must lie in (0, 1)");
    model::OriginalParams p = spec.params_base;
    p.rho = spec.rho;
    model::validate(p);
}

CellReport run_cell(const CoverageCellSpec& spec) {
    validate(spec);
    model::OriginalParams params = spec.params_base;
    params.rho = spec.rho;
    const model::OrthogonalParams truth = model::to_orthogonal(params);

    std::vector<ReplicateOutcome> outcomes(spec.replicates);
    unsigned workers = spec.workers == 0 ? std::thread::hardware_concurrency() : spec.workers;
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(spec.replicates)));
    if (workers == 1) {
        for (std::size_t r = 0; r < spec.replicates; ++r) {
            outcomes[r] = run_replicate(spec, params, truth, r);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t r = next++; r < spec.replicates; r = next++) {
                    outcomes[r] = run_replicate(spec, params, truth, r);
                }
            });
        }
    }

    CellReport report;
    report.rho = spec.rho;
    report.n = spec.n;
    report.kind = spec.kind;
    report.level = spec.level;
    report.replicates = spec.replicates;
    for (std::size_t k = 0; k < kCoverageParams.size(); ++k) {
        ParamCoverage pc;
        pc.param = kCoverageParams[k];
        std::size_t hits = 0;
        std::vector<double> u;
        u.reserve(spec.replicates);
        for (const auto& o : outcomes) {
            if (!o.ok[k]) {
                ++pc.failures;
                continue;
            }
            ++pc.replicates_used;
            hits += o.covered[k] ? 1 : 0;
            u.push_back(o.cdf_at_truth[k]);
        }
        if (pc.replicates_used > 0) {
            const double used = static_cast<double>(pc.replicates_used);
            pc.coverage = static_cast<double>(hits) / used;
            pc.std_error = std::sqrt(pc.coverage * (1.0 - pc.coverage) / used);
            pc.ks_statistic = ks_uniform_statistic(std::move(u));
            pc.ks_pvalue = ks_pvalue(pc.ks_statistic, pc.replicates_used);
        }
        report.params[k] = pc;
    }
    return report;
}

CoverageReport run_table(std::span<const double> rhos, std::span<const std::size_t> ns,
                         const CoverageCellSpec& defaults) {
    if (rhos.empty() || ns.empty()) throw DomainError("coverage: rho and n grids must be nonempty");
    std::vector<double> rho_sorted(rhos.begin(), rhos.end());
    std::vector<std::size_t> n_sorted(ns.begin(), ns.end());
    std::sort(rho_sorted.begin(), rho_sorted.end());
    std::sort(n_sorted.begin(), n_sorted.end());

    CoverageReport report;
    std::uint64_t index = 0;
    for (double rho : rho_sorted) {
        for (std::size_t n : n_sorted) {
            CoverageCellSpec spec = defaults;
            spec.rho = rho;
            spec.n = n;
            spec.cell_index = index++;
            try {
                report.cells.push_back(run_cell(spec));
            } catch (const std::exception& ex) {
                CellReport failed;
                failed.rho = rho;
                failed.n = n;
                failed.kind = spec.kind;
                failed.level = spec.level;
                failed.replicates = spec.replicates;
                for (std::size_t k = 0; k < kCoverageParams.size(); ++k) {
                    failed.params[k].param = kCoverageParams[k];
                    failed.params[k].failures = spec.replicates;
                }
                failed.error = ex.what();
                report.cells.push_back(std::move(failed));
            }
        }
    }
    return report;
}

void write_csv(std::ostream& out, const CoverageReport& report) {
    out << "rho,n,param,kind,level,coverage,stderr,replicates,failures\n";
    for (const auto& cell : report.cells) {
        for (const auto& p : cell.params) {
            fmt::print(out, "{},{},{},{},{},{:.6f},{:.6f},{},{}\n", cell.rho, cell.n,
                       posterior::to_string(p.param), interval::to_string(cell.kind), cell.level,
                       p.coverage, p.std_error, p.replicates_used, p.failures);
        }
    }
}

void write_markdown(std::ostream& out, const CoverageReport& report) {
    if (report.cells.empty()) return;
    const auto& first = report.cells.front();
    fmt::print(out, "Frequentist coverage of {:g}% {} intervals ({} replicates per cell)\n\n",
               100.0 * first.level, interval::to_string(first.kind), first.replicates);
    out << "| rho | n | beta | theta | eta |\n";
    out << "|---:|---:|---:|---:|---:|\n";
    double last_rho = std::nan("");
    for (const auto& cell : report.cells) {
        const std::string rho_cell = cell.rho == last_rho ? "" : fmt::format("{:.2f}", cell.rho);
        last_rho = cell.rho;
        if (!cell.error.empty()) {
            fmt::print(out, "| {} | {} | error | error | error |\n", rho_cell, cell.n);
            continue;
        }
        fmt::print(out, "| {} | {} | {:.3f} | {:.3f} | {:.3f} |\n", rho_cell, cell.n,
                   cell.params[0].coverage, cell.params[1].coverage, cell.params[2].coverage);
    }
}

double ks_uniform_statistic(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double u = values[i];
        d = std::max(d, std::max(static_cast<double>(i + 1) / n - u, u - static_cast<double>(i) / n));
    }
    return d;
}

double ks_pvalue(double d, std::size_t n) {
    if (n == 0) return 1.0;
    const double root_n = std::sqrt(static_cast<double>(n));
    const double lambda = (root_n + 0.12 + 0.11 / root_n) * d;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace pmp::coverage
