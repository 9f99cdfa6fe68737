// pmp: command-line front end for the matching-prior posteriors, credible
// intervals, coverage simulation and matching-condition checks.
//
// Exit codes: 0 success, 1 a verification check failed, 2 usage error,
// 3 data or domain error, 4 numerical failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "pmp/coverage.hpp"
#include "pmp/dataset_io.hpp"
#include "pmp/errors.hpp"
#include "pmp/interval.hpp"
#include "pmp/matching_verify.hpp"
#include "pmp/model.hpp"
#include "pmp/posterior.hpp"

namespace {

enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,
    kUsage = 2,
    kDataError = 3,
    kNumericalError = 4,
};

constexpr std::uint64_t kDefaultSampleSeed = 42;

struct ParamFlags {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    double rho = 0.0;

    pmp::model::OriginalParams original() const { return {mu1, mu2, sigma1, sigma2, rho}; }
};

void add_param_flags(CLI::App* cmd, ParamFlags& flags) {
    cmd->add_option("--mu1", flags.mu1, "mean of X1");
    cmd->add_option("--mu2", flags.mu2, "mean of X2");
    cmd->add_option("--sigma1", flags.sigma1, "standard deviation of X1");
    cmd->add_option("--sigma2", flags.sigma2, "standard deviation of X2");
    cmd->add_option("--rho", flags.rho, "correlation, |rho| < 1");
}

// Writes to --output when given, else stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw pmp::DomainError(fmt::format("cannot open '{}' for writing", path));
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

pmp::model::Dataset load_input(const std::string& path) {
    if (path.empty() || path == "-") return pmp::io::read_dataset(std::cin);
    return pmp::io::read_dataset_file(path);
}

pmp::verify::GridAxis parse_axis(const std::string& text, pmp::verify::GridAxis fallback) {
    if (text.empty()) return fallback;
    std::stringstream ss(text);
    std::string lo;
    std::string hi;
    std::string count;
    if (!std::getline(ss, lo, ',') || !std::getline(ss, hi, ',') || !std::getline(ss, count)) {
        throw CLI::ValidationError("grid", "expected lo,hi,count (e.g. --grid-beta=-2,2,9)");
    }
    try {
        const long c = std::stol(count);
        if (c < 1) throw CLI::ValidationError("grid", "count must be positive");
        return {std::stod(lo), std::stod(hi), static_cast<std::size_t>(c)};
    } catch (const std::logic_error&) {
        throw CLI::ValidationError("grid", fmt::format("cannot parse '{}'", text));
    }
}

void check_format(const std::string& format, std::initializer_list<const char*> allowed) {
    for (const char* a : allowed) {
        if (format == a) return;
    }
    throw CLI::ValidationError("--format", fmt::format("unsupported format '{}'", format));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probability-matching prior tools for the bivariate normal"};
    app.require_subcommand(1);

    std::string input;
    std::string output;
    std::string format;
    std::optional<std::uint64_t> seed;
    double level = 0.95;
    std::string param = "beta";
    std::string kind = "hpd";
    std::size_t n = 0;

    // sample
    ParamFlags sample_params;
    auto* sample_cmd = app.add_subcommand("sample", "draw a bivariate normal dataset as x1,x2 CSV");
    add_param_flags(sample_cmd, sample_params);
    sample_cmd->add_option("--n", n, "number of pairs")->required();
    sample_cmd->add_option("--seed", seed, "random seed");
    sample_cmd->add_option("--output", output, "output file (default stdout)");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "sufficient statistics of a dataset (JSON)");
    stats_cmd->add_option("--input", input, "x1,x2 CSV (default stdin)");
    stats_cmd->add_option("--output", output, "output file");

    // posterior
    auto* post_cmd = app.add_subcommand("posterior", "summary of a marginal posterior (JSON)");
    post_cmd->add_option("--input", input, "x1,x2 CSV (default stdin)");
    post_cmd->add_option("--param", param, "beta, theta, w or eta");
    post_cmd->add_option("--output", output, "output file");

    // interval
    auto* int_cmd = app.add_subcommand("interval", "credible interval for one parameter (JSON)");
    int_cmd->add_option("--input", input, "x1,x2 CSV (default stdin)");
    int_cmd->add_option("--param", param, "beta, theta, w or eta");
    int_cmd->add_option("--kind", kind, "hpd, equal_tailed, upper_one_sided, lower_one_sided");
    int_cmd->add_option("--level", level, "credibility level in (0, 1)");
    int_cmd->add_option("--output", output, "output file");

    // coverage
    ParamFlags cov_params;
    std::vector<double> rhos = {0.25, 0.5, 0.75};
    std::vector<std::size_t> ns = {4, 8, 12, 16, 20};
    std::size_t replicates = 5000;
    unsigned workers = 0;
    auto* cov_cmd = app.add_subcommand("coverage", "frequentist coverage simulation");
    add_param_flags(cov_cmd, cov_params);
    cov_cmd->add_option("--rhos", rhos, "comma-separated correlations")->delimiter(',');
    cov_cmd->add_option("--ns", ns, "comma-separated sample sizes (>= 4)")->delimiter(',');
    cov_cmd->add_option("--replicates", replicates, "replicates per cell");
    cov_cmd->add_option("--level", level, "credibility level");
    cov_cmd->add_option("--kind", kind, "interval kind");
    cov_cmd->add_option("--seed", seed, "base seed");
    cov_cmd->add_option("--workers", workers, "worker threads (0 = all cores)");
    cov_cmd->add_option("--format", format, "csv or markdown")->default_str("csv");
    cov_cmd->add_option("--output", output, "output file");

    // verify-lemma
    ParamFlags lemma_params;
    lemma_params.rho = 0.5;
    std::size_t samples = 1000000;
    auto* lemma_cmd = app.add_subcommand("verify-lemma", "Monte Carlo check of log-density moments");
    add_param_flags(lemma_cmd, lemma_params);
    lemma_cmd->add_option("--samples", samples, "Monte Carlo sample size (>= 100000)");
    lemma_cmd->add_option("--seed", seed, "random seed");
    lemma_cmd->add_option("--format", format, "csv or markdown")->default_str("csv");
    lemma_cmd->add_option("--output", output, "output file");

    // verify-prior
    std::string prior_name = "matching";
    std::string grid_beta;
    std::string grid_theta;
    std::string grid_eta;
    bool force_fd = false;
    auto* prior_cmd = app.add_subcommand("verify-prior", "matching-condition residuals of a prior");
    prior_cmd->add_option("--prior", prior_name, "matching or flat");
    prior_cmd->add_option("--grid-beta", grid_beta, "lo,hi,count (default -2,2,9)");
    prior_cmd->add_option("--grid-theta", grid_theta, "lo,hi,count (default 0.5,3,9)");
    prior_cmd->add_option("--grid-eta", grid_eta, "lo,hi,count (default 0.5,3,9)");
    prior_cmd->add_flag("--fd", force_fd, "use finite differences instead of closed-form partials");
    prior_cmd->add_option("--format", format, "csv or markdown")->default_str("csv");
    prior_cmd->add_option("--output", output, "output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (format.empty()) format = "csv";
        if (sample_cmd->parsed()) {
            const auto data = pmp::model::sample(sample_params.original(), n, seed.value_or(kDefaultSampleSeed));
            Sink sink(output);
            pmp::io::write_dataset(sink.stream(), data);
            return kOk;
        }
        if (stats_cmd->parsed()) {
            const auto s = pmp::model::sufficient_stats(load_input(input));
            const nlohmann::json j = {{"n", s.n},       {"xbar1", s.xbar1}, {"xbar2", s.xbar2},
                                      {"s11", s.s11},   {"s22", s.s22},     {"s12", s.s12},
                                      {"s22_1", s.s22_1}};
            Sink sink(output);
            sink.stream() << j.dump(2) << "\n";
            return kOk;
        }
        if (post_cmd->parsed()) {
            const auto s = pmp::model::sufficient_stats(load_input(input));
            const auto dist = pmp::posterior::make_posterior(pmp::posterior::parse_param_id(param), s);
            nlohmann::json j = {{"param", std::string(pmp::posterior::to_string(dist.param()))},
                                {"n", s.n},
                                {"mode", dist.mode()},
                                {"median", dist.quantile(0.5)},
                                {"q025", dist.quantile(0.025)},
                                {"q975", dist.quantile(0.975)},
                                {"log_norm", dist.log_norm()}};
            Sink sink(output);
            sink.stream() << j.dump(2) << "\n";
            return kOk;
        }
        if (int_cmd->parsed()) {
            const auto s = pmp::model::sufficient_stats(load_input(input));
            const auto dist = pmp::posterior::make_posterior(pmp::posterior::parse_param_id(param), s);
            const auto ci = pmp::interval::make_interval(dist, pmp::interval::parse_interval_kind(kind), level);
            if (!ci.note.empty()) std::cerr << "warning: " << ci.note << "\n";
            Sink sink(output);
            sink.stream() << pmp::interval::to_json(ci).dump(2) << "\n";
            return kOk;
        }
        if (cov_cmd->parsed()) {
            check_format(format, {"csv", "markdown"});
            pmp::coverage::CoverageCellSpec defaults;
            defaults.params_base = cov_params.original();
            defaults.params_base.rho = 0.0;
            defaults.level = level;
            defaults.replicates = replicates;
            defaults.kind = pmp::interval::parse_interval_kind(kind);
            defaults.seed = seed.value_or(pmp::coverage::kDefaultSeed);
            defaults.workers = workers;
            const auto report = pmp::coverage::run_table(rhos, ns, defaults);
            Sink sink(output);
            if (format == "markdown") {
                pmp::coverage::write_markdown(sink.stream(), report);
            } else {
                pmp::coverage::write_csv(sink.stream(), report);
            }
            int code = kOk;
            for (const auto& cell : report.cells) {
                if (!cell.error.empty()) {
                    std::cerr << fmt::format("cell rho={} n={}: {}\n", cell.rho, cell.n, cell.error);
                    code = kDataError;
                }
            }
            return code;
        }
        if (lemma_cmd->parsed()) {
            check_format(format, {"csv", "markdown"});
            const auto p = pmp::model::to_orthogonal(lemma_params.original());
            const auto checks = pmp::verify::verify_lemma(p, samples, seed.value_or(kDefaultSampleSeed));
            Sink sink(output);
            if (format == "markdown") {
                fmt::print(sink.stream(), "beta={:.6g} theta={:.6g} eta={:.6g}  samples={}\n\n", p.beta,
                           p.theta, p.eta, samples);
                sink.stream() << "| moment | claimed | estimate | stderr | result |\n"
                              << "|---|---:|---:|---:|---|\n";
                for (const auto& c : checks) {
                    fmt::print(sink.stream(), "| {} | {:.6g} | {:.6g} | {:.3e} | {} |\n", c.derivative_spec,
                               c.claimed_value, c.mc_estimate, c.mc_stderr, c.pass ? "pass" : "FAIL");
                }
            } else {
                pmp::verify::write_lemma_csv(sink.stream(), checks);
            }
            bool all = true;
            for (const auto& c : checks) all = all && c.pass;
            return all ? kOk : kCheckFailed;
        }
        if (prior_cmd->parsed()) {
            check_format(format, {"csv", "markdown"});
            pmp::verify::Grid grid;
            grid.beta = parse_axis(grid_beta, grid.beta);
            grid.theta = parse_axis(grid_theta, grid.theta);
            grid.eta = parse_axis(grid_eta, grid.eta);
            auto prior = pmp::verify::builtin_prior(prior_name);
            if (force_fd) prior = pmp::verify::without_partials(prior);
            const auto reports = pmp::verify::verify_prior(prior, grid);
            Sink sink(output);
            if (format == "markdown") {
                pmp::verify::write_residual_table(sink.stream(), reports);
            } else {
                pmp::verify::write_residual_csv(sink.stream(), reports);
            }
            bool all = true;
            for (const auto& r : reports) {
                if (!r.pass) {
                    all = false;
                    std::cerr << fmt::format("failed: {} (max |residual| = {:.6g})\n",
                                             pmp::verify::condition_info(r.condition_id).name,
                                             r.max_abs_residual);
                }
            }
            return all ? kOk : kCheckFailed;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const pmp::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const pmp::DegenerateDataError& e) {
        std::cerr << "degenerate data: " << e.what() << "\n";
        return kDataError;
    } catch (const pmp::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    }
    return kUsage;
}
