#pragma once

// Frequentist coverage of credible intervals built from the matching-prior
// posteriors, estimated by simulation.
//
// Replicate r of the cell at position c in a table draws its data with seed
// mix_seed(spec.seed, c, r), so results do not depend on scheduling or on the
// number of worker threads.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pmp/interval.hpp"
#include "pmp/model.hpp"
#include "pmp/posterior.hpp"

namespace pmp::coverage {

using interval::IntervalKind;
using posterior::ParamId;

inline constexpr std::uint64_t kDefaultSeed = 20080101;

struct CoverageCellSpec {
    double rho = 0.0;
    std::size_t n = 4;
    double level = 0.95;
    std::size_t replicates = 5000;
    IntervalKind kind = IntervalKind::hpd;
    // rho is overridden by the field above.
    model::OriginalParams params_base{};
    std::uint64_t seed = kDefaultSeed;
    std::uint64_t cell_index = 0;
    // 0 selects std::thread::hardware_concurrency().
    unsigned workers = 1;
};

// Throws DomainError on an invalid spec.
void validate(const CoverageCellSpec& spec);

struct ParamCoverage {
    ParamId param = ParamId::beta;
    double coverage = 0.0;
    // sqrt(p (1 - p) / replicates_used)
    double std_error = 0.0;
    std::size_t replicates_used = 0;
    std::size_t failures = 0;
    // Kolmogorov-Smirnov test of the posterior cdf at the true value
    // against Uniform(0, 1).
    double ks_statistic = 0.0;
    double ks_pvalue = 1.0;
};

struct CellReport {
    double rho = 0.0;
    std::size_t n = 0;
    IntervalKind kind = IntervalKind::hpd;
    double level = 0.95;
    std::size_t replicates = 0;
    std::array<ParamCoverage, 3> params{};  // beta, theta, eta
    // Set when the cell could not run at all; the other cells are unaffected.
    std::string error;

    const ParamCoverage& operator[](ParamId id) const;
};

struct CoverageReport {
    std::vector<CellReport> cells;  // ordered by rho, then n
};

// The parameters whose intervals are scored, in report order.
inline constexpr std::array<ParamId, 3> kCoverageParams = {ParamId::beta, ParamId::theta, ParamId::eta};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t cell, std::uint64_t replicate);

CellReport run_cell(const CoverageCellSpec& spec);

// Cross product of rhos and ns, each sorted ascending; other fields from
// defaults. A cell whose spec is invalid is reported with `error` set.
CoverageReport run_table(std::span<const double> rhos, std::span<const std::size_t> ns,
                         const CoverageCellSpec& defaults);

// Header: rho,n,param,kind,level,coverage,stderr,replicates,failures
void write_csv(std::ostream& out, const CoverageReport& report);
// rho rows x n sub-rows x (beta, theta, eta) columns.
void write_markdown(std::ostream& out, const CoverageReport& report);

// Kolmogorov-Smirnov distance of a sample from Uniform(0, 1).
double ks_uniform_statistic(std::vector<double> values);
// Asymptotic P(D_n >= d) with Stephens' small-sample correction.
double ks_pvalue(double d, std::size_t n);

}  // namespace pmp::coverage
