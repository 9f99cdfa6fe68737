#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "pmp/model.hpp"
#include "pmp/posterior.hpp"

namespace pmp::interval {

using posterior::ParamId;
using posterior::PosteriorDistribution;

enum class IntervalKind {
    hpd,
    // Density is monotone on the support (mode at its lower end); the HPD
    // set is [support_min, quantile(level)].
    hpd_boundary,
    equal_tailed,
    // (support_min, quantile(level)]
    upper_one_sided,
    // [quantile(1 - level), +inf)
    lower_one_sided,
};

std::string_view to_string(IntervalKind kind);
IntervalKind parse_interval_kind(std::string_view name);

struct CredibleInterval {
    double lo = 0.0;
    double hi = 0.0;
    double level = 0.95;
    double achieved_mass = 0.0;
    IntervalKind kind = IntervalKind::hpd;
    ParamId param = ParamId::beta;
    // Non-empty when the construction needed a caveat (e.g. hpd_boundary).
    std::string note;

    bool contains(double x) const { return lo <= x && x <= hi; }
    double length() const { return hi - lo; }
};

// {param, kind, level, lo, hi, achieved_mass}; infinite endpoints become null.
nlohmann::json to_json(const CredibleInterval& ci);

/// Closed-form HPD interval for beta: S12/S11 ± s t_{n-2; alpha/2},
/// s = sqrt(S22.1 / ((n-2) S11)). Requires n >= 4.
CredibleInterval hpd_beta(const model::SufficientStats& stats, double level);

struct HpdOptions {
    // Lower-tail probability whose quantile starts the bracket for the left
    // endpoint. Retries use a wider start.
    double lower_tail_start = 1e-6;
};

/// HPD interval [lo, hi] of a unimodal posterior: pdf(lo) = pdf(hi) and
/// cdf(hi) - cdf(lo) = level.
///
/// The left endpoint is the root of mass(lo) - level on
/// [quantile(lower_tail_start), min(quantile(1 - level), mode)], where for each
/// trial lo the matching right endpoint hi > mode solves
/// log_pdf(hi) = log_pdf(lo). The mass is decreasing in lo for any unimodal
/// density, so the outer problem has a single root.
///
/// When the mode sits on the lower end of the support the result has kind
/// hpd_boundary and a note explaining why. Throws NumericalError if a root
/// cannot be bracketed.
CredibleInterval hpd_unimodal(const PosteriorDistribution& dist, double level,
                              const HpdOptions& opts = {});

CredibleInterval equal_tailed(const PosteriorDistribution& dist, double level);

enum class Side { upper, lower };

CredibleInterval one_sided(const PosteriorDistribution& dist, double level, Side side);

// Dispatch by kind. hpd for beta goes through the closed form.
CredibleInterval make_interval(const PosteriorDistribution& dist, IntervalKind kind, double level,
                               const HpdOptions& opts = {});

}  // namespace pmp::interval
