#include "pmp/interval.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pmp/errors.hpp"
#include "pmp/numerics.hpp"

namespace pmp::interval {
namespace {

namespace nm = pmp::numerics;

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw DomainError(fmt::format("credible level {} outside (0, 1)", level));
    }
}

nlohmann::json endpoint(double x) {
    if (std::isinf(x)) return nullptr;
    return x;
}

// Right endpoint above the mode with the same log-density as lo.
double matching_right_endpoint(const PosteriorDistribution& dist, double lo, double mode) {
    if (lo >= mode) return mode;
    const double target = dist.log_pdf(lo);
    auto g = [&](double x) { return dist.log_pdf(x) - target; };
    double step = std::max(mode - lo, 1e-300);
    double hi = mode + step;
    for (int i = 0; g(hi) > 0.0; ++i) {
        if (i > 2000 || !std::isfinite(hi)) {
            throw NumericalError("hpd: cannot bracket the right endpoint", hi);
        }
        step *= 2.0;
        hi = mode + step;
    }
    const double width = hi - mode;
    return nm::find_root(g, nm::Bracket{mode, hi},
                         nm::RootOptions{1e-15 * (std::abs(mode) + width), 0.0, 500});
}

}  // namespace

std::string_view to_string(IntervalKind kind) {
    switch (kind) {
        case IntervalKind::hpd: return "hpd";
        case IntervalKind::hpd_boundary: return "hpd_boundary";
        case IntervalKind::equal_tailed: return "equal_tailed";
        case IntervalKind::upper_one_sided: return "upper_one_sided";
        case IntervalKind::lower_one_sided: return "lower_one_sided";
    }
    return "?";
}

IntervalKind parse_interval_kind(std::string_view name) {
    if (name == "hpd") return IntervalKind::hpd;
    if (name == "equal_tailed" || name == "equal-tailed") return IntervalKind::equal_tailed;
    if (name == "upper_one_sided" || name == "upper") return IntervalKind::upper_one_sided;
    if (name == "lower_one_sided" || name == "lower") return IntervalKind::lower_one_sided;
    throw DomainError(fmt::format(
        "unknown interval kind '{}' (expected hpd, equal_tailed, upper_one_sided, lower_one_sided)",
        name));
}

nlohmann::json to_json(const CredibleInterval& ci) {
    return nlohmann::json{{"param", std::string(posterior::to_string(ci.param))},
                          {"kind", std::string(to_string(ci.kind))},
                          {"level", ci.level},
                          {"lo", endpoint(ci.lo)},
                          {"hi", endpoint(ci.hi)},
                          {"achieved_mass", ci.achieved_mass}};
}

CredibleInterval hpd_beta(const model::SufficientStats& stats, double level) {
    check_level(level);
    if (stats.n < 4) throw DegenerateDataError("hpd_beta: need n >= 4");
    const PosteriorDistribution dist = posterior::beta_posterior(stats);
    const double df = static_cast<double>(stats.n) - 2.0;
    const double center = stats.s12 / stats.s11;
    const double scale = std::sqrt(stats.s22_1 / (df * stats.s11));
    const double half_width = scale * nm::student_t_quantile(df, 0.5 + 0.5 * level);
    CredibleInterval ci;
    ci.lo = center - half_width;
    ci.hi = center + half_width;
    ci.level = level;
    ci.achieved_mass = dist.cdf(ci.hi) - dist.cdf(ci.lo);
    ci.kind = IntervalKind::hpd;
    ci.param = ParamId::beta;
    return ci;
}

CredibleInterval hpd_unimodal(const PosteriorDistribution& dist, double level,
                              const HpdOptions& opts) {
    check_level(level);
    const double mode = dist.mode();
    const double support_min = dist.support_min();
    CredibleInterval ci;
    ci.level = level;
    ci.param = dist.param();

    if (mode <= support_min) {
        ci.kind = IntervalKind::hpd_boundary;
        ci.lo = support_min;
        ci.hi = dist.quantile(level);
        ci.achieved_mass = dist.cdf(ci.hi);
        ci.note = "density is monotone decreasing on its support; the HPD set is one-sided";
        return ci;
    }

    auto excess_mass = [&](double lo) {
        const double hi = matching_right_endpoint(dist, lo, mode);
        return dist.cdf(hi) - dist.cdf(lo) - level;
    };

    const double alpha = 1.0 - level;
    const double bracket_hi = std::min(dist.quantile(alpha), mode);
    double p_start = std::min(opts.lower_tail_start, 0.5 * alpha);
    double bracket_lo = dist.quantile(p_start);
    while (excess_mass(bracket_lo) <= 0.0) {
        p_start *= 1e-4;
        if (p_start < 1e-280) {
            throw NumericalError("hpd: cannot bracket the left endpoint", bracket_lo);
        }
        bracket_lo = dist.quantile(p_start);
    }

    const double width = bracket_hi - bracket_lo;
    const double lo = nm::find_root(
        excess_mass, nm::Bracket{bracket_lo, bracket_hi},
        nm::RootOptions{1e-15 * (std::abs(bracket_hi) + width), 1e-14, 500});
    ci.kind = IntervalKind::hpd;
    ci.lo = lo;
    ci.hi = matching_right_endpoint(dist, lo, mode);
    ci.achieved_mass = dist.cdf(ci.hi) - dist.cdf(ci.lo);
    return ci;
}

CredibleInterval equal_tailed(const PosteriorDistribution& dist, double level) {
    check_level(level);
    const double alpha = 1.0 - level;
    CredibleInterval ci;
    ci.level = level;
    ci.param = dist.param();
    ci.kind = IntervalKind::equal_tailed;
    ci.lo = dist.quantile(0.5 * alpha);
    ci.hi = dist.quantile(1.0 - 0.5 * alpha);
    ci.achieved_mass = dist.cdf(ci.hi) - dist.cdf(ci.lo);
    return ci;
}

CredibleInterval one_sided(const PosteriorDistribution& dist, double level, Side side) {
    check_level(level);
    CredibleInterval ci;
    ci.level = level;
    ci.param = dist.param();
    if (side == Side::upper) {
        ci.kind = IntervalKind::upper_one_sided;
        ci.lo = dist.support_min();
        ci.hi = dist.quantile(level);
        ci.achieved_mass = dist.cdf(ci.hi);
    } else {
        ci.kind = IntervalKind::lower_one_sided;
        ci.lo = dist.quantile(1.0 - level);
        ci.hi = kInf;
        ci.achieved_mass = 1.0 - dist.cdf(ci.lo);
    }
    return ci;
}

CredibleInterval make_interval(const PosteriorDistribution& dist, IntervalKind kind, double level,
                               const HpdOptions& opts) {
    switch (kind) {
        case IntervalKind::hpd:
        case IntervalKind::hpd_boundary:
            if (dist.param() == ParamId::beta && dist.stats().n >= 4) {
                return hpd_beta(dist.stats(), level);
            }
            return hpd_unimodal(dist, level, opts);
        case IntervalKind::equal_tailed:
            return equal_tailed(dist, level);
        case IntervalKind::upper_one_sided:
            return one_sided(dist, level, Side::upper);
        case IntervalKind::lower_one_sided:
            return one_sided(dist, level, Side::lower);
    }
    throw DomainError("make_interval: unknown kind");
}

}  // namespace pmp::interval
