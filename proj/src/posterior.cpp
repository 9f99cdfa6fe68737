#include "pmp/posterior.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "pmp/errors.hpp"
#include "pmp/numerics.hpp"

namespace pmp::posterior {
namespace {

namespace nm = pmp::numerics;

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_stats(const model::SufficientStats& s) {
    if (s.n < 3) throw DegenerateDataError("posterior: need n >= 3");
    if (!(s.s11 > 0.0) || !std::isfinite(s.s11)) throw DegenerateDataError("posterior: S11 must be positive");
    if (!(s.s22_1 > 0.0) || !std::isfinite(s.s22_1)) {
        throw DegenerateDataError("posterior: S22.1 must be positive");
    }
}

}  // namespace

std::string_view to_string(ParamId id) {
    switch (id) {
        case ParamId::beta: return "beta";
        case ParamId::theta: return "theta";
        case ParamId::precision_w: return "w";
        case ParamId::eta: return "eta";
    }
    return "?";
}

ParamId parse_param_id(std::string_view name) {
    if (name == "beta") return ParamId::beta;
    if (name == "theta") return ParamId::theta;
    if (name == "w" || name == "precision_w") return ParamId::precision_w;
    if (name == "eta") return ParamId::eta;
    throw DomainError(fmt::format("unknown parameter '{}' (expected beta, theta, w or eta)", name));
}

PosteriorDistribution::PosteriorDistribution(ParamId id, const model::SufficientStats& stats)
    : id_(id), stats_(stats) {
    check_stats(stats);
    const double n = static_cast<double>(stats.n);
    switch (id) {
        case ParamId::beta: {
            shape_ = n - 2.0;
            loc_ = stats.s12 / stats.s11;
            scale_ = std::sqrt(stats.s22_1 / (shape_ * stats.s11));
            log_norm_ = nm::log_gamma(0.5 * (shape_ + 1.0)) - nm::log_gamma(0.5 * shape_) -
                        0.5 * std::log(shape_ * std::numbers::pi) - std::log(scale_);
            mode_ = loc_;
            break;
        }
        case ParamId::theta:
        case ParamId::precision_w: {
            shape_ = n - 2.0;
            scale_ = std::sqrt(stats.s11 * stats.s22_1);  // rate r
            log_norm_ = shape_ * std::log(scale_) - nm::log_gamma(shape_);
            mode_ = (id == ParamId::theta) ? scale_ / (n - 1.0) : (n - 3.0) / scale_;
            break;
        }
        case ParamId::eta: {
            eta_a_ = stats.s22_1 / stats.s11;
            eta_sqrt_a_ = std::sqrt(eta_a_);
            const double t_mode = std::sqrt((n - 2.0) / (n - 1.0));
            mode_ = eta_sqrt_a_ * t_mode;
            eta_log_mode_kernel_ = eta_log_kernel_std(t_mode);
            auto scaled = [this](double t) {
                return t <= 0.0 ? 0.0 : std::exp(eta_log_kernel_std(t) - eta_log_mode_kernel_);
            };
            const auto total = nm::integrate(scaled, 0.0, kInf, nm::QuadratureOptions{1e-14, 1e-13, 4000});
            eta_log_integral_std_ = eta_log_mode_kernel_ + std::log(total.value);
            log_norm_ = (n - 2.0) * std::log(eta_sqrt_a_) - eta_log_integral_std_;

            closed_form_cdf_ = false;
            double worst = 0.0;
            for (double factor : {0.25, 0.5, 1.0, 2.0, 4.0}) {
                const double x = mode_ * factor;
                const double z = x * x / (x * x + eta_a_);
                const double identity = nm::reg_inc_beta(0.5 * (n - 1.0), 0.5 * (n - 2.0), z);
                worst = std::max(worst, std::abs(identity - cdf_by_quadrature(x)));
            }
            closed_form_cdf_ = worst <= kEtaIdentityTolerance;
            break;
        }
    }
}

double PosteriorDistribution::eta_log_kernel_std(double t) const {
    const double n = static_cast<double>(stats_.n);
    return (n - 2.0) * std::log(t) - (n - 1.5) * std::log1p(t * t);
}

double PosteriorDistribution::support_min() const {
    return id_ == ParamId::beta ? -kInf : 0.0;
}

double PosteriorDistribution::log_pdf(double x) const {
    const double n = static_cast<double>(stats_.n);
    switch (id_) {
        case ParamId::beta: {
            const double z = (x - loc_) / scale_;
            return log_norm_ - 0.5 * (shape_ + 1.0) * std::log1p(z * z / shape_);
        }
        case ParamId::theta:
            if (x <= 0.0) return -kInf;
            return log_norm_ - (n - 1.0) * std::log(x) - scale_ / x;
        case ParamId::precision_w:
            if (x < 0.0) return -kInf;
            if (x == 0.0) return shape_ == 1.0 ? log_norm_ : -kInf;
            return log_norm_ + (shape_ - 1.0) * std::log(x) - scale_ * x;
        case ParamId::eta:
            if (x <= 0.0) return -kInf;
            return log_norm_ + (n - 2.0) * std::log(x) - (n - 1.5) * std::log(x * x + eta_a_);
    }
    return -kInf;
}

double PosteriorDistribution::pdf(double x) const { return std::exp(log_pdf(x)); }

double PosteriorDistribution::cdf(double x) const {
    if (std::isnan(x)) throw DomainError("cdf: NaN argument");
    switch (id_) {
        case ParamId::beta:
            return nm::student_t_cdf(shape_, (x - loc_) / scale_);
        case ParamId::theta:
            if (x <= 0.0) return 0.0;
            return nm::reg_inc_gamma_upper(shape_, scale_ / x);
        case ParamId::precision_w:
            if (x <= 0.0) return 0.0;
            return nm::reg_inc_gamma(shape_, scale_ * x);
        case ParamId::eta: {
            if (x <= 0.0) return 0.0;
            if (!closed_form_cdf_) return cdf_by_quadrature(x);
            if (std::isinf(x)) return 1.0;
            const double n = static_cast<double>(stats_.n);
            return nm::reg_inc_beta(0.5 * (n - 1.0), 0.5 * (n - 2.0), x * x / (x * x + eta_a_));
        }
    }
    return 0.0;
}

double PosteriorDistribution::cdf_by_quadrature(double x) const {
    if (id_ != ParamId::eta) throw DomainError("cdf_by_quadrature is defined for eta only");
    if (x <= 0.0) return 0.0;
    auto scaled = [this](double t) {
        return t <= 0.0 ? 0.0 : std::exp(eta_log_kernel_std(t) - eta_log_mode_kernel_);
    };
    const auto part = numerics::integrate(scaled, 0.0, x / eta_sqrt_a_,
                                          numerics::QuadratureOptions{1e-14, 1e-13, 4000});
    return std::min(1.0, part.value * std::exp(eta_log_mode_kernel_ - eta_log_integral_std_));
}

double PosteriorDistribution::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw DomainError(fmt::format("quantile: p = {} outside (0, 1)", p));
    const double n = static_cast<double>(stats_.n);
    switch (id_) {
        case ParamId::beta:
            return loc_ + scale_ * nm::student_t_quantile(shape_, p);
        case ParamId::theta:
            return scale_ / nm::inverse_reg_inc_gamma(shape_, 1.0 - p);
        case ParamId::precision_w:
            return nm::inverse_reg_inc_gamma(shape_, p) / scale_;
        case ParamId::eta: {
            if (closed_form_cdf_) {
                const double z = nm::inverse_reg_inc_beta(0.5 * (n - 1.0), 0.5 * (n - 2.0), p);
                return eta_sqrt_a_ * std::sqrt(z / (1.0 - z));
            }
            auto f = [&](double x) { return cdf(x) - p; };
            double hi = 2.0 * mode_;
            while (f(hi) < 0.0) hi *= 2.0;
            return nm::find_root(f, numerics::Bracket{0.0, hi},
                                 numerics::RootOptions{1e-15 * hi, 0.0, 500});
        }
    }
    return 0.0;
}

PosteriorDistribution beta_posterior(const model::SufficientStats& stats) {
    return PosteriorDistribution(ParamId::beta, stats);
}
PosteriorDistribution theta_posterior(const model::SufficientStats& stats) {
    return PosteriorDistribution(ParamId::theta, stats);
}
PosteriorDistribution precision_posterior(const model::SufficientStats& stats) {
    return PosteriorDistribution(ParamId::precision_w, stats);
}
PosteriorDistribution eta_posterior(const model::SufficientStats& stats) {
    return PosteriorDistribution(ParamId::eta, stats);
}
PosteriorDistribution make_posterior(ParamId id, const model::SufficientStats& stats) {
    return PosteriorDistribution(id, stats);
}

}  // namespace pmp::posterior
