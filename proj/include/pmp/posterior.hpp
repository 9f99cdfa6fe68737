#pragma once

// Marginal posteriors under the prior pi(mu1, mu2, beta, theta, eta) ∝ 1/(theta eta).
//
// With S11, S12, S22.1 the centered sums of a sample of size n:
//
//   beta | data  ~ Student-t, df n-2, location S12/S11,
//                  scale sqrt(S22.1 / ((n-2) S11))
//   w = 1/theta  ~ Gamma(shape n-2, rate r),  r = sqrt(S11 S22.1)
//   theta        ∝ theta^-(n-1) exp(-r/theta)
//   eta          ∝ eta^(n-2) (eta^2 + S22.1/S11)^-(n-3/2)
//
// The beta scale carries a 1/sqrt(S11) factor: integrating theta and eta out
// of the joint posterior gives a kernel (1 + S11 (beta - S12/S11)^2 / S22.1)^-(n-1)/2.
// The eta density is normalized by quadrature; its cdf switches to the exact
// identity F(x) = I_z((n-1)/2, (n-2)/2), z = x^2 / (x^2 + S22.1/S11), once the
// two have been checked against each other at construction.

#include <string>
#include <string_view>

#include "pmp/model.hpp"

namespace pmp::posterior {

enum class ParamId { beta, theta, precision_w, eta };

std::string_view to_string(ParamId id);
// Accepts "beta", "theta", "w" (or "precision_w") and "eta".
ParamId parse_param_id(std::string_view name);

class PosteriorDistribution {
public:
    PosteriorDistribution(ParamId id, const model::SufficientStats& stats);

    ParamId param() const { return id_; }
    const model::SufficientStats& stats() const { return stats_; }
    double log_norm() const { return log_norm_; }

    double log_pdf(double x) const;
    double pdf(double x) const;
    double cdf(double x) const;
    // Inverse of cdf for p in (0, 1).
    double quantile(double p) const;
    double mode() const { return mode_; }
    // -inf for beta, 0 for the positive families.
    double support_min() const;

    // eta only: cdf by quadrature of the normalized density, independent of
    // the incomplete-beta identity.
    double cdf_by_quadrature(double x) const;
    // eta only: whether the construction-time check enabled the identity.
    bool uses_closed_form_cdf() const { return closed_form_cdf_; }

private:
    double eta_log_kernel_std(double t) const;

    ParamId id_;
    model::SufficientStats stats_;
    double log_norm_ = 0.0;
    double mode_ = 0.0;
    // beta: location, scale, df. theta / w: rate r and shape n-2.
    // eta: a = S22.1/S11 and its square root.
    double loc_ = 0.0;
    double scale_ = 1.0;
    double shape_ = 1.0;
    double eta_a_ = 1.0;
    double eta_sqrt_a_ = 1.0;
    double eta_log_mode_kernel_ = 0.0;
    double eta_log_integral_std_ = 0.0;
    bool closed_form_cdf_ = true;
};

PosteriorDistribution beta_posterior(const model::SufficientStats& stats);
PosteriorDistribution theta_posterior(const model::SufficientStats& stats);
PosteriorDistribution precision_posterior(const model::SufficientStats& stats);
PosteriorDistribution eta_posterior(const model::SufficientStats& stats);
PosteriorDistribution make_posterior(ParamId id, const model::SufficientStats& stats);

// Max |identity cdf - quadrature cdf| over the probe points used at construction.
inline constexpr double kEtaIdentityTolerance = 1e-8;

}  // namespace pmp::posterior
