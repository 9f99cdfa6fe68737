#pragma once

// Numerical checks of the analytic matching results:
//
//  * Monte Carlo estimates of the third-order log-likelihood moments of the
//    orthogonal bivariate normal, compared with their closed forms.
//  * Residuals of the reduced matching differential equations (distribution
//    function, HPD and likelihood-ratio matching for beta, theta and eta)
//    evaluated for a candidate prior pi(beta, theta, eta) on a grid.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmp/model.hpp"

namespace pmp::verify {

struct ParamPoint {
    double beta = 0.0;
    double theta = 1.0;
    double eta = 1.0;
};

// pi and the partials the conditions use.
struct PriorJet {
    double value = 0.0;
    double d_beta = 0.0;
    double d_theta = 0.0;
    double d_eta = 0.0;
    double d_beta2 = 0.0;
    double d_theta2 = 0.0;
    double d_eta2 = 0.0;
};

struct PriorSpec {
    std::string name;
    std::function<double(const ParamPoint&)> log_prior;
    // Closed-form pi and its partials; when absent the checker differences
    // exp(log_prior) numerically.
    std::optional<std::function<PriorJet(const ParamPoint&)>> analytic_partials;
};

// pi ∝ 1/(theta eta).
PriorSpec matching_prior();
// pi ≡ 1.
PriorSpec flat_prior();
// pi ∝ c theta^a eta^b exp(k beta^2); covers scaled and beta-dependent variants in tests.
PriorSpec power_prior(double a, double b, double k = 0.0, double c = 1.0);
// Same prior without closed-form partials, forcing finite differences.
PriorSpec without_partials(PriorSpec prior);
// Looks up "matching" or "flat".
PriorSpec builtin_prior(std::string_view name);

enum class ConditionId {
    dist_fn_A1_beta,
    dist_fn_A2_beta,
    dist_fn_theta,
    dist_fn_eta_main,
    dist_fn_eta_aux,
    hpd_beta_pde,
    hpd_theta_pde,
    hpd_eta_pde,
    lr_beta_pde,
    lr_theta_pde,
    lr_eta_pde,
};

struct MatchingCondition {
    ConditionId id;
    std::string_view name;
    // The reduced equation, lemma constants substituted, "= 0" implied.
    std::string_view equation;
    std::string_view note;
};

const std::array<MatchingCondition, 11>& all_conditions();
const MatchingCondition& condition_info(ConditionId id);

enum class Route { analytic, finite_difference };

// Left-hand side of the condition at one point. The analytic route expands the
// operators with the product rule over the closed-form jet; the
// finite-difference route applies central differences to the printed
// composite expressions (e.g. d/dtheta of theta * pi) directly.
double residual_at(ConditionId id, const PriorSpec& prior, const ParamPoint& point, Route route);

struct GridAxis {
    double lo;
    double hi;
    std::size_t count;
};

struct Grid {
    GridAxis beta{-2.0, 2.0, 9};
    GridAxis theta{0.5, 3.0, 9};
    GridAxis eta{0.5, 3.0, 9};
};

inline constexpr double kAnalyticPassThreshold = 1e-5;
inline constexpr double kFiniteDifferencePassThreshold = 1e-3;

struct ResidualReport {
    ConditionId condition_id{};
    std::string prior_name;
    Grid grid;
    Route route = Route::analytic;
    double max_abs_residual = 0.0;
    // Signed residual at the worst point.
    double worst_residual = 0.0;
    ParamPoint worst_point;
    double threshold = kAnalyticPassThreshold;
    bool pass = false;
};

/// Throws DomainError if the grid leaves theta > 0, eta > 0 or the prior is
/// not finite at a grid point.
ResidualReport pde_residual(ConditionId id, const PriorSpec& prior, const Grid& grid);

// All eleven conditions in declaration order.
std::vector<ResidualReport> verify_prior(const PriorSpec& prior, const Grid& grid);

// CSV columns: condition_id,prior,max_abs_residual,worst_beta,worst_theta,worst_eta,pass
void write_residual_csv(std::ostream& out, const std::vector<ResidualReport>& reports);
void write_residual_table(std::ostream& out, const std::vector<ResidualReport>& reports);

struct ExpectationCheck {
    std::string derivative_spec;
    double claimed_value = 0.0;
    double mc_estimate = 0.0;
    double mc_stderr = 0.0;
    std::size_t n_samples = 0;
    bool pass = false;
};

inline constexpr std::size_t kMinLemmaSamples = 100000;

/// Monte Carlo check of the fifteen closed-form moments of the log-density
/// partials. A check passes when |estimate - claimed| <= 4 * stderr; an
/// integrand that is constant across samples (zero stderr) must hit the
/// claimed value to rounding.
std::vector<ExpectationCheck> verify_lemma(const model::OrthogonalParams& p, std::size_t n_samples,
                                           std::uint64_t seed);

void write_lemma_csv(std::ostream& out, const std::vector<ExpectationCheck>& checks);

}  // namespace pmp::verify
