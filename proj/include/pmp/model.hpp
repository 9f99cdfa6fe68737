#pragma once

// The bivariate normal model in its classical parameterization
// (mu1, mu2, sigma1, sigma2, rho) and in the Fisher-orthogonal one
// (mu1, mu2, beta, theta, eta), where
//
//   beta  = rho * sigma2 / sigma1            regression slope of X2 on X1
//   theta = sigma1 * sigma2 * sqrt(1-rho^2)  square root of the generalized variance
//   eta   = sigma2 * sqrt(1-rho^2) / sigma1  sqrt(V(X2 | X1) / V(X1))
//
// In the orthogonal form the density factors as
//   f = (2 pi theta)^-1 exp{-[e^2/(theta eta) + eta d^2/theta] / 2}
// with d = x1 - mu1 and e = x2 - mu2 - beta d.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace pmp::model {

struct OriginalParams {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    double rho = 0.0;
};

struct OrthogonalParams {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double beta = 0.0;
    double theta = 1.0;
    double eta = 1.0;
};

// Throw DomainError when an invariant is violated.
void validate(const OriginalParams& p);
void validate(const OrthogonalParams& p);

OrthogonalParams to_orthogonal(const OriginalParams& p);
OriginalParams to_original(const OrthogonalParams& p);

struct FisherInfo {
    // Information block for (mu1, mu2).
    std::array<std::array<double, 2>, 2> a_block{};
    // Diagonal information for (beta, theta, eta).
    std::array<double, 3> diag_block{};
};

FisherInfo fisher_information(const OrthogonalParams& p);

double log_density(const OrthogonalParams& p, double x1, double x2);

// Log-density in the classical (mu, Sigma) form; used to cross-check log_density.
double log_density_classical(const OriginalParams& p, double x1, double x2);

// Orders of differentiation with respect to (beta, theta, eta).
struct MultiIndex {
    int beta = 0;
    int theta = 0;
    int eta = 0;

    int order() const { return beta + theta + eta; }
};

/// Partial derivative of log f with respect to (beta, theta, eta), total order
/// 1 to 3. Exact: log f = -log(2 pi) - log(theta) - U(beta, eta) / (2 theta)
/// with U = e^2/eta + eta d^2, so every mixed partial is a product of a
/// derivative of U and a derivative of 1/theta. Throws DomainError for an
/// unsupported multi-index.
double log_density_partial(const OrthogonalParams& p, double x1, double x2, MultiIndex index);

// Same partial, taken as nested central differences of the exact first
// partials with step 1e-4 * max(1, |coordinate|). Accuracy O(h^2).
double log_density_partial_fd(const OrthogonalParams& p, double x1, double x2, MultiIndex index);

struct Observation {
    double x1 = 0.0;
    double x2 = 0.0;
};

using Dataset = std::vector<Observation>;

/// n independent draws. X1 = mu1 + sigma1 Z1 and
/// X2 = mu2 + sigma2 (rho Z1 + sqrt(1-rho^2) Z2). Deterministic in seed.
Dataset sample(const OriginalParams& p, std::size_t n, std::uint64_t seed);

struct SufficientStats {
    std::size_t n = 0;
    double xbar1 = 0.0;
    double xbar2 = 0.0;
    // Centered sums of squares and cross-products (not divided by n).
    double s11 = 0.0;
    double s22 = 0.0;
    double s12 = 0.0;
    // Residual sum of squares of X2 on X1: s22 - s12^2 / s11.
    double s22_1 = 0.0;
};

// Throws DegenerateDataError if n < 3, s11 == 0 or s22_1 == 0.
SufficientStats sufficient_stats(std::span<const Observation> data);

// Builds stats from the four sums directly; validates the same invariants.
SufficientStats make_stats(std::size_t n, double s11, double s22_1, double s12 = 0.0,
                           double xbar1 = 0.0, double xbar2 = 0.0);

}  // namespace pmp::model
