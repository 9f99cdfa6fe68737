#include "pmp/model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "pmp/errors.hpp"

namespace pmp::model {
namespace {

double factorial(int k) {
    double r = 1.0;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

double sign_pow(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }

// d^k_beta d^m_eta of U = e^2/eta + eta d^2, where e = y - beta d.
double u_partial(double d, double e, double eta, int k_beta, int k_eta) {
    double e_part;
    switch (k_beta) {
        case 0: e_part = e * e; break;
        case 1: e_part = -2.0 * d * e; break;
        case 2: e_part = 2.0 * d * d; break;
        default: e_part = 0.0; break;
    }
    double value = e_part * sign_pow(k_eta) * factorial(k_eta) / std::pow(eta, k_eta + 1);
    if (k_beta == 0) {
        if (k_eta == 0) value += eta * d * d;
        if (k_eta == 1) value += d * d;
    }
    return value;
}

void check_index(MultiIndex index) {
    if (index.beta < 0 || index.theta < 0 || index.eta < 0 || index.order() < 1 ||
        index.order() > 3) {
        std::ostringstream msg;
        msg << "log_density_partial: unsupported multi-index (" << index.beta << ", "
            << index.theta << ", " << index.eta << "); total order must be 1..3";
        throw DomainError(msg.str());
    }
}

double step_for(double coordinate) { return 1e-4 * std::max(1.0, std::abs(coordinate)); }

double fd_recursive(const OrthogonalParams& p, double x1, double x2, MultiIndex base,
                    MultiIndex remaining) {
    if (remaining.order() == 0) return log_density_partial(p, x1, x2, base);
    OrthogonalParams plus = p;
    OrthogonalParams minus = p;
    double h;
    if (remaining.beta > 0) {
        --remaining.beta;
        h = step_for(p.beta);
        plus.beta += h;
        minus.beta -= h;
    } else if (remaining.theta > 0) {
        --remaining.theta;
        h = step_for(p.theta);
        plus.theta += h;
        minus.theta -= h;
    } else {
        --remaining.eta;
        h = step_for(p.eta);
        plus.eta += h;
        minus.eta -= h;
    }
    return (fd_recursive(plus, x1, x2, base, remaining) -
            fd_recursive(minus, x1, x2, base, remaining)) /
           (2.0 * h);
}

}  // namespace

void validate(const OriginalParams& p) {
    if (!std::isfinite(p.mu1) || !std::isfinite(p.mu2)) throw DomainError("means must be finite");
    if (!(p.sigma1 > 0.0) || !std::isfinite(p.sigma1)) throw DomainError("sigma1 must be positive");
    if (!(p.sigma2 > 0.0) || !std::isfinite(p.sigma2)) throw DomainError("sigma2 must be positive");
    if (!(std::abs(p.rho) < 1.0)) throw DomainError("rho must satisfy |rho| < 1");
}

void validate(const OrthogonalParams& p) {
    if (!std::isfinite(p.mu1) || !std::isfinite(p.mu2) || !std::isfinite(p.beta)) {
        throw DomainError("mu1, mu2 and beta must be finite");
    }
    if (!(p.theta > 0.0) || !std::isfinite(p.theta)) throw DomainError("theta must be positive");
    if (!(p.eta > 0.0) || !std::isfinite(p.eta)) throw DomainError("eta must be positive");
}

OrthogonalParams to_orthogonal(const OriginalParams& p) {
    validate(p);
    const double root = std::sqrt((1.0 - p.rho) * (1.0 + p.rho));
    return OrthogonalParams{p.mu1, p.mu2, p.rho * p.sigma2 / p.sigma1,
                            p.sigma1 * p.sigma2 * root, p.sigma2 * root / p.sigma1};
}

OriginalParams to_original(const OrthogonalParams& p) {
    validate(p);
    // sigma1^2 = theta/eta, sigma2^2 = theta (eta^2 + beta^2) / eta.
    const double sigma1 = std::sqrt(p.theta / p.eta);
    const double sigma2 = std::sqrt(p.theta / p.eta) * std::hypot(p.eta, p.beta);
    const double rho = p.beta / std::hypot(p.eta, p.beta);
    return OriginalParams{p.mu1, p.mu2, sigma1, sigma2, rho};
}

FisherInfo fisher_information(const OrthogonalParams& p) {
    validate(p);
    const double te = p.theta * p.eta;
    FisherInfo info;
    info.a_block = {{{p.beta * p.beta / te + p.eta / p.theta, -p.beta / te},
                     {-p.beta / te, 1.0 / te}}};
    info.diag_block = {1.0 / (p.eta * p.eta), 1.0 / (p.theta * p.theta), 1.0 / (p.eta * p.eta)};
    return info;
}

double log_density(const OrthogonalParams& p, double x1, double x2) {
    const double d = x1 - p.mu1;
    const double e = x2 - p.mu2 - p.beta * d;
    return -std::log(2.0 * std::numbers::pi * p.theta) -
           0.5 * (e * e / (p.theta * p.eta) + p.eta * d * d / p.theta);
}

double log_density_classical(const OriginalParams& p, double x1, double x2) {
    const double z1 = (x1 - p.mu1) / p.sigma1;
    const double z2 = (x2 - p.mu2) / p.sigma2;
    const double one_m_r2 = 1.0 - p.rho * p.rho;
    const double q = (z1 * z1 - 2.0 * p.rho * z1 * z2 + z2 * z2) / one_m_r2;
    return -std::log(2.0 * std::numbers::pi * p.sigma1 * p.sigma2 * std::sqrt(one_m_r2)) - 0.5 * q;
}

double log_density_partial(const OrthogonalParams& p, double x1, double x2, MultiIndex index) {
    check_index(index);
    const double d = x1 - p.mu1;
    const double e = x2 - p.mu2 - p.beta * d;
    const int kt = index.theta;
    double value = 0.0;
    if (index.beta == 0 && index.eta == 0) {
        // d^k/dtheta^k of -log(theta).
        value += sign_pow(kt) * factorial(kt - 1) / std::pow(p.theta, kt);
    }
    const double inv_theta_partial = sign_pow(kt) * factorial(kt) / std::pow(p.theta, kt + 1);
    value -= 0.5 * u_partial(d, e, p.eta, index.beta, index.eta) * inv_theta_partial;
    return value;
}

double log_density_partial_fd(const OrthogonalParams& p, double x1, double x2, MultiIndex index) {
    check_index(index);
    // Peel one order off as an exact first partial, difference the rest.
    MultiIndex first{};
    MultiIndex rest = index;
    if (rest.beta > 0) {
        first.beta = 1;
        --rest.beta;
    } else if (rest.theta > 0) {
        first.theta = 1;
        --rest.theta;
    } else {
        first.eta = 1;
        --rest.eta;
    }
    return fd_recursive(p, x1, x2, first, rest);
}

Dataset sample(const OriginalParams& p, std::size_t n, std::uint64_t seed) {
    validate(p);
    if (n < 1) throw DomainError("sample: n must be at least 1");
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double root = std::sqrt((1.0 - p.rho) * (1.0 + p.rho));
    Dataset data(n);
    for (auto& obs : data) {
        const double z1 = normal(engine);
        const double z2 = normal(engine);
        obs.x1 = p.mu1 + p.sigma1 * z1;
        obs.x2 = p.mu2 + p.sigma2 * (p.rho * z1 + root * z2);
    }
    return data;
}

SufficientStats sufficient_stats(std::span<const Observation> data) {
    const std::size_t n = data.size();
    if (n < 3) throw DegenerateDataError("sufficient_stats: need at least 3 observations");
    double m1 = 0.0;
    double m2 = 0.0;
    for (const auto& obs : data) {
        m1 += obs.x1;
        m2 += obs.x2;
    }
    m1 /= static_cast<double>(n);
    m2 /= static_cast<double>(n);
    double s11 = 0.0;
    double s22 = 0.0;
    double s12 = 0.0;
    for (const auto& obs : data) {
        const double d1 = obs.x1 - m1;
        const double d2 = obs.x2 - m2;
        s11 += d1 * d1;
        s22 += d2 * d2;
        s12 += d1 * d2;
    }
    if (!(s11 > 0.0)) throw DegenerateDataError("sufficient_stats: X1 has zero spread");
    const double s22_1 = s22 - s12 * s12 / s11;
    // Relative guard: an exactly collinear sample leaves only rounding in s22_1.
    if (!(s22_1 > 1e-14 * s22)) {
        throw DegenerateDataError("sufficient_stats: X2 is collinear with X1 (S22.1 = 0)");
    }
    return SufficientStats{n, m1, m2, s11, s22, s12, s22_1};
}

SufficientStats make_stats(std::size_t n, double s11, double s22_1, double s12, double xbar1,
                           double xbar2) {
    if (n < 3) throw DegenerateDataError("stats: n must be at least 3");
    if (!(s11 > 0.0) || !std::isfinite(s11)) throw DegenerateDataError("stats: S11 must be positive");
    if (!(s22_1 > 0.0) || !std::isfinite(s22_1)) {
        throw DegenerateDataError("stats: S22.1 must be positive");
    }
    if (!std::isfinite(s12)) throw DegenerateDataError("stats: S12 must be finite");
    return SufficientStats{n, xbar1, xbar2, s11, s22_1 + s12 * s12 / s11, s12, s22_1};
}

}  // namespace pmp::model
