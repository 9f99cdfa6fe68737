#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "pmp/errors.hpp"
#include "pmp/numerics.hpp"
#include "pmp/posterior.hpp"
#include "support/oracles.hpp"

namespace m = pmp::model;
namespace nm = pmp::numerics;
using pmp::posterior::ParamId;
using pmp::posterior::PosteriorDistribution;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<ParamId> kAllFamilies = {ParamId::beta, ParamId::theta, ParamId::precision_w, ParamId::eta};

std::vector<m::SufficientStats> sample_stats() {
    return {
        m::make_stats(4, 1.3, 0.7, 0.4),
        m::make_stats(10, 9.0, 4.0, 3.0),
        m::make_stats(22, 15.0, 2.5, 10.5),
        m::make_stats(60, 0.02, 300.0, -0.1),
        m::make_stats(200, 180.0, 210.0, 40.0),
    };
}

double total_mass(const PosteriorDistribution& d) {
    const double lo = d.support_min();
    const double mode = d.mode();
    auto f = [&](double x) { return d.pdf(x); };
    const nm::QuadratureOptions opts{1e-300, 1e-12, 4000};
    if (std::isinf(lo)) {
        return nm::integrate(f, -kInf, mode, opts).value + nm::integrate(f, mode, kInf, opts).value;
    }
    return nm::integrate(f, lo, mode, opts).value + nm::integrate(f, mode, kInf, opts).value;
}

}  // namespace

TEST(Posterior, ParamIdNames) {
    EXPECT_EQ(pmp::posterior::to_string(ParamId::precision_w), "w");
    EXPECT_EQ(pmp::posterior::parse_param_id("w"), ParamId::precision_w);
    EXPECT_EQ(pmp::posterior::parse_param_id("precision_w"), ParamId::precision_w);
    EXPECT_EQ(pmp::posterior::parse_param_id("eta"), ParamId::eta);
    EXPECT_THROW(pmp::posterior::parse_param_id("rho"), pmp::DomainError);
}

TEST(Posterior, BetaLocationScaleAndSymmetry) {
    const auto hand = m::make_stats(3, 2.0, 2.0 / 3.0, 0.0);
    EXPECT_EQ(pmp::posterior::beta_posterior(hand).mode(), 0.0);

    const auto s = m::make_stats(22, 15.0, 2.5, 10.5);
    const auto d = pmp::posterior::beta_posterior(s);
    EXPECT_NEAR(d.mode(), 0.7, 1e-15);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        const double dx = u(rng);
        EXPECT_NEAR(d.pdf(d.mode() + dx), d.pdf(d.mode() - dx), 1e-13 * d.pdf(d.mode()));
    }
    const double scale = std::sqrt(2.5 / (20.0 * 15.0));
    EXPECT_NEAR(d.quantile(0.975), 0.7 + scale * 2.0859634472658364, 1e-9);
}

// The beta marginal equals theta and eta integrated out of the joint
// posterior numerically, with the normalizing constant found the same way.
TEST(PosteriorOracle, BetaMatchesJointPosteriorQuadrature) {
    const auto s = m::make_stats(10, 9.0, 4.0, 3.0);
    const auto d = pmp::posterior::beta_posterior(s);
    const double shift = pmp::testing::joint_log_kernel(s, d.mode(), 1.0, 1.0);
    auto marginal = [&](double b) { return pmp::testing::beta_marginal_by_quadrature(s, b, shift); };
    const nm::QuadratureOptions opts{1e-300, 1e-9, 4000};
    const double norm = nm::integrate(marginal, -kInf, d.mode(), opts).value +
                        nm::integrate(marginal, d.mode(), kInf, opts).value;
    for (int i = 0; i < 20; ++i) {
        const double b = d.mode() - 1.5 + 3.0 * static_cast<double>(i) / 19.0;
        EXPECT_NEAR(d.pdf(b), marginal(b) / norm, 1e-5) << "beta = " << b;
    }
    // A scale without the 1/sqrt(S11) factor does not reproduce the oracle.
    const double wrong_scale = std::sqrt(4.0 / 8.0);
    const double b = d.mode() + 0.3;
    const double z = (b - d.mode()) / wrong_scale;
    const double wrong_pdf =
        std::exp(nm::log_gamma(4.5) - nm::log_gamma(4.0) - 0.5 * std::log(8.0 * std::numbers::pi) - 4.5 * std::log1p(z * z / 8.0)) /
        wrong_scale;
    EXPECT_GT(std::abs(wrong_pdf - marginal(b) / norm), 0.1);
}

TEST(Posterior, ThetaAndPrecision) {
    const auto s = m::make_stats(10, 9.0, 4.0, 1.0);
    const double r = 6.0;
    const auto th = pmp::posterior::theta_posterior(s);
    const auto w = pmp::posterior::precision_posterior(s);
    EXPECT_NEAR(th.mode(), r / 9.0, 1e-15);
    EXPECT_NEAR(w.mode(), 7.0 / r, 1e-15);
    const double mean_w =
        nm::integrate([&](double x) { return x * w.pdf(x); }, 0.0, kInf, nm::QuadratureOptions{1e-300, 1e-12, 4000})
            .value;
    EXPECT_NEAR(mean_w, 8.0 / r, 1e-10);

    std::mt19937_64 rng(8);
    std::lognormal_distribution<double> t(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double x = t(rng);
        EXPECT_NEAR(th.cdf(x) + w.cdf(1.0 / x), 1.0, 1e-10);
    }
}

TEST(Posterior, EtaIdentityMatchesQuadrature) {
    std::mt19937_64 rng(12);
    for (const auto& s : sample_stats()) {
        const auto d = pmp::posterior::eta_posterior(s);
        EXPECT_TRUE(d.uses_closed_form_cdf());
        EXPECT_EQ(d.cdf(0.0), 0.0);
        EXPECT_NEAR(d.cdf(1e9 * d.mode()), 1.0, 1e-12);
        std::uniform_real_distribution<double> u(0.05 * d.mode(), 5.0 * d.mode());
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double x = u(rng);
            worst = std::max(worst, std::abs(d.cdf(x) - d.cdf_by_quadrature(x)));
        }
        EXPECT_LE(worst, 1e-8) << "n = " << s.n;
    }
    EXPECT_THROW(pmp::posterior::theta_posterior(sample_stats()[1]).cdf_by_quadrature(1.0), pmp::DomainError);
}

TEST(Posterior, EtaMedianFromBetaMedian) {
    std::mt19937_64 rng(21);
    std::lognormal_distribution<double> ln(0.0, 1.5);
    for (int i = 0; i < 10; ++i) {
        const auto s = m::make_stats(10, ln(rng), ln(rng), 0.0);
        const auto d = pmp::posterior::eta_posterior(s);
        const double z = nm::inverse_reg_inc_beta(4.5, 4.0, 0.5);
        const double expected = std::sqrt(s.s22_1 / s.s11 * z / (1.0 - z));
        EXPECT_NEAR(d.quantile(0.5), expected, 1e-8 * std::max(1.0, expected));
    }
}

TEST(PosteriorProperty, NormalizedAndQuantileInvertsCdf) {
    for (const auto& s : sample_stats()) {
        for (ParamId id : kAllFamilies) {
            const auto d = pmp::posterior::make_posterior(id, s);
            EXPECT_NEAR(total_mass(d), 1.0, 1e-8) << pmp::posterior::to_string(id) << " n=" << s.n;
            for (double p = 0.001; p < 0.9995; p += 0.0415) {
                const double x = d.quantile(p);
                EXPECT_NEAR(d.cdf(x), p, 1e-9) << pmp::posterior::to_string(id) << " n=" << s.n;
                EXPECT_NEAR(d.quantile(d.cdf(x)), x, 1e-8 * std::max(1.0, std::abs(x)));
            }
            double prev = 0.0;
            for (double q = 0.01; q < 1.0; q += 0.01) {
                const double c = d.cdf(d.quantile(0.001) + q * (d.quantile(0.999) - d.quantile(0.001)));
                EXPECT_GE(c, prev);
                prev = c;
            }
        }
    }
}

// Log-density concave in log(theta) and log(eta), natively for w; the beta
// density is symmetric and decreasing away from its mode.
TEST(PosteriorProperty, ShapeNeededByHpdSolver) {
    for (const auto& s : sample_stats()) {
        const auto w = pmp::posterior::precision_posterior(s);
        const auto th = pmp::posterior::theta_posterior(s);
        const auto eta = pmp::posterior::eta_posterior(s);
        const auto beta = pmp::posterior::beta_posterior(s);
        auto in_log = [](const PosteriorDistribution& d) {
            return [&d](double u) { return d.log_pdf(std::exp(u)) + u; };
        };
        auto check_concave = [](auto f, double lo, double hi, const char* name, std::size_t n) {
            const int points = 400;
            const double h = (hi - lo) / points;
            for (int i = 1; i < points; ++i) {
                const double x = lo + i * h;
                const double second = f(x - h) - 2.0 * f(x) + f(x + h);
                EXPECT_LE(second, 1e-9 * std::max(1.0, std::abs(f(x)))) << name << " n=" << n << " at " << x;
            }
        };
        check_concave([&](double x) { return w.log_pdf(x); }, w.quantile(1e-4), w.quantile(1.0 - 1e-4), "w", s.n);
        check_concave(in_log(th), std::log(th.quantile(1e-4)), std::log(th.quantile(1.0 - 1e-4)), "theta", s.n);
        check_concave(in_log(eta), std::log(eta.quantile(1e-4)), std::log(eta.quantile(1.0 - 1e-4)), "eta", s.n);
        for (double dx = 0.0; dx < 5.0; dx += 0.1) {
            const double scale = beta.quantile(0.75) - beta.mode();
            EXPECT_GE(beta.pdf(beta.mode() + dx * scale), beta.pdf(beta.mode() + (dx + 0.1) * scale));
        }
    }
}

TEST(Posterior, RejectsTooFewObservations) {
    EXPECT_THROW(m::make_stats(2, 1.0, 1.0), pmp::DegenerateDataError);
}
