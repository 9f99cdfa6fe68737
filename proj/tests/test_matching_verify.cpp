#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "pmp/errors.hpp"
#include "pmp/matching_verify.hpp"

namespace v = pmp::verify;
using v::ConditionId;

namespace {

v::Grid small_grid() { return {{-1.0, 1.0, 3}, {0.7, 2.0, 3}, {0.6, 2.5, 3}}; }

}  // namespace

TEST(MatchingVerify, ConditionCatalogue) {
    const auto& all = v::all_conditions();
    std::set<std::string> names;
    for (const auto& c : all) {
        names.emplace(c.name);
        EXPECT_FALSE(c.equation.empty());
        EXPECT_EQ(v::condition_info(c.id).name, c.name);
    }
    EXPECT_EQ(names.size(), 11u);
    EXPECT_FALSE(v::condition_info(ConditionId::dist_fn_theta).note.empty());
}

TEST(MatchingVerify, MatchingPriorAnalyticResidualsVanish) {
    for (const auto& r : v::verify_prior(v::matching_prior(), v::Grid{})) {
        EXPECT_LE(r.max_abs_residual, 1e-12) << v::condition_info(r.condition_id).name;
        EXPECT_TRUE(r.pass);
        EXPECT_EQ(r.route, v::Route::analytic);
        EXPECT_EQ(r.threshold, v::kAnalyticPassThreshold);
    }
}

TEST(MatchingVerify, MatchingPriorFiniteDifferenceResidualsSmall) {
    for (const auto& r : v::verify_prior(v::without_partials(v::matching_prior()), v::Grid{})) {
        EXPECT_LE(r.max_abs_residual, 1e-6) << v::condition_info(r.condition_id).name;
        EXPECT_TRUE(r.pass);
        EXPECT_EQ(r.route, v::Route::finite_difference);
        EXPECT_EQ(r.threshold, v::kFiniteDifferencePassThreshold);
    }
}

// theta pi = 1/eta and eta pi = 1/theta cancel term by term, so only
// rounding in pi + theta dpi/dtheta remains.
TEST(MatchingVerify, HpdBetaZeroToRoundingForMatchingPrior) {
    const auto r = v::pde_residual(ConditionId::hpd_beta_pde, v::matching_prior(), v::Grid{});
    EXPECT_LE(r.max_abs_residual, 4.0 * std::numeric_limits<double>::epsilon());
}

TEST(MatchingVerify, FlatPriorHpdThetaResidualIsMinusTwo) {
    const v::Grid g;
    for (auto route : {v::Route::analytic, v::Route::finite_difference}) {
        for (std::size_t i = 0; i < g.beta.count; i += 2) {
            for (std::size_t j = 0; j < g.theta.count; ++j) {
                for (std::size_t k = 0; k < g.eta.count; k += 4) {
                    const v::ParamPoint p{g.beta.lo + 0.5 * static_cast<double>(i),
                                          g.theta.lo + 2.5 / 8.0 * static_cast<double>(j),
                                          g.eta.lo + 2.5 / 8.0 * static_cast<double>(k)};
                    EXPECT_NEAR(v::residual_at(ConditionId::hpd_theta_pde, v::flat_prior(), p, route), -2.0,
                                route == v::Route::analytic ? 1e-12 : 1e-8);
                }
            }
        }
    }
}

TEST(MatchingVerify, FlatPriorFailsThetaConditions) {
    std::set<ConditionId> failed;
    for (const auto& r : v::verify_prior(v::flat_prior(), v::Grid{})) {
        if (!r.pass) failed.insert(r.condition_id);
    }
    EXPECT_TRUE(failed.count(ConditionId::hpd_theta_pde));
    EXPECT_TRUE(failed.count(ConditionId::lr_theta_pde));
}

TEST(MatchingVerify, BetaFreePriorPassesA2) {
    for (auto prior : {v::power_prior(2.0, -3.0), v::flat_prior(), v::power_prior(-0.5, 0.7, 0.0, 4.0)}) {
        EXPECT_TRUE(v::pde_residual(ConditionId::dist_fn_A2_beta, prior, small_grid()).pass);
        EXPECT_TRUE(v::pde_residual(ConditionId::dist_fn_A2_beta, v::without_partials(prior), small_grid()).pass);
    }
    EXPECT_FALSE(v::pde_residual(ConditionId::dist_fn_A2_beta, v::power_prior(-1.0, -1.0, 0.3), small_grid()).pass);
}

// Every condition is linear in pi.
TEST(MatchingVerifyProperty, ResidualScalesWithPrior) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> ua(-2.0, 2.0);
    std::uniform_real_distribution<double> uc(0.1, 10.0);
    std::uniform_real_distribution<double> ub(-2.0, 2.0);
    std::uniform_real_distribution<double> up(0.5, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = ua(rng);
        const double b = ua(rng);
        const double k = 0.2 * ua(rng);
        const double c = uc(rng);
        const auto base = v::power_prior(a, b, k);
        const auto scaled = v::power_prior(a, b, k, c);
        const v::ParamPoint p{ub(rng), up(rng), up(rng)};
        for (const auto& cond : v::all_conditions()) {
            const double r1 = v::residual_at(cond.id, base, p, v::Route::analytic);
            const double rc = v::residual_at(cond.id, scaled, p, v::Route::analytic);
            EXPECT_NEAR(rc, c * r1, 1e-10 * std::max(1.0, std::abs(c * r1))) << cond.name;
        }
    }
}

// The product-rule expansion and the literal finite-difference forms agree.
TEST(MatchingVerifyProperty, AnalyticAndFiniteDifferenceRoutesAgree) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ua(-2.0, 2.0);
    std::uniform_real_distribution<double> ub(-1.5, 1.5);
    std::uniform_real_distribution<double> up(0.6, 2.5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto prior = v::power_prior(ua(rng), ua(rng), 0.3 * ua(rng));
        const v::ParamPoint p{ub(rng), up(rng), up(rng)};
        for (const auto& cond : v::all_conditions()) {
            const double exact = v::residual_at(cond.id, prior, p, v::Route::analytic);
            const double fd = v::residual_at(cond.id, prior, p, v::Route::finite_difference);
            EXPECT_NEAR(fd, exact, 1e-4 * std::max(1.0, std::abs(exact))) << cond.name << " trial " << trial;
        }
    }
}

TEST(MatchingVerify, GridValidation) {
    v::Grid bad;
    bad.theta = {0.0, 1.0, 3};
    EXPECT_THROW(v::pde_residual(ConditionId::hpd_theta_pde, v::matching_prior(), bad), pmp::DomainError);
    v::Grid empty;
    empty.eta.count = 0;
    EXPECT_THROW(v::pde_residual(ConditionId::hpd_theta_pde, v::matching_prior(), empty), pmp::DomainError);
    v::PriorSpec broken{"broken", [](const v::ParamPoint&) { return std::nan(""); }, std::nullopt};
    EXPECT_THROW(v::pde_residual(ConditionId::hpd_theta_pde, broken, small_grid()), pmp::DomainError);
    EXPECT_THROW(v::builtin_prior("jeffreys"), pmp::DomainError);
}

TEST(MatchingVerify, ResidualCsvAndTable) {
    const auto reports = v::verify_prior(v::flat_prior(), small_grid());
    std::ostringstream csv;
    v::write_residual_csv(csv, reports);
    const std::string text = csv.str();
    EXPECT_EQ(text.substr(0, text.find('\n')),
              "condition_id,prior,max_abs_residual,worst_beta,worst_theta,worst_eta,pass");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 12);
    EXPECT_NE(text.find("hpd_theta_pde,flat,2"), std::string::npos);

    std::ostringstream table;
    v::write_residual_table(table, reports);
    EXPECT_NE(table.str().find("quantile matching"), std::string::npos);
    EXPECT_NE(table.str().find("dist_fn_theta"), std::string::npos);
}

TEST(Lemma, AllMomentsWithinFourStandardErrors) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ub(-2.0, 2.0);
    std::uniform_real_distribution<double> up(0.3, 3.0);
    for (int point = 0; point < 3; ++point) {
        const pmp::model::OrthogonalParams p{ub(rng), ub(rng), ub(rng), up(rng), up(rng)};
        const auto checks = v::verify_lemma(p, 200000, 500 + static_cast<std::uint64_t>(point));
        ASSERT_EQ(checks.size(), 15u);
        for (const auto& c : checks) {
            EXPECT_TRUE(c.pass) << c.derivative_spec << ": " << c.mc_estimate << " vs " << c.claimed_value << " ± "
                                << c.mc_stderr;
            EXPECT_EQ(c.n_samples, 200000u);
            EXPECT_GE(c.mc_stderr, 0.0);
        }
    }
}

TEST(Lemma, ClaimedValuesAtReferencePoints) {
    const auto at = [](double theta, double eta, const std::string& spec) {
        for (const auto& c : v::verify_lemma({0.0, 0.0, 0.0, theta, eta}, v::kMinLemmaSamples, 1)) {
            if (c.derivative_spec == spec) return c.claimed_value;
        }
        ADD_FAILURE() << "missing " << spec;
        return std::nan("");
    };
    EXPECT_DOUBLE_EQ(at(1.0, 1.0, "E[d3l/dtheta3]"), 4.0);
    EXPECT_DOUBLE_EQ(at(1.0, 2.0, "E[d3l/dbeta2 deta]"), 0.125);
    EXPECT_DOUBLE_EQ(at(2.0, 1.0, "E[(dl/dtheta)^3]"), 0.25);
    EXPECT_DOUBLE_EQ(at(1.5, 0.5, "E[(dl/dbeta)^3]"), 0.0);
}

TEST(Lemma, RejectsSmallSamples) {
    EXPECT_THROW(v::verify_lemma({}, v::kMinLemmaSamples - 1, 1), pmp::DomainError);
}

TEST(Lemma, CsvHeader) {
    std::ostringstream out;
    v::write_lemma_csv(out, v::verify_lemma({}, v::kMinLemmaSamples, 3));
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "moment,claimed,estimate,stderr,samples,pass");
}
