#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "pmp/coverage.hpp"
#include "pmp/errors.hpp"

namespace cv = pmp::coverage;
using pmp::interval::IntervalKind;
using pmp::posterior::ParamId;

namespace {

cv::CoverageCellSpec small_cell(double rho, std::size_t n, std::size_t reps) {
    cv::CoverageCellSpec s;
    s.rho = rho;
    s.n = n;
    s.replicates = reps;
    return s;
}

}  // namespace

TEST(Coverage, MixSeedIsDeterministicAndSpreads) {
    EXPECT_EQ(cv::mix_seed(1, 2, 3), cv::mix_seed(1, 2, 3));
    EXPECT_NE(cv::mix_seed(1, 2, 3), cv::mix_seed(1, 3, 2));
    EXPECT_NE(cv::mix_seed(1, 0, 0), cv::mix_seed(2, 0, 0));
    EXPECT_NE(cv::mix_seed(1, 0, 1), cv::mix_seed(1, 1, 0));
}

TEST(Coverage, ValidateSpec) {
    EXPECT_NO_THROW(cv::validate(small_cell(0.5, 4, 100)));
    EXPECT_THROW(cv::validate(small_cell(1.0, 4, 100)), pmp::DomainError);
    EXPECT_THROW(cv::validate(small_cell(0.5, 3, 100)), pmp::DomainError);
    EXPECT_THROW(cv::validate(small_cell(0.5, 4, 99)), pmp::DomainError);
    auto bad_level = small_cell(0.5, 4, 100);
    bad_level.level = 1.0;
    EXPECT_THROW(cv::validate(bad_level), pmp::DomainError);
    auto bad_sigma = small_cell(0.5, 4, 100);
    bad_sigma.params_base.sigma1 = 0.0;
    EXPECT_THROW(cv::validate(bad_sigma), pmp::DomainError);
}

TEST(Coverage, CellResultIndependentOfWorkerCount) {
    auto spec = small_cell(-0.6, 5, 600);
    spec.workers = 1;
    const auto a = cv::run_cell(spec);
    spec.workers = 4;
    const auto b = cv::run_cell(spec);
    for (ParamId id : cv::kCoverageParams) {
        EXPECT_EQ(a[id].coverage, b[id].coverage);
        EXPECT_EQ(a[id].ks_statistic, b[id].ks_statistic);
        EXPECT_EQ(a[id].replicates_used, b[id].replicates_used);
    }
}

TEST(Coverage, HpdCoverageNearNominal) {
    const auto cell = cv::run_cell(small_cell(0.5, 6, 4000));
    for (ParamId id : cv::kCoverageParams) {
        const auto& p = cell[id];
        EXPECT_EQ(p.failures, 0u);
        EXPECT_EQ(p.replicates_used, 4000u);
        EXPECT_NEAR(p.std_error, std::sqrt(p.coverage * (1.0 - p.coverage) / 4000.0), 1e-15);
        EXPECT_NEAR(p.coverage, 0.95, 4.0 * 0.00345) << pmp::posterior::to_string(id);
    }
    EXPECT_THROW(cell[ParamId::precision_w], pmp::DomainError);
}

// One-sided posterior quantiles are exact frequentist bounds here.
TEST(Coverage, OneSidedQuantileMatching) {
    for (auto kind : {IntervalKind::upper_one_sided, IntervalKind::lower_one_sided, IntervalKind::equal_tailed}) {
        auto spec = small_cell(0.3, 5, 3000);
        spec.kind = kind;
        spec.level = 0.9;
        spec.workers = 0;
        const auto cell = cv::run_cell(spec);
        for (ParamId id : cv::kCoverageParams) {
            EXPECT_NEAR(cell[id].coverage, 0.9, 4.0 * std::sqrt(0.09 / 3000.0))
                << pmp::posterior::to_string(id) << " " << pmp::interval::to_string(kind);
        }
    }
}

TEST(Coverage, TableOrderingAndErrorCells) {
    auto defaults = small_cell(0.0, 4, 100);
    const std::vector<double> rhos = {0.5, -0.2, 1.5};
    const std::vector<std::size_t> ns = {6, 4};
    const auto report = cv::run_table(rhos, ns, defaults);
    ASSERT_EQ(report.cells.size(), 6u);
    EXPECT_EQ(report.cells[0].rho, -0.2);
    EXPECT_EQ(report.cells[0].n, 4u);
    EXPECT_EQ(report.cells[1].n, 6u);
    EXPECT_EQ(report.cells[2].rho, 0.5);
    EXPECT_TRUE(report.cells[0].error.empty());
    EXPECT_FALSE(report.cells[4].error.empty());
    EXPECT_EQ(report.cells[4].params[0].failures, 100u);
    EXPECT_THROW(cv::run_table(std::vector<double>{}, ns, defaults), pmp::DomainError);
}

TEST(Coverage, TableCellMatchesStandaloneCellWithIndex) {
    auto defaults = small_cell(0.0, 4, 200);
    const std::vector<double> rhos = {0.25, 0.75};
    const std::vector<std::size_t> ns = {4, 8};
    const auto report = cv::run_table(rhos, ns, defaults);
    auto spec = small_cell(0.75, 8, 200);
    spec.cell_index = 3;
    const auto cell = cv::run_cell(spec);
    EXPECT_EQ(cell[ParamId::eta].coverage, report.cells[3][ParamId::eta].coverage);
    EXPECT_EQ(cell[ParamId::beta].ks_statistic, report.cells[3][ParamId::beta].ks_statistic);
}

TEST(Coverage, Writers) {
    auto defaults = small_cell(0.0, 4, 100);
    const std::vector<double> rhos = {0.25, 0.5};
    const std::vector<std::size_t> ns = {4, 8};
    const auto report = cv::run_table(rhos, ns, defaults);
    std::ostringstream csv;
    cv::write_csv(csv, report);
    const std::string text = csv.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "rho,n,param,kind,level,coverage,stderr,replicates,failures");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 13);
    EXPECT_NE(text.find("\n0.25,4,beta,hpd,0.95,"), std::string::npos);

    std::ostringstream md;
    cv::write_markdown(md, report);
    EXPECT_NE(md.str().find("| rho | n | beta | theta | eta |"), std::string::npos);
    EXPECT_NE(md.str().find("| 0.25 | 4 |"), std::string::npos);
    EXPECT_NE(md.str().find("|  | 8 |"), std::string::npos);
}

TEST(KolmogorovSmirnov, Statistic) {
    EXPECT_DOUBLE_EQ(cv::ks_uniform_statistic({0.5}), 0.5);
    EXPECT_NEAR(cv::ks_uniform_statistic({0.1, 0.3, 0.5, 0.7, 0.9}), 0.1, 1e-15);
    EXPECT_NEAR(cv::ks_uniform_statistic({0.9, 0.95, 0.99, 0.999}), 0.9, 1e-15);
    EXPECT_EQ(cv::ks_uniform_statistic({}), 0.0);
}

TEST(KolmogorovSmirnov, PValueMatchesLimitingDistribution) {
    // Survival function of the limiting Kolmogorov distribution, frozen from
    // an independent implementation.
    const std::vector<std::pair<double, double>> reference = {
        {0.4, 0.9971923267772983},   {0.8, 0.5441424115741981},    {1.0, 0.26999967167735456},
        {1.36, 0.049485876755377876}, {1.63, 0.009846364888486529}, {2.0, 0.0006709252557796953},
    };
    for (const auto& [lambda, sf] : reference) {
        // Large n: the Stephens factor tends to sqrt(n).
        const std::size_t n = 100000000;
        const double d = lambda / std::sqrt(static_cast<double>(n));
        EXPECT_NEAR(cv::ks_pvalue(d, n), sf, 1e-4) << lambda;
    }
    EXPECT_EQ(cv::ks_pvalue(0.0, 5000), 1.0);
    EXPECT_LT(cv::ks_pvalue(0.05, 5000), 1e-9);
}
