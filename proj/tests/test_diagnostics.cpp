#include <gtest/gtest.h>

#include <random>

#include "happyreg/diagnostics.hpp"
#include "oracles.hpp"

using namespace happyreg;

namespace {

// Fixed 8-point dataset: constant plus two regressors.
const double kX1[] = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
const double kX2[] = {2.0, 1.0, 4.0, 3.0, 6.0, 5.0, 8.0, 9.0};
const double kY[] = {3.1, 2.4, 6.3, 5.2, 9.8, 7.1, 13.9, 12.2};

DesignMatrix eight_point_design() {
    DesignMatrix dm;
    dm.names = {"Constant", "x1", "x2"};
    dm.kinds = {ColumnKind::constant, ColumnKind::raw, ColumnKind::raw};
    dm.x.resize(8, 3);
    dm.y.resize(8);
    for (int i = 0; i < 8; ++i) {
        dm.x(i, 0) = 1.0;
        dm.x(i, 1) = kX1[i];
        dm.x(i, 2) = kX2[i];
        dm.y(i) = kY[i];
    }
    return dm;
}

DesignMatrix simple_design(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    DesignMatrix dm;
    dm.names = {"Constant", "x"};
    dm.kinds = {ColumnKind::constant, ColumnKind::raw};
    dm.x.resize(x.size(), 2);
    dm.x.col(0).setOnes();
    dm.x.col(1) = x;
    dm.y = y;
    return dm;
}

} // namespace

TEST(Autocorr, AlternatingSeries) {
    std::vector<double> s;
    for (int i = 0; i < 40; ++i)
        s.push_back(i % 2 ? -1.0 : 1.0);
    const auto a = first_order_autocorr(s);
    EXPECT_NEAR(a.rho_hat, -1.0, 1e-12);
    EXPECT_EQ(a.n_pairs, 39u);
    EXPECT_FALSE(a.suspicious);
}

TEST(Autocorr, SimulatedAr1) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> s{z(rng) / 0.6};
    for (int i = 1; i < 10000; ++i)
        s.push_back(0.8 * s.back() + z(rng));
    const auto a = first_order_autocorr(s);
    EXPECT_GE(a.rho_hat, 0.78);
    EXPECT_LE(a.rho_hat, 0.82);
    EXPECT_GT(a.std_error, 0.0);
}

TEST(Detrend, HandCases) {
    std::vector<double> lin;
    for (int t = 1; t <= 30; ++t)
        lin.push_back(2.0 + 3.0 * t);
    for (double r : linear_detrend(lin))
        EXPECT_LT(std::fabs(r), 1e-10);
    for (double r : linear_detrend(std::vector<double>(6, 4.5)))
        EXPECT_LT(std::fabs(r), 1e-12);
    const auto r = linear_detrend(std::vector<double>{1, 3, 2});
    ASSERT_EQ(r.size(), 3u);
    EXPECT_NEAR(r[0], -0.5, 1e-12);
    EXPECT_NEAR(r[1], 1.0, 1e-12);
    EXPECT_NEAR(r[2], -0.5, 1e-12);
}

TEST(TrendTest, LinearAndConstant) {
    std::vector<double> lin;
    for (int t = 1; t <= 10; ++t)
        lin.push_back(5.0 - 0.5 * t);
    const auto r = time_trend_test(lin);
    EXPECT_TRUE(r.reject_at_5pct);
    EXPECT_LT(r.p_value, 1e-12);
    EXPECT_NEAR(r.estimate, -0.5, 1e-12);
    EXPECT_THROW(time_trend_test(std::vector<double>(10, 1.0)), DegenerateError);
}

TEST(Difference, Basics) {
    EXPECT_EQ(difference(std::vector<double>{1, 2, 4}), (std::vector<double>{1, 2}));
    for (double d : difference(std::vector<double>(5, 3.0)))
        EXPECT_EQ(d, 0.0);
    EXPECT_EQ(difference(std::vector<double>(24, 1.0)).size(), 23u);
}

TEST(BreuschPagan, MatchesHandAuxiliaryRegression) {
    const auto dm = eight_point_design();
    const auto fit = ols_fit(dm);
    const auto bp = breusch_pagan(fit, dm);

    oracle::Matrix x;
    for (int i = 0; i < 8; ++i)
        x.push_back({1.0, kX1[i], kX2[i]});
    const auto main = oracle::hand_ols(x, {kY, kY + 8});
    oracle::Vector e2;
    for (double e : main.resid)
        e2.push_back(e * e);
    const auto aux = oracle::hand_ols(x, e2);
    const double f = (aux.r2 / 2.0) / ((1.0 - aux.r2) / 5.0);
    EXPECT_NEAR(bp.statistic, f, 1e-8);
    EXPECT_EQ(bp.distribution_label(), "F(2,5)");
    EXPECT_NEAR(bp.p_value, f_distribution_sf(f, 2, 5), 1e-12);
}

TEST(BreuschPagan, ConstantSquaredResidualsGiveZero) {
    // Residuals of +-1 around a fit on a regressor orthogonal to the sign pattern.
    Eigen::VectorXd x(8), y(8);
    x << 1, 1, 2, 2, 3, 3, 4, 4;
    y << 1, -1, 2, 0, 3, 1, 4, 2;
    y.array() += 0.0;
    const auto dm = simple_design(x, y);
    const auto fit = ols_fit(dm);
    ASSERT_LT((fit.residuals.array().square() - 1.0).abs().maxCoeff(), 1e-12);
    const auto bp = breusch_pagan(fit, dm);
    EXPECT_EQ(bp.statistic, 0.0);
    EXPECT_EQ(bp.p_value, 1.0);
    EXPECT_FALSE(bp.reject_at_5pct);
}

TEST(BreuschPagan, SevenRegressorsOn23Observations) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z(0.0, 1.0);
    DesignMatrix dm;
    dm.names = {"Constant", "Unemp", "Infl", "GDPD", "t", "Party", "Disaster", "Tech"};
    dm.kinds.assign(8, ColumnKind::raw);
    dm.kinds[0] = ColumnKind::constant;
    dm.x.resize(23, 8);
    dm.y.resize(23);
    for (int i = 0; i < 23; ++i) {
        dm.x(i, 0) = 1.0;
        for (int j = 1; j < 8; ++j)
            dm.x(i, j) = j == 4 ? i + 1 : z(rng);
        dm.y(i) = z(rng);
    }
    const auto bp = breusch_pagan(ols_fit(dm), dm);
    EXPECT_EQ(bp.distribution_label(), "F(7,15)");
}

TEST(Durbin, MatchesHandAuxiliaryRegression) {
    const auto dm = eight_point_design();
    const auto fit = ols_fit(dm);
    const auto d = durbin_alternative(fit, dm, 1);

    oracle::Matrix x;
    for (int i = 0; i < 8; ++i)
        x.push_back({1.0, kX1[i], kX2[i]});
    const auto main = oracle::hand_ols(x, {kY, kY + 8});
    oracle::Matrix xa;
    for (int i = 0; i < 8; ++i)
        xa.push_back({1.0, kX1[i], kX2[i], i == 0 ? 0.0 : main.resid[static_cast<std::size_t>(i - 1)]});
    const auto aux = oracle::hand_ols(xa, main.resid);
    EXPECT_NEAR(d.estimate, aux.coef[3], 1e-8);
    EXPECT_NEAR(d.estimate_se, aux.se[3], 1e-8);
    EXPECT_NEAR(d.statistic, aux.coef[3] / aux.se[3], 1e-8);
    EXPECT_EQ(d.distribution_label(), "t(4)");
}

TEST(Durbin, MultipleLagsUseFTest) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::VectorXd x(60), y(60);
    for (int i = 0; i < 60; ++i) {
        x(i) = z(rng);
        y(i) = 1.0 + x(i) + z(rng);
    }
    const auto dm = simple_design(x, y);
    const auto fit = ols_fit(dm);
    const auto d = durbin_alternative(fit, dm, 2);
    EXPECT_EQ(d.distribution, Distribution::f);
    EXPECT_EQ(d.distribution_label(), "F(2,56)");
    // One-lag F and squared t agree.
    const auto one = durbin_alternative(fit, dm, 1);
    Eigen::MatrixXd xa(60, 3);
    xa << dm.x, Eigen::VectorXd::Zero(60);
    xa.col(2).tail(59) = fit.residuals.head(59);
    const auto aux = ols_fit(xa, fit.residuals, {"Constant", "x", "lag"}, true);
    const double f1 = (fit.residuals.squaredNorm() - aux.rss) / (aux.rss / 57.0);
    EXPECT_NEAR(one.statistic * one.statistic, f1, 1e-8 * f1);
}

TEST(Durbin, PalindromicResidualsGiveSameStatisticReversed) {
    // With a symmetric design the reversed problem has the reversed residuals.
    Eigen::VectorXd x(9), y(9);
    x << -4, -3, -2, -1, 0, 1, 2, 3, 4;
    y << 1.0, 0.2, -0.7, 0.5, 0.1, 0.5, -0.7, 0.2, 1.0;
    const auto dm = simple_design(x, y);
    Eigen::VectorXd xr = x.reverse(), yr = y.reverse();
    const auto dr = simple_design(xr, yr);
    const auto a = durbin_alternative(ols_fit(dm), dm, 1);
    const auto b = durbin_alternative(ols_fit(dr), dr, 1);
    EXPECT_NEAR(a.statistic, b.statistic, 1e-10);
}

TEST(Durbin, TooFewObservations) {
    Eigen::VectorXd x(3), y(3);
    x << 1, 2, 3;
    y << 1, 3, 2;
    const auto dm = simple_design(x, y);
    EXPECT_THROW(durbin_alternative(ols_fit(dm), dm, 1), SpecError);
}

TEST(SizeAndPower, NullRejectionRatesNearFivePercent) {
    std::mt19937_64 rng(123);
    std::normal_distribution<double> z(0.0, 1.0);
    const int reps = 1000, n = 100;
    int bp_rej = 0, dw_rej = 0, tr_rej = 0;
    for (int r = 0; r < reps; ++r) {
        Eigen::VectorXd x(n), y(n);
        std::vector<double> w(50);
        for (int i = 0; i < n; ++i) {
            x(i) = z(rng);
            y(i) = 0.5 + 0.3 * x(i) + z(rng);
        }
        for (auto& v : w)
            v = z(rng);
        const auto dm = simple_design(x, y);
        const auto fit = ols_fit(dm);
        bp_rej += breusch_pagan(fit, dm).reject_at_5pct;
        dw_rej += durbin_alternative(fit, dm, 1).reject_at_5pct;
        tr_rej += time_trend_test(w).reject_at_5pct;
    }
    EXPECT_NEAR(bp_rej / double(reps), 0.05, 0.02);
    EXPECT_NEAR(dw_rej / double(reps), 0.05, 0.02);
    EXPECT_NEAR(tr_rej / double(reps), 0.05, 0.02);
}

TEST(SizeAndPower, DurbinDetectsStrongAr1) {
    std::mt19937_64 rng(321);
    std::normal_distribution<double> z(0.0, 1.0);
    const int reps = 200, n = 200;
    int rej = 0;
    for (int r = 0; r < reps; ++r) {
        Eigen::VectorXd x(n), y(n);
        double u = z(rng) / std::sqrt(1 - 0.81);
        for (int i = 0; i < n; ++i) {
            u = 0.9 * u + z(rng);
            x(i) = z(rng);
            y(i) = 1.0 + x(i) + u;
        }
        const auto dm = simple_design(x, y);
        rej += durbin_alternative(ols_fit(dm), dm, 1).reject_at_5pct;
    }
    EXPECT_GT(rej / double(reps), 0.9);
}

TEST(Difference, CumulativeSumRecoversSeries) {
    const std::vector<double> s{3.0, 4.5, 4.0, 7.25, 6.0, 9.5};
    const auto d = difference(s);
    double acc = s.front();
    for (std::size_t i = 0; i < d.size(); ++i) {
        acc += d[i];
        EXPECT_NEAR(acc, s[i + 1], 1e-12);
    }
}

TEST(BreuschPagan, InvariantToShiftingDependent) {
    auto dm = eight_point_design();
    const auto a = breusch_pagan(ols_fit(dm), dm);
    dm.y.array() += 17.5;
    const auto b = breusch_pagan(ols_fit(dm), dm);
    EXPECT_NEAR(a.statistic, b.statistic, 1e-9);
    EXPECT_NEAR(a.p_value, b.p_value, 1e-10);
}

TEST(Durbin, ConstantOnlyPalindrome) {
    DesignMatrix dm;
    dm.names = {"Constant"};
    dm.kinds = {ColumnKind::constant};
    dm.x = Eigen::MatrixXd::Ones(9, 1);
    dm.y.resize(9);
    dm.y << 0.3, -1.2, 0.8, 2.0, -0.4, 2.0, 0.8, -1.2, 0.3;
    const auto a = durbin_alternative(ols_fit(dm), dm, 1);
    DesignMatrix dr = dm;
    dr.y = dm.y.reverse();
    const auto b = durbin_alternative(ols_fit(dr), dr, 1);
    EXPECT_NEAR(std::fabs(a.statistic), std::fabs(b.statistic), 1e-12);
}
