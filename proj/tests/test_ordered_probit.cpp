#include <gtest/gtest.h>

#include <random>

#include "happyreg/ols.hpp"
#include "happyreg/ordered_probit.hpp"
#include "happyreg/pipeline.hpp"
#include "happyreg/synth.hpp"
#include "oracles.hpp"

using namespace happyreg;

namespace {

struct ProbitData {
    Eigen::MatrixXd x;
    Eigen::VectorXi y;
};

ProbitData simulate(std::size_t n, const Eigen::VectorXd& beta, const std::vector<double>& cuts, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::bernoulli_distribution coin(0.4);
    ProbitData d{Eigen::MatrixXd(static_cast<Eigen::Index>(n), beta.size()), Eigen::VectorXi(static_cast<Eigen::Index>(n))};
    for (Eigen::Index i = 0; i < d.x.rows(); ++i) {
        d.x(i, 0) = z(rng);
        if (beta.size() > 1)
            d.x(i, 1) = coin(rng) ? 1.0 : 0.0;
        if (beta.size() > 2)
            d.x(i, 2) = 0.5 * z(rng) + 1.0;
        const double latent = d.x.row(i).dot(beta) + z(rng);
        int c = 1;
        for (double t : cuts)
            if (latent > t)
                ++c;
        d.y(i) = c;
    }
    return d;
}

oracle::Matrix rows_of(const Eigen::MatrixXd& x) {
    oracle::Matrix m(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            m[static_cast<std::size_t>(i)].push_back(x(i, j));
    return m;
}

} // namespace

TEST(OrderedProbit, ConstantOnlyCutsAreNormalQuantiles) {
    const int n = 400;
    Eigen::MatrixXd x(n, 0);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i)
        y(i) = i < 100 ? 1 : (i < 300 ? 2 : 3);
    const auto fit = ordered_probit_fit(x, y, {});
    ASSERT_TRUE(fit.converged);
    EXPECT_NEAR(fit.cuts(0), oracle::inverse_normal_bisect(0.25), 1e-6);
    EXPECT_NEAR(fit.cuts(1), oracle::inverse_normal_bisect(0.75), 1e-6);
    EXPECT_NEAR(fit.cuts(0), -0.6745, 1e-4);
    EXPECT_NEAR(fit.loglik, fit.null_loglik, 1e-9);
    EXPECT_NEAR(fit.pseudo_r2, 0.0, 1e-12);
}

TEST(OrderedProbit, LikelihoodMatchesDirectFormula) {
    Eigen::VectorXd beta(3);
    beta << 0.4, -0.3, 0.2;
    const auto d = simulate(300, beta, {-0.5, 0.8}, 3);
    OrderedProbitLikelihood lik(d.x, d.y, 3);
    Eigen::VectorXd p(5);
    p << 0.1, 0.2, -0.3, -0.4, 0.9;
    std::vector<int> yv(d.y.data(), d.y.data() + d.y.size());
    EXPECT_NEAR(lik.loglik(p), oracle::oprobit_loglik(rows_of(d.x), yv, {0.1, 0.2, -0.3}, {-0.4, 0.9}), 1e-9);
    p(4) = -0.5; // cuts out of order
    EXPECT_EQ(lik.loglik(p), -INFINITY);
}

TEST(OrderedProbit, GradientMatchesFiniteDifferences) {
    Eigen::VectorXd beta(3);
    beta << 0.4, -0.3, 0.2;
    const auto d = simulate(500, beta, {-0.5, 0.8}, 5);
    OrderedProbitLikelihood lik(d.x, d.y, 3);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::VectorXd p(5);
        p << u(rng), u(rng), u(rng), -0.6 + u(rng) * 0.4, 0.7 + u(rng) * 0.4;
        const auto ev = lik.evaluate(p, true, true);
        for (Eigen::Index j = 0; j < p.size(); ++j) {
            const double h = 1e-5 * std::max(1.0, std::fabs(p(j)));
            Eigen::VectorXd a = p, b = p;
            a(j) += h;
            b(j) -= h;
            const double fd = (lik.loglik(a) - lik.loglik(b)) / (2 * h);
            EXPECT_LT(std::fabs(fd - ev.gradient(j)) / std::max(1.0, std::fabs(fd)), 1e-4) << "param " << j;
            const Eigen::VectorXd gd = (lik.evaluate(a, true, false).gradient - lik.evaluate(b, true, false).gradient) / (2 * h);
            EXPECT_LT((gd - ev.hessian.col(j)).cwiseAbs().maxCoeff() / std::max(1.0, gd.cwiseAbs().maxCoeff()), 1e-4);
        }
    }
}

TEST(OrderedProbit, RecoversParametersLargeSample) {
    Eigen::VectorXd beta(3);
    beta << 0.5, -0.4, 0.3;
    const std::vector<double> cuts{-0.6, 0.9};
    const auto d = simulate(20000, beta, cuts, 2024);
    const auto fit = ordered_probit_fit(d.x, d.y, {"x1", "x2", "x3"});
    ASSERT_TRUE(fit.converged);
    for (Eigen::Index j = 0; j < 3; ++j)
        EXPECT_LT(std::fabs(fit.coefficients(j) - beta(j)), 3.0 * fit.std_errors(j)) << j;
    for (Eigen::Index j = 0; j < 2; ++j)
        EXPECT_LT(std::fabs(fit.cuts(j) - cuts[static_cast<std::size_t>(j)]), 3.0 * fit.cut_std_errors(j)) << j;
    EXPECT_GE(fit.lr_statistic, 0.0);
    EXPECT_GT(fit.pseudo_r2, 0.0);
    EXPECT_LT(fit.pseudo_r2, 1.0);
    EXPECT_LT(fit.cuts(0), fit.cuts(1));
}

TEST(OrderedProbit, SignsAgreeWithOls) {
    Eigen::VectorXd beta(3);
    beta << 0.6, -0.5, 0.4;
    const auto d = simulate(4000, beta, {-0.3, 1.0}, 8);
    const auto fit = ordered_probit_fit(d.x, d.y, {"x1", "x2", "x3"});
    Eigen::MatrixXd xc(d.x.rows(), 4);
    xc.col(0).setOnes();
    xc.rightCols(3) = d.x;
    const auto ols = ols_fit(xc, d.y.cast<double>(), {"Constant", "x1", "x2", "x3"}, true);
    for (Eigen::Index j = 0; j < 3; ++j)
        EXPECT_EQ(fit.coefficients(j) > 0, ols.coefficients(j + 1) > 0);
}

TEST(OrderedProbit, ProbabilitiesSumToOne) {
    Eigen::VectorXd beta(3);
    beta << 0.5, -0.4, 0.3;
    const auto d = simulate(1000, beta, {-0.6, 0.9}, 12);
    const auto fit = ordered_probit_fit(d.x, d.y, {"x1", "x2", "x3"});
    const auto p = category_probabilities(fit, d.x);
    ASSERT_EQ(p.cols(), 3);
    EXPECT_LT((p.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_GT(p.minCoeff(), 0.0);
}

TEST(OrderedProbit, EmptyCategoryIsDegenerate) {
    Eigen::MatrixXd x(6, 1);
    x << 1, 2, 3, 4, 5, 6;
    Eigen::VectorXi y(6);
    y << 1, 1, 3, 1, 3, 3;
    try {
        ordered_probit_fit(x, y, {"x"});
        FAIL() << "expected DegenerateError";
    } catch (const DegenerateError& e) {
        EXPECT_NE(std::string(e.what()).find("empty category"), std::string::npos) << e.what();
    }
}

TEST(OrderedProbit, PerfectSeparationIsReported) {
    Eigen::MatrixXd x(9, 1);
    x << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    Eigen::VectorXi y(9);
    y << 1, 1, 1, 2, 2, 2, 3, 3, 3;
    EXPECT_THROW(ordered_probit_fit(x, y, {"x"}), Error);
}

TEST(OrderedProbit, RejectsConstantColumnDesign) {
    DesignMatrix dm;
    dm.names = {"Constant", "x"};
    dm.kinds = {ColumnKind::constant, ColumnKind::raw};
    dm.x = Eigen::MatrixXd::Ones(6, 2);
    dm.x.col(1) << 1, 2, 3, 4, 5, 6;
    dm.y.resize(6);
    dm.y << 1, 2, 3, 1, 2, 3;
    EXPECT_THROW(ordered_probit_fit(dm), SpecError);
}

TEST(OrderedProbit, AddingRegressorNeverLowersLoglik) {
    Eigen::VectorXd beta(3);
    beta << 0.5, -0.4, 0.3;
    const auto d = simulate(3000, beta, {-0.6, 0.9}, 14);
    double prev = -INFINITY;
    for (Eigen::Index k = 0; k <= 3; ++k) {
        std::vector<std::string> names;
        for (Eigen::Index j = 0; j < k; ++j)
            names.push_back("x" + std::to_string(j + 1));
        const auto fit = ordered_probit_fit(d.x.leftCols(k), d.y, names);
        EXPECT_GE(fit.loglik, prev - 1e-9);
        EXPECT_GE(fit.lr_statistic, -1e-9);
        EXPECT_GE(fit.pseudo_r2, -1e-12);
        prev = fit.loglik;
    }
}

TEST(OrderedProbit, SignificantOlsSignsAgreeOnSurveyLikeData) {
    std::map<int, double> intercepts{{1990, 1.6}, {1991, 1.75}, {1992, 1.7}, {1993, 1.65}};
    const auto synth = generate_micro(default_micro_dgp(intercepts), 5000, 31);
    const auto ols = pooled_ols(synth.data, baseline_micro_spec());
    const auto probit = pooled_ordered_probit(synth.data, baseline_micro_spec());
    ASSERT_EQ(synth.data.size(), 20000u);
    int checked = 0;
    for (std::size_t j = 0; j < probit.fit.names.size(); ++j) {
        const auto& name = probit.fit.names[j];
        if (!ols.fit.significant[static_cast<std::size_t>(ols.fit.index_of(name))])
            continue;
        ++checked;
        EXPECT_EQ(ols.fit.coef(name) > 0, probit.fit.coefficients(static_cast<Eigen::Index>(j)) > 0) << name;
    }
    EXPECT_GT(checked, 5);
}
