#pragma once

// Residual and time-series diagnostics: first-order autocorrelation, linear
// detrending, trend t-test, first differences, Breusch-Pagan (F form) and
// Durbin's alternative test for serial correlation.

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "data_model.hpp"
#include "distributions.hpp"
#include "error.hpp"
#include "format.hpp"
#include "ols.hpp"

namespace happyreg {

struct AutocorrEstimate {
    double rho_hat = 0.0;
    double std_error = 0.0;
    std::size_t n_pairs = 0;
    /// |rho_hat| > 1.05: beyond what estimation noise plausibly explains.
    bool suspicious = false;
};

enum class Distribution { t, f };

struct TestReport {
    std::string name;
    double statistic = 0.0;
    Distribution distribution = Distribution::t;
    double df1 = 0.0; // t: degrees of freedom; F: numerator
    double df2 = 0.0; // F: denominator
    double p_value = 1.0;
    bool reject_at_5pct = false;
    /// Coefficient behind the statistic (trend slope, lagged-residual coefficient), NaN if none.
    double estimate = std::numeric_limits<double>::quiet_NaN();
    double estimate_se = std::numeric_limits<double>::quiet_NaN();

    std::string distribution_label() const {
        auto num = [](double d) { return format_sig(d, 10); };
        if (distribution == Distribution::t)
            return "t(" + num(df1) + ")";
        return "F(" + num(df1) + "," + num(df2) + ")";
    }
};

namespace detail {

inline TestReport finish_report(TestReport r) {
    r.reject_at_5pct = r.p_value < 0.05;
    return r;
}

inline Eigen::VectorXd to_vector(std::span<const double> s) {
    return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
}

inline OlsResult trend_regression(std::span<const double> series) {
    const auto n = static_cast<Eigen::Index>(series.size());
    Eigen::MatrixXd x(n, 2);
    x.col(0).setOnes();
    for (Eigen::Index i = 0; i < n; ++i)
        x(i, 1) = static_cast<double>(i + 1);
    return ols_fit(x, to_vector(series), {"Constant", "t"}, true);
}

} // namespace detail

/// OLS slope of x_t on (1, x_{t-1}) over the n-1 lagged pairs.
inline AutocorrEstimate first_order_autocorr(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 3)
        throw SpecError("first_order_autocorr: need at least 3 observations");
    const Eigen::VectorXd v = detail::to_vector(series);
    if ((v.array() == v(0)).all())
        throw DegenerateError("first_order_autocorr: series has zero variance");
    const auto m = static_cast<Eigen::Index>(n - 1);
    Eigen::MatrixXd x(m, 2);
    x.col(0).setOnes();
    x.col(1) = v.head(m);
    OlsResult fit;
    try {
        fit = ols_fit(x, v.tail(m), {"Constant", "lag"}, true);
    } catch (const RankError&) {
        throw DegenerateError("first_order_autocorr: lagged series has zero variance");
    }
    AutocorrEstimate est;
    est.rho_hat = fit.coefficients(1);
    est.std_error = fit.std_errors(1);
    est.n_pairs = n - 1;
    est.suspicious = std::fabs(est.rho_hat) > 1.05;
    return est;
}

inline std::vector<double> linear_detrend(std::span<const double> series) {
    if (series.size() < 3)
        throw SpecError("linear_detrend: need at least 3 observations");
    const auto fit = detail::trend_regression(series);
    return {fit.residuals.data(), fit.residuals.data() + fit.residuals.size()};
}

/// t test on the slope of the series regressed on (1, t).
inline TestReport time_trend_test(std::span<const double> series) {
    if (series.size() < 4)
        throw SpecError("time_trend_test: need at least 4 observations");
    const Eigen::VectorXd v = detail::to_vector(series);
    if ((v.array() == v(0)).all())
        throw DegenerateError("time_trend_test: constant series gives a degenerate fit (zero residual variance)");
    const auto fit = detail::trend_regression(series);
    TestReport r;
    r.name = "time trend";
    r.distribution = Distribution::t;
    r.df1 = static_cast<double>(fit.df_resid());
    r.statistic = fit.t_stats(1);
    r.p_value = fit.p_values(1);
    r.estimate = fit.coefficients(1);
    r.estimate_se = fit.std_errors(1);
    return detail::finish_report(r);
}

/// First differences; element i is x[i+1] - x[i], attributed to the later period.
inline std::vector<double> difference(std::span<const double> series) {
    if (series.size() < 2)
        throw SpecError("difference: need at least 2 observations");
    std::vector<double> out(series.size() - 1);
    for (std::size_t i = 0; i + 1 < series.size(); ++i)
        out[i] = series[i + 1] - series[i];
    return out;
}

namespace detail {

inline void check_fit_matches(const OlsResult& fit, const DesignMatrix& design, const char* who) {
    if (fit.n != design.rows() || fit.k != design.cols())
        throw SpecError(std::string(who) + ": fit was not produced from this design");
}

} // namespace detail

/// Breusch-Pagan, F form: squared residuals on a constant plus the
/// non-constant regressors, F = (R2/k) / ((1-R2)/(n-k-1)).
inline TestReport breusch_pagan(const OlsResult& fit, const DesignMatrix& design) {
    detail::check_fit_matches(fit, design, "breusch_pagan");
    const Eigen::Index n = design.rows();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < design.cols(); ++j)
        if (design.kinds[static_cast<std::size_t>(j)] != ColumnKind::constant)
            keep.push_back(j);
    const auto k_aux = static_cast<Eigen::Index>(keep.size());
    if (k_aux == 0)
        throw SpecError("breusch_pagan: the fit has no non-constant regressors");
    if (n - k_aux - 1 <= 0)
        throw SpecError("breusch_pagan: too few observations for the auxiliary regression");

    TestReport r;
    r.name = "Breusch-Pagan";
    r.distribution = Distribution::f;
    r.df1 = static_cast<double>(k_aux);
    r.df2 = static_cast<double>(n - k_aux - 1);

    const Eigen::VectorXd e2 = fit.residuals.array().square();
    const double spread = e2.maxCoeff() - e2.minCoeff();
    if (spread <= 1e-12 * std::max(e2.maxCoeff(), std::numeric_limits<double>::min())) {
        r.statistic = 0.0;
        r.p_value = 1.0;
        return detail::finish_report(r);
    }

    Eigen::MatrixXd x(n, k_aux + 1);
    std::vector<std::string> names{"Constant"};
    x.col(0).setOnes();
    for (Eigen::Index j = 0; j < k_aux; ++j) {
        x.col(j + 1) = design.x.col(keep[static_cast<std::size_t>(j)]);
        names.push_back(design.names[static_cast<std::size_t>(keep[static_cast<std::size_t>(j)])]);
    }
    const auto aux = ols_fit(x, e2, names, true);
    const double r2 = aux.r2;
    if (r2 >= 1.0) {
        r.statistic = std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
    } else {
        r.statistic = (r2 / r.df1) / ((1.0 - r2) / r.df2);
        r.p_value = f_distribution_sf(r.statistic, r.df1, r.df2);
    }
    return detail::finish_report(r);
}

/// Durbin's alternative test: residuals on their own lags (pre-sample lags
/// set to zero) plus every original regressor. One lag gives a t test on the
/// lag coefficient; several lags give the joint F test.
inline TestReport durbin_alternative(const OlsResult& fit, const DesignMatrix& design, int lags = 1) {
    detail::check_fit_matches(fit, design, "durbin_alternative");
    if (lags < 1)
        throw SpecError("durbin_alternative: lags must be positive");
    const Eigen::Index n = design.rows();
    const Eigen::Index k = design.cols();
    if (n <= k + lags)
        throw SpecError("durbin_alternative: insufficient observations (n=" + std::to_string(n) +
                        ", regressors=" + std::to_string(k) + ", lags=" + std::to_string(lags) + ")");
    const Eigen::VectorXd& e = fit.residuals;
    if (e.cwiseAbs().maxCoeff() == 0.0)
        throw DegenerateError("durbin_alternative: residuals are identically zero");

    Eigen::MatrixXd x(n, k + lags);
    x.leftCols(k) = design.x;
    std::vector<std::string> names = design.names;
    for (int l = 1; l <= lags; ++l) {
        auto col = x.col(k + l - 1);
        col.setZero();
        col.tail(n - l) = e.head(n - l);
        names.push_back("e_lag" + std::to_string(l));
    }
    OlsResult aux;
    try {
        aux = ols_fit(x, e, names, design.has_constant());
    } catch (const RankError& err) {
        throw DegenerateError(std::string("durbin_alternative: auxiliary regression is singular: ") + err.what());
    }

    TestReport r;
    r.name = "Durbin alternative";
    r.estimate = aux.coefficients(k);
    r.estimate_se = aux.std_errors(k);
    if (lags == 1) {
        r.distribution = Distribution::t;
        r.df1 = static_cast<double>(aux.df_resid());
        r.statistic = aux.t_stats(k);
        r.p_value = aux.p_values(k);
    } else {
        const double rss_restricted = e.squaredNorm();
        r.distribution = Distribution::f;
        r.df1 = lags;
        r.df2 = static_cast<double>(aux.df_resid());
        r.statistic = ((rss_restricted - aux.rss) / r.df1) / (aux.rss / r.df2);
        r.p_value = f_distribution_sf(r.statistic, r.df1, r.df2);
    }
    return detail::finish_report(r);
}

} // namespace happyreg
