#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "data_model.hpp"
#include "distributions.hpp"
#include "error.hpp"

namespace happyreg {

struct OlsResult {
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd t_stats;
    Eigen::VectorXd p_values;
    std::vector<bool> significant;
    Eigen::VectorXd residuals;
    Eigen::VectorXd fitted;
    /// (X'X)^{-1}, formed from the triangular factor.
    Eigen::MatrixXd xtx_inverse;
    Eigen::Index n = 0;
    Eigen::Index k = 0;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double rss = 0.0;
    double tss = 0.0;
    double sigma2 = 0.0;
    double significance = 0.05;
    bool has_constant = false;

    Eigen::Index df_resid() const noexcept { return n - k; }

    Eigen::Index index_of(const std::string& name) const {
        for (std::size_t j = 0; j < names.size(); ++j)
            if (names[j] == name)
                return static_cast<Eigen::Index>(j);
        throw SpecError("fit has no coefficient named '" + name + "'");
    }

    double coef(const std::string& name) const { return coefficients(index_of(name)); }
    double se(const std::string& name) const { return std_errors(index_of(name)); }
};

/// Relative threshold under which a column's residual norm, after projecting
/// on the preceding columns, marks it collinear.
inline constexpr double kRankTolerance = 1e-10;

/// Least squares via Householder QR with classical s^2 (X'X)^{-1} inference.
inline OlsResult ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> names,
                         bool has_constant, double significance = 0.05) {
    const Eigen::Index n = x.rows();
    const Eigen::Index k = x.cols();
    if (y.size() != n)
        throw SpecError("ols: dependent length does not match design rows");
    if (static_cast<Eigen::Index>(names.size()) != k)
        throw SpecError("ols: column names do not match design width");
    if (k == 0)
        throw SpecError("ols: design has no columns");
    if (n <= k)
        throw SpecError("ols: need more observations than columns (n=" + std::to_string(n) +
                        ", k=" + std::to_string(k) + ")");
    if (!x.allFinite() || !y.allFinite())
        throw DataError("ols: design or dependent contains non-finite values");

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < k; ++j) {
        const double col_norm = x.col(j).norm();
        if (std::fabs(r(j, j)) <= kRankTolerance * col_norm) {
            // Name the earlier column carrying the largest share of the projection.
            std::string partner = "?";
            if (j > 0) {
                Eigen::VectorXd b = r.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(r.col(j).head(j));
                Eigen::Index best = 0;
                double best_w = -1.0;
                for (Eigen::Index i = 0; i < j; ++i) {
                    const double w = std::fabs(b(i)) * x.col(i).norm();
                    if (w > best_w) {
                        best_w = w;
                        best = i;
                    }
                }
                partner = names[static_cast<std::size_t>(best)];
            }
            const auto& col = names[static_cast<std::size_t>(j)];
            throw RankError("ols: design is rank deficient; column '" + col + "' is collinear with '" + partner +
                                "' and preceding columns",
                            col, partner);
        }
    }

    OlsResult res;
    res.names = std::move(names);
    res.n = n;
    res.k = k;
    res.has_constant = has_constant;
    res.significance = significance;
    res.coefficients = qr.solve(y);
    res.fitted = x * res.coefficients;
    res.residuals = y - res.fitted;
    res.rss = res.residuals.squaredNorm();
    res.tss = has_constant ? (y.array() - y.mean()).matrix().squaredNorm() : y.squaredNorm();
    res.r2 = res.tss > 0.0 ? 1.0 - res.rss / res.tss : 0.0;
    const double dn = static_cast<double>(n);
    const double dk = static_cast<double>(k);
    res.adj_r2 = has_constant ? 1.0 - (1.0 - res.r2) * (dn - 1.0) / (dn - dk) : 1.0 - (1.0 - res.r2) * dn / (dn - dk);
    res.sigma2 = res.rss / (dn - dk);

    const Eigen::MatrixXd rinv =
        r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    res.xtx_inverse = rinv * rinv.transpose();

    res.std_errors = (res.sigma2 * res.xtx_inverse.diagonal().array()).sqrt().matrix();
    res.t_stats.resize(k);
    res.p_values.resize(k);
    res.significant.assign(static_cast<std::size_t>(k), false);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double b = res.coefficients(j);
        const double s = res.std_errors(j);
        double t;
        if (s > 0.0)
            t = b / s;
        else
            t = b == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                         : std::copysign(std::numeric_limits<double>::infinity(), b);
        res.t_stats(j) = t;
        res.p_values(j) = std::isnan(t) ? std::numeric_limits<double>::quiet_NaN() : t_two_sided_p(t, dn - dk);
        res.significant[static_cast<std::size_t>(j)] = res.p_values(j) < significance;
    }
    return res;
}

inline OlsResult ols_fit(const DesignMatrix& design, double significance = 0.05) {
    return ols_fit(design.x, design.y, design.names, design.has_constant(), significance);
}

} // namespace happyreg
