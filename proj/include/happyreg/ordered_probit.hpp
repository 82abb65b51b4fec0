#pragma once

// Ordered probit by Newton-Raphson.
//
// Latent y* = x'b + e, e ~ N(0,1); category j is observed when
// c_{j-1} < y* <= c_j with c_0 = -inf and c_K = +inf. There is no constant:
// the cut points absorb it. The optimizer works on (b, c_1, d_2, ..., d_{K-1})
// with c_j = c_{j-1} + exp(d_j), which keeps the cuts ordered.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "data_model.hpp"
#include "distributions.hpp"
#include "error.hpp"

namespace happyreg {

struct OrderedProbitOptions {
    int max_iterations = 200;
    double loglik_tolerance = 1e-10;
    double gradient_tolerance = 1e-8;
    /// Linear indices or cuts beyond this magnitude signal separation.
    double divergence_bound = 40.0;
    double significance = 0.05;
};

struct OrderedProbitResult {
    std::vector<std::string> names;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd z_stats;
    Eigen::VectorXd p_values;
    std::vector<bool> significant;
    Eigen::VectorXd cuts;
    Eigen::VectorXd cut_std_errors;
    /// Inverse observed information over (coefficients, cuts).
    Eigen::MatrixXd covariance;
    double loglik = 0.0;
    double null_loglik = 0.0;
    double pseudo_r2 = 0.0;
    double lr_statistic = 0.0;
    int iterations = 0;
    bool converged = false;
    Eigen::Index n = 0;
    int categories = 0;
    double significance = 0.05;
};

/// Log-likelihood of the ordered probit in its natural parameters
/// (coefficients followed by the K-1 cut points), with analytic derivatives.
class OrderedProbitLikelihood {
public:
    struct Evaluation {
        double loglik = 0.0;
        Eigen::VectorXd gradient;
        Eigen::MatrixXd hessian;
    };

    OrderedProbitLikelihood(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, int categories)
        : x_(x), y_(y), categories_(categories) {
        if (y.size() != x.rows())
            throw SpecError("ordered probit: outcome length does not match design rows");
        if (categories < 2)
            throw SpecError("ordered probit: need at least two categories");
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if (y(i) < 1 || y(i) > categories)
                throw DataError("ordered probit: outcome " + std::to_string(y(i)) + " outside 1.." +
                                std::to_string(categories));
    }

    Eigen::Index num_coefficients() const noexcept { return x_.cols(); }
    int categories() const noexcept { return categories_; }
    Eigen::Index num_params() const noexcept { return x_.cols() + categories_ - 1; }

    /// Returns -inf when the cuts are not strictly increasing or a probability underflows.
    double loglik(const Eigen::VectorXd& params) const { return evaluate(params, false, false).loglik; }

    Evaluation evaluate(const Eigen::VectorXd& params, bool want_gradient = true, bool want_hessian = true) const {
        const Eigen::Index k = x_.cols();
        const Eigen::Index p = num_params();
        if (params.size() != p)
            throw SpecError("ordered probit: parameter vector has the wrong length");
        Evaluation ev;
        const Eigen::VectorXd cuts = params.tail(categories_ - 1);
        for (Eigen::Index j = 1; j < cuts.size(); ++j)
            if (!(cuts(j) > cuts(j - 1))) {
                ev.loglik = -std::numeric_limits<double>::infinity();
                return ev;
            }

        const Eigen::VectorXd index = x_ * params.head(k);
        const Eigen::Index n = x_.rows();
        if (want_gradient)
            ev.gradient = Eigen::VectorXd::Zero(p);
        Eigen::VectorXd w_bb;
        Eigen::VectorXd g_b; // per-observation d loglik / d index
        Eigen::MatrixXd h_bc;
        Eigen::MatrixXd h_cc;
        if (want_gradient)
            g_b.resize(n);
        if (want_hessian) {
            w_bb.resize(n);
            h_bc = Eigen::MatrixXd::Zero(k, categories_ - 1);
            h_cc = Eigen::MatrixXd::Zero(categories_ - 1, categories_ - 1);
        }

        double ll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int cat = y_(i);
            const bool has_upper = cat < categories_;
            const bool has_lower = cat > 1;
            const double u = has_upper ? cuts(cat - 1) - index(i) : 0.0;
            const double l = has_lower ? cuts(cat - 2) - index(i) : 0.0;
            double prob;
            if (!has_upper)
                prob = normal_sf(l);
            else if (!has_lower)
                prob = normal_cdf(u);
            else if (l > 0.0)
                prob = normal_sf(l) - normal_sf(u);
            else
                prob = normal_cdf(u) - normal_cdf(l);
            if (!(prob > 0.0)) {
                ev.loglik = -std::numeric_limits<double>::infinity();
                return ev;
            }
            ll += std::log(prob);
            if (!want_gradient)
                continue;

            const double pu = has_upper ? normal_pdf(u) : 0.0;
            const double pl = has_lower ? normal_pdf(l) : 0.0;
            const double d_u = pu / prob;
            const double d_l = -pl / prob;
            g_b(i) = -(d_u + d_l);
            if (has_upper)
                ev.gradient(k + cat - 1) += d_u;
            if (has_lower)
                ev.gradient(k + cat - 2) += d_l;

            if (!want_hessian)
                continue;
            const double d_uu = has_upper ? (-u * pu * prob - pu * pu) / (prob * prob) : 0.0;
            const double d_ll = has_lower ? (l * pl * prob - pl * pl) / (prob * prob) : 0.0;
            const double d_ul = pu * pl / (prob * prob);
            w_bb(i) = d_uu + d_ll + 2.0 * d_ul;
            if (has_upper) {
                h_bc.col(cat - 1) -= (d_uu + d_ul) * x_.row(i).transpose();
                h_cc(cat - 1, cat - 1) += d_uu;
            }
            if (has_lower) {
                h_bc.col(cat - 2) -= (d_ll + d_ul) * x_.row(i).transpose();
                h_cc(cat - 2, cat - 2) += d_ll;
            }
            if (has_upper && has_lower) {
                h_cc(cat - 1, cat - 2) += d_ul;
                h_cc(cat - 2, cat - 1) += d_ul;
            }
        }
        ev.loglik = ll;
        if (want_gradient)
            ev.gradient.head(k) = x_.transpose() * g_b;
        if (want_hessian) {
            ev.hessian.resize(p, p);
            ev.hessian.topLeftCorner(k, k) = x_.transpose() * w_bb.asDiagonal() * x_;
            ev.hessian.topRightCorner(k, categories_ - 1) = h_bc;
            ev.hessian.bottomLeftCorner(categories_ - 1, k) = h_bc.transpose();
            ev.hessian.bottomRightCorner(categories_ - 1, categories_ - 1) = h_cc;
        }
        return ev;
    }

    // --- ordered reparameterization (c_1, log increments) ---

    Eigen::VectorXd to_natural(const Eigen::VectorXd& theta) const {
        const Eigen::Index k = x_.cols();
        Eigen::VectorXd out = theta;
        for (Eigen::Index j = 1; j < categories_ - 1; ++j)
            out(k + j) = out(k + j - 1) + std::exp(theta(k + j));
        return out;
    }

    Eigen::VectorXd from_natural(const Eigen::VectorXd& params) const {
        const Eigen::Index k = x_.cols();
        Eigen::VectorXd out = params;
        for (Eigen::Index j = 1; j < categories_ - 1; ++j)
            out(k + j) = std::log(params(k + j) - params(k + j - 1));
        return out;
    }

    /// Log-likelihood, gradient and Hessian in the reparameterized space.
    Evaluation evaluate_reparam(const Eigen::VectorXd& theta, bool want_hessian = true) const {
        const Eigen::Index k = x_.cols();
        const Eigen::Index p = num_params();
        const Eigen::Index m = categories_ - 1;
        Evaluation nat = evaluate(to_natural(theta), true, want_hessian);
        if (!std::isfinite(nat.loglik))
            return nat;

        // d c_j / d theta: c_1 contributes 1 to every cut, d_m contributes exp(d_m) to cuts j >= m.
        Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(p, p);
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index q = 0; q <= j; ++q)
                jac(k + j, k + q) = q == 0 ? 1.0 : std::exp(theta(k + q));

        Evaluation out;
        out.loglik = nat.loglik;
        out.gradient = jac.transpose() * nat.gradient;
        if (want_hessian) {
            out.hessian = jac.transpose() * nat.hessian * jac;
            for (Eigen::Index q = 1; q < m; ++q)
                out.hessian(k + q, k + q) += std::exp(theta(k + q)) * nat.gradient.segment(k + q, m - q).sum();
        }
        return out;
    }

private:
    Eigen::MatrixXd x_;
    Eigen::VectorXi y_;
    int categories_;
};

/// Fit an ordered probit of the integer outcome `y` (codes 1..K) on `x`.
/// `x` must not contain a constant column.
inline OrderedProbitResult ordered_probit_fit(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                              std::vector<std::string> names,
                                              const OrderedProbitOptions& opts = {}) {
    const Eigen::Index n = x.rows();
    const Eigen::Index k = x.cols();
    if (static_cast<Eigen::Index>(names.size()) != k)
        throw SpecError("ordered probit: column names do not match design width");
    if (y.size() == 0)
        throw DataError("ordered probit: no observations");
    const int K = y.maxCoeff();
    if (y.minCoeff() < 1)
        throw DataError("ordered probit: outcome codes must start at 1");
    if (K < 2)
        throw DegenerateError("ordered probit: empty category 2 (outcome takes a single value)");
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(K), 0);
    for (Eigen::Index i = 0; i < n; ++i)
        ++counts[static_cast<std::size_t>(y(i) - 1)];
    for (int j = 0; j < K; ++j)
        if (counts[static_cast<std::size_t>(j)] == 0)
            throw DegenerateError("ordered probit: empty category " + std::to_string(j + 1));
    if (n <= k + K - 1)
        throw SpecError("ordered probit: need more observations than parameters");
    for (Eigen::Index j = 0; j < k; ++j)
        if ((x.col(j).array() == x(0, j)).all())
            throw SpecError("ordered probit: column '" + names[static_cast<std::size_t>(j)] +
                            "' is constant; the cut points already play the role of the intercept");

    OrderedProbitLikelihood lik(x, y, K);
    const Eigen::Index p = lik.num_params();

    // Start from the cuts-only closed form; the null log-likelihood comes for free.
    Eigen::VectorXd natural = Eigen::VectorXd::Zero(p);
    double cum = 0.0;
    double null_ll = 0.0;
    for (int j = 0; j < K; ++j) {
        const double share = static_cast<double>(counts[static_cast<std::size_t>(j)]) / static_cast<double>(n);
        null_ll += static_cast<double>(counts[static_cast<std::size_t>(j)]) * std::log(share);
        cum += share;
        if (j < K - 1)
            natural(k + j) = normal_quantile(cum);
    }
    Eigen::VectorXd theta = lik.from_natural(natural);

    auto diverged = [&](const Eigen::VectorXd& th) {
        const Eigen::VectorXd nat = lik.to_natural(th);
        const double idx = k > 0 ? (x * nat.head(k)).cwiseAbs().maxCoeff() : 0.0;
        return idx > opts.divergence_bound || nat.tail(K - 1).cwiseAbs().maxCoeff() > opts.divergence_bound;
    };

    OrderedProbitResult res;
    auto ev = lik.evaluate_reparam(theta);
    int iter = 0;
    bool converged = false;
    for (; iter < opts.max_iterations; ++iter) {
        if (ev.gradient.cwiseAbs().maxCoeff() < opts.gradient_tolerance) {
            converged = true;
            break;
        }
        Eigen::VectorXd dir;
        bool newton = true;
        Eigen::LLT<Eigen::MatrixXd> llt(-ev.hessian);
        if (llt.info() == Eigen::Success) {
            dir = llt.solve(ev.gradient);
        } else {
            newton = false;
            dir = ev.gradient / std::max(1.0, ev.gradient.norm());
        }

        double step = 1.0;
        Eigen::VectorXd candidate;
        double cand_ll = -std::numeric_limits<double>::infinity();
        for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
            candidate = theta + step * dir;
            cand_ll = lik.evaluate(lik.to_natural(candidate), false, false).loglik;
            if (std::isfinite(cand_ll) && cand_ll >= ev.loglik)
                break;
        }
        if (!(std::isfinite(cand_ll) && cand_ll >= ev.loglik)) {
            // No ascent direction left at working precision.
            converged = newton && ev.gradient.cwiseAbs().maxCoeff() < 1e-4 * static_cast<double>(n);
            break;
        }
        const double gain = cand_ll - ev.loglik;
        theta = candidate;
        ev = lik.evaluate_reparam(theta);
        if (diverged(theta))
            throw DegenerateError("ordered probit: separation detected (linear index or cut points diverging after " +
                                  std::to_string(iter + 1) + " iterations); the likelihood is unbounded");
        if (newton && gain < opts.loglik_tolerance) {
            ++iter;
            converged = true;
            break;
        }
    }
    if (!converged)
        throw ConvergenceError("ordered probit: no convergence after " + std::to_string(iter) +
                                   " iterations (loglik " + format_sig(ev.loglik) + ", max |gradient| " +
                                   format_sig(ev.gradient.cwiseAbs().maxCoeff()) + ")",
                               iter, ev.loglik, ev.gradient.cwiseAbs().maxCoeff());

    const Eigen::VectorXd params = lik.to_natural(theta);
    const auto nat = lik.evaluate(params);
    Eigen::LDLT<Eigen::MatrixXd> info(-nat.hessian);
    if (info.info() != Eigen::Success || !(info.vectorD().array() > 0.0).all())
        throw DegenerateError("ordered probit: observed information is singular at the optimum");

    res.names = std::move(names);
    res.n = n;
    res.categories = K;
    res.significance = opts.significance;
    res.iterations = iter;
    res.converged = true;
    res.covariance = info.solve(Eigen::MatrixXd::Identity(p, p));
    res.coefficients = params.head(k);
    res.cuts = params.tail(K - 1);
    const Eigen::VectorXd se = res.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    res.std_errors = se.head(k);
    res.cut_std_errors = se.tail(K - 1);
    res.z_stats = res.coefficients.cwiseQuotient(res.std_errors);
    res.p_values.resize(k);
    res.significant.resize(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
        res.p_values(j) = 2.0 * normal_sf(std::fabs(res.z_stats(j)));
        res.significant[static_cast<std::size_t>(j)] = res.p_values(j) < opts.significance;
    }
    res.loglik = nat.loglik;
    res.null_loglik = null_ll;
    res.pseudo_r2 = 1.0 - res.loglik / res.null_loglik;
    res.lr_statistic = 2.0 * (res.loglik - res.null_loglik);
    return res;
}

inline OrderedProbitResult ordered_probit_fit(const DesignMatrix& design, const OrderedProbitOptions& opts = {}) {
    if (design.has_constant())
        throw SpecError("ordered probit: design must not include a constant column");
    Eigen::VectorXi y(design.rows());
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
        const double v = design.y(i);
        if (v != std::floor(v))
            throw DataError("ordered probit: outcome '" + design.dependent + "' must be integer coded");
        y(i) = static_cast<int>(v);
    }
    return ordered_probit_fit(design.x, y, design.names, opts);
}

/// Category probabilities (n x K) implied by a fitted model at design rows `x`.
inline Eigen::MatrixXd category_probabilities(const OrderedProbitResult& fit, const Eigen::MatrixXd& x) {
    const Eigen::VectorXd index = x * fit.coefficients;
    Eigen::MatrixXd probs(x.rows(), fit.categories);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double prev = 0.0;
        for (int j = 0; j < fit.categories; ++j) {
            const double upper = j < fit.categories - 1 ? normal_cdf(fit.cuts(j) - index(i)) : 1.0;
            probs(i, j) = upper - prev;
            prev = upper;
        }
    }
    return probs;
}

} // namespace happyreg
