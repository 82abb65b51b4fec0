#pragma once

#include <stdexcept>
#include <string>

namespace happyreg {

/// Base for every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain input data (CSV cells, code sets, duplicate years).
class DataError : public Error {
public:
    using Error::Error;
};

/// A model request that cannot be honoured: unknown variable, bad spec, too few rows.
class SpecError : public Error {
public:
    using Error::Error;
};

/// Design matrix does not have full column rank.
class RankError : public Error {
public:
    RankError(const std::string& msg, std::string column, std::string partner)
        : Error(msg), column_(std::move(column)), partner_(std::move(partner)) {}

    const std::string& column() const noexcept { return column_; }
    const std::string& partner() const noexcept { return partner_; }

private:
    std::string column_;
    std::string partner_;
};

/// A fit that degenerates (zero-variance residuals, empty category, separation).
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Iterative estimator stopped without meeting its convergence test.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, int iterations, double loglik, double grad_norm)
        : Error(msg), iterations_(iterations), loglik_(loglik), grad_norm_(grad_norm) {}

    int iterations() const noexcept { return iterations_; }
    double loglik() const noexcept { return loglik_; }
    double gradient_norm() const noexcept { return grad_norm_; }

private:
    int iterations_;
    double loglik_;
    double grad_norm_;
};

} // namespace happyreg
