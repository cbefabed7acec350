/**
 * @file ode.hpp
 * @brief Fundamental matrices of L[lambda] u = 0 via the companion system u' = A(t) u.
 *
 * Integration uses the Dormand-Prince 5(4) pair with adaptive steps. Every
 * accepted step is taken from the identity, so the stored fundamental matrices
 * are exact products of step maps and Phi(t) Phi(s)^{-1} carries rounding error
 * only. Off-node values are obtained by integrating again from the nearest
 * node on the left, which keeps the full integrator accuracy everywhere.
 */
#pragma once

#include <greenkit/error.hpp>
#include <greenkit/linear_operator.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace greenkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double default_integrator_tol = 1e-10;

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DormandPrince {
    static constexpr double c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static constexpr double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
    };
    static constexpr double b5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
    static constexpr double b4[7] = {5179.0 / 57600, 0.0,         7571.0 / 16695, 393.0 / 640,
                                     -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};
};

/// Companion system restricted to one coefficient segment.
class CompanionField {
public:
    CompanionField(const LinearOperator& op, std::size_t segment, double lambda)
        : op_(&op), segment_(segment), lambda_(lambda), coeffs_(op.order()) {}

    int dim() const { return op_->order(); }

    /// out = A(t) * x
    void apply(double t, const Matrix& x, Matrix& out) {
        const int m = dim();
        for (int k = 0; k < m; ++k) coeffs_[k] = op_->coefficient_on(segment_, k, t, lambda_);
        out.resize(m, x.cols());
        out.topRows(m - 1) = x.bottomRows(m - 1);
        out.row(m - 1) = -(coeffs_.transpose() * x);
    }

private:
    const LinearOperator* op_;
    std::size_t segment_;
    double lambda_;
    Vector coeffs_;
};

struct StepResult {
    Matrix map;  // Psi(t + h, t)
    double error; // scaled error norm, accept when <= 1
};

inline StepResult dp_step(CompanionField& field, double t, double h, double tol) {
    using DP = DormandPrince;
    const int m = field.dim();
    const Matrix identity = Matrix::Identity(m, m);
    Matrix k[7];
    Matrix stage(m, m);
    field.apply(t, identity, k[0]);
    for (int i = 1; i < 7; ++i) {
        stage = identity;
        for (int j = 0; j < i; ++j)
            if (DP::a[i][j] != 0.0) stage.noalias() += (h * DP::a[i][j]) * k[j];
        field.apply(t + DP::c[i] * h, stage, k[i]);
    }
    // Stage 7 argument is the 5th-order solution (FSAL).
    Matrix err = Matrix::Zero(m, m);
    for (int i = 0; i < 7; ++i) {
        const double e = DP::b5[i] - DP::b4[i];
        if (e != 0.0) err.noalias() += (h * e) * k[i];
    }
    double norm = 0.0;
    for (int c = 0; c < m; ++c)
        for (int r = 0; r < m; ++r) {
            const double scale = tol * (1.0 + std::max(std::fabs(identity(r, c)), std::fabs(stage(r, c))));
            norm = std::max(norm, std::fabs(err(r, c)) / scale);
        }
    return {stage, norm};
}

inline double next_step(double h, double err) {
    const double factor = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
    return h * std::clamp(factor, 0.2, 5.0);
}

inline void check_step(double h, double t) {
    if (!(h > 1e-13 * std::max(1.0, std::fabs(t))))
        throw NumericalError("integrator step size underflow at t = " + std::to_string(t));
}

/// Psi(b, a) on a single segment by adaptive integration from the identity.
inline Matrix propagate(const LinearOperator& op, std::size_t segment, double lambda, double a, double b,
                        double tol, double h) {
    CompanionField field(op, segment, lambda);
    const int m = op.order();
    Matrix psi = Matrix::Identity(m, m);
    double t = a;
    h = std::min(h, b - a);
    while (t < b) {
        const bool last = t + 1.01 * h >= b;
        const double step = last ? b - t : h;
        const StepResult r = dp_step(field, t, step, tol);
        if (r.error <= 1.0) {
            psi = r.map * psi;
            t = last ? b : t + step;
        }
        h = next_step(step, r.error);
        if (t < b) check_step(h, t);
    }
    return psi;
}

} // namespace detail

/// Fundamental matrix Phi(t) of L[lambda] with Phi(0) = I, sampled at accepted steps.
class FundamentalSystem {
public:
    FundamentalSystem(LinearOperator op, double lambda, double tol)
        : op_(std::move(op)), lambda_(lambda), tol_(tol) {
        if (!(tol > 0.0)) throw ConfigError("integrator tolerance must be positive");
        integrate();
    }

    const LinearOperator& op() const noexcept { return op_; }
    double lambda() const noexcept { return lambda_; }
    double tol() const noexcept { return tol_; }
    double length() const noexcept { return op_.length(); }
    int dim() const noexcept { return op_.order(); }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<Matrix>& node_states() const noexcept { return states_; }
    const Matrix& end_state() const noexcept { return states_.back(); }

    /// Phi(t).
    Matrix at(double t) const {
        const double len = length();
        const double slack = 1e-12 * len;
        if (!(t >= -slack && t <= len + slack))
            throw DomainError("t = " + std::to_string(t) + " outside [0, " + std::to_string(len) + "]");
        t = std::clamp(t, 0.0, len);
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
        std::size_t idx = static_cast<std::size_t>(std::distance(nodes_.begin(), it)) - 1;
        if (t == nodes_[idx]) return states_[idx];
        const Matrix local =
            detail::propagate(op_, step_segment_[idx], lambda_, nodes_[idx], t, tol_, t - nodes_[idx]);
        return local * states_[idx];
    }

    /// Phi(t) Phi(s)^{-1}, the state-transition matrix from s to t.
    Matrix transition(double s, double t) const {
        const Matrix phi_s = at(s);
        const Eigen::PartialPivLU<Matrix> lu(phi_s);
        const double rc = lu.rcond();
        if (!(rc > 1e-14))
            throw NumericalError("fundamental matrix ill-conditioned at s = " + std::to_string(s) +
                                 " (condition estimate " + std::to_string(1.0 / rc) + ")");
        return at(t) * lu.inverse();
    }

    /// Cauchy kernel: solution with zero data at s except u^(2n-1)(s) = 1, evaluated at t >= s.
    double cauchy_value(double t, double s) const {
        if (s > t) throw DomainError("cauchy_value requires s <= t");
        return transition(s, t)(0, dim() - 1);
    }

private:
    void integrate() {
        const int m = op_.order();
        nodes_.push_back(0.0);
        states_.push_back(Matrix::Identity(m, m));
        const auto segs = op_.segments();
        double h = std::min(0.05, segs.front().end - segs.front().begin);
        for (std::size_t si = 0; si < segs.size(); ++si) {
            const double b = segs[si].end;
            double t = segs[si].begin;
            detail::CompanionField field(op_, si, lambda_);
            std::size_t guard = 0;
            while (t < b) {
                if (++guard > 2000000) throw NumericalError("integrator step budget exhausted");
                const bool last = t + 1.01 * h >= b;
                const double step = last ? b - t : h;
                const detail::StepResult r = detail::dp_step(field, t, step, tol_);
                if (r.error <= 1.0) {
                    t = last ? b : t + step;
                    nodes_.push_back(t);
                    states_.push_back(r.map * states_.back());
                    step_segment_.push_back(si);
                }
                h = detail::next_step(step, r.error);
                if (t < b) detail::check_step(h, t);
            }
        }
    }

    LinearOperator op_;
    double lambda_;
    double tol_;
    std::vector<double> nodes_;
    std::vector<Matrix> states_;
    std::vector<std::size_t> step_segment_; // segment of the step starting at nodes_[i]
};

inline FundamentalSystem integrate_fundamental(const LinearOperator& op, double lam,
                                               double tol = default_integrator_tol) {
    return FundamentalSystem(op, lam, tol);
}

inline Matrix transition(const FundamentalSystem& fs, double s, double t) { return fs.transition(s, t); }

inline double cauchy_value(const FundamentalSystem& fs, double t, double s) { return fs.cauchy_value(t, s); }

} // namespace greenkit
