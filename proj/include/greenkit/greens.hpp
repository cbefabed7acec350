/**
 * @file greens.hpp
 * @brief Green's functions of L[lambda] under the six boundary-condition families.
 *
 * For a fundamental matrix Phi and w(s) = Phi(s)^{-1} e_{2n}, the kernel is
 *
 *     G(t, s) = e_1^T Phi(t) ( c(s) + [t >= s] w(s) ),   c(s) = K w(s),
 *
 * where K = -B^{-1} R_end Phi(L) makes every boundary functional vanish and
 * B = R_start + R_end Phi(L) is the boundary matrix. G is continuous on the
 * diagonal because the Cauchy kernel e_1^T Phi(t) w(s) vanishes at t = s.
 */
#pragma once

#include <greenkit/error.hpp>
#include <greenkit/linear_operator.hpp>
#include <greenkit/ode.hpp>
#include <greenkit/parallel.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace greenkit {

enum class BCKind { Neumann, Dirichlet, Mixed1, Mixed2, Periodic, Antiperiodic };

inline constexpr BCKind all_bc_kinds[] = {BCKind::Neumann, BCKind::Dirichlet,    BCKind::Mixed1,
                                          BCKind::Mixed2,  BCKind::Periodic, BCKind::Antiperiodic};

inline std::string_view to_string(BCKind kind) {
    switch (kind) {
    case BCKind::Neumann: return "neumann";
    case BCKind::Dirichlet: return "dirichlet";
    case BCKind::Mixed1: return "mixed1";
    case BCKind::Mixed2: return "mixed2";
    case BCKind::Periodic: return "periodic";
    case BCKind::Antiperiodic: return "antiperiodic";
    }
    return "?";
}

inline std::optional<BCKind> parse_bc_kind(std::string_view name) {
    for (BCKind k : all_bc_kinds)
        if (to_string(k) == name) return k;
    return std::nullopt;
}

/// start_coef * u^(derivative)(0) + end_coef * u^(derivative)(L) = 0
struct BoundaryFunctional {
    int derivative = 0;
    double start_coef = 0.0;
    double end_coef = 0.0;

    friend bool operator==(const BoundaryFunctional&, const BoundaryFunctional&) = default;
};

inline std::vector<BoundaryFunctional> boundary_functionals(BCKind kind, int n) {
    if (n < 1) throw ConfigError("half order must be at least 1");
    std::vector<BoundaryFunctional> out;
    auto separated = [&](int start_parity, int end_parity) {
        for (int k = 0; k < n; ++k) out.push_back({2 * k + start_parity, 1.0, 0.0});
        for (int k = 0; k < n; ++k) out.push_back({2 * k + end_parity, 0.0, 1.0});
    };
    switch (kind) {
    case BCKind::Neumann: separated(1, 1); break;
    case BCKind::Dirichlet: separated(0, 0); break;
    case BCKind::Mixed1: separated(1, 0); break;
    case BCKind::Mixed2: separated(0, 1); break;
    case BCKind::Periodic:
        for (int k = 0; k < 2 * n; ++k) out.push_back({k, 1.0, -1.0});
        break;
    case BCKind::Antiperiodic:
        for (int k = 0; k < 2 * n; ++k) out.push_back({k, 1.0, 1.0});
        break;
    }
    return out;
}

struct ProblemSpec {
    LinearOperator op;
    BCKind kind = BCKind::Dirichlet;
    double lambda = 0.0;
};

/// Resonance threshold on the row-normalized boundary determinant.
inline constexpr double resonance_threshold = 1e-10;

namespace detail {

struct BoundarySystem {
    Matrix start_rows; // R_start
    Matrix end_rows;   // R_end
    Matrix matrix;     // B
    Matrix trace_r;    // [I; Phi(L)] = Q * trace_r, positive diagonal
    Matrix balanced;   // row-normalized functionals applied to Q, so B = balanced * diag(norms) * trace_r
};

inline BoundarySystem assemble_boundary(BCKind kind, const FundamentalSystem& fs) {
    const int m = fs.dim();
    const auto functionals = boundary_functionals(kind, m / 2);
    BoundarySystem sys{Matrix::Zero(m, m), Matrix::Zero(m, m), Matrix(), Matrix(), Matrix()};
    for (int i = 0; i < m; ++i) {
        const auto& f = functionals[static_cast<std::size_t>(i)];
        sys.start_rows(i, f.derivative) = f.start_coef;
        sys.end_rows(i, f.derivative) = f.end_coef;
    }
    // Phi(0) = I
    sys.matrix = sys.start_rows + sys.end_rows * fs.end_state();

    // Orthonormal basis of the boundary traces (u(0), u(L)) of all solutions.
    Matrix traces(2 * m, m);
    traces.topRows(m) = Matrix::Identity(m, m);
    traces.bottomRows(m) = fs.end_state();
    const Eigen::HouseholderQR<Matrix> qr(traces);
    Matrix q = qr.householderQ() * Matrix::Identity(2 * m, m);
    Matrix r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    for (int i = 0; i < m; ++i)
        if (r(i, i) < 0.0) {
            r.row(i) *= -1.0;
            q.col(i) *= -1.0;
        }
    sys.trace_r = r;
    Matrix functional(m, 2 * m);
    functional << sys.start_rows, sys.end_rows;
    for (int i = 0; i < m; ++i) functional.row(i) /= functional.row(i).norm();
    sys.balanced = functional * q;
    return sys;
}

/// det of the balanced boundary matrix: B expressed in an orthonormal basis of the
/// solution space's boundary traces, each functional scaled to unit norm. Same zeros
/// and sign as det B, bounded by 1, and free of the exponential growth of Phi(L).
inline double normalized_det(const BoundarySystem& sys) { return sys.balanced.determinant(); }

} // namespace detail

/// Row i is functional i applied to the fundamental columns u_1 ... u_{2n}.
inline Matrix boundary_matrix(const ProblemSpec& problem, const FundamentalSystem& fs) {
    return detail::assemble_boundary(problem.kind, fs).matrix;
}

/// Normalized determinant of the boundary matrix (see detail::normalized_det).
/// Zero exactly at eigenvalues, continuous in lambda.
inline double char_det(const ProblemSpec& problem, double tol = default_integrator_tol) {
    const FundamentalSystem fs(problem.op, problem.lambda, tol);
    return detail::normalized_det(detail::assemble_boundary(problem.kind, fs));
}

class GreensEvaluator {
public:
    GreensEvaluator(ProblemSpec problem, double tol = default_integrator_tol)
        : problem_(std::move(problem)), fs_(problem_.op, problem_.lambda, tol) {
        const auto sys = detail::assemble_boundary(problem_.kind, fs_);
        det_ = detail::normalized_det(sys);
        if (!(std::fabs(det_) >= resonance_threshold)) throw ResonanceError(problem_.lambda, det_);
        boundary_ = sys.matrix;
        const Eigen::PartialPivLU<Matrix> lu(boundary_);
        correction_ = -lu.solve(sys.end_rows * fs_.end_state());
    }

    const ProblemSpec& problem() const noexcept { return problem_; }
    const FundamentalSystem& fundamental() const noexcept { return fs_; }
    const Matrix& boundary() const noexcept { return boundary_; }
    double normalized_determinant() const noexcept { return det_; }
    /// K, mapping w(s) to c(s).
    const Matrix& correction() const noexcept { return correction_; }
    double length() const noexcept { return fs_.length(); }
    int dim() const noexcept { return fs_.dim(); }

    /// Per-source data: w(s) and c(s).
    struct Source {
        double s;
        Vector jump;   // w(s) = Phi(s)^{-1} e_{2n}
        Vector homog;  // c(s)
    };

    Source source(double s) const {
        check_arg(s, "s");
        const int m = dim();
        const Eigen::PartialPivLU<Matrix> lu(fs_.at(s));
        Vector e = Vector::Zero(m);
        e(m - 1) = 1.0;
        Source src{s, lu.solve(e), Vector()};
        src.homog = correction_ * src.jump;
        return src;
    }

    /// All derivatives d^k/dt^k G(t, s), k = 0 .. 2n-1, from a precomputed Phi(t).
    static Vector state(const Matrix& phi_t, double t, const Source& src) {
        return t >= src.s ? Vector(phi_t * (src.homog + src.jump)) : Vector(phi_t * src.homog);
    }

    static double value(const Eigen::RowVectorXd& phi_row, double t, const Source& src) {
        const double v = phi_row.dot(src.homog);
        return t >= src.s ? v + phi_row.dot(src.jump) : v;
    }

    /// G(t, s); the diagonal uses the continuous value.
    double operator()(double t, double s) const {
        check_arg(t, "t");
        const Matrix phi = fs_.at(t);
        return value(phi.row(0), t, source(s));
    }

    /// Derivatives of G(., s) in t at t; the branch t >= s is used on the diagonal.
    Vector derivatives(double t, double s) const {
        check_arg(t, "t");
        return state(fs_.at(t), t, source(s));
    }

    /// Kernel block: rows follow `ts`, columns follow `ss`.
    Matrix block(std::span<const double> ts, std::span<const double> ss) const {
        std::vector<Eigen::RowVectorXd> rows(ts.size());
        std::vector<Source> sources(ss.size());
        parallel_for(ts.size(), [&](std::size_t i) {
            check_arg(ts[i], "t");
            rows[i] = fs_.at(ts[i]).row(0);
        });
        parallel_for(ss.size(), [&](std::size_t j) { sources[j] = source(ss[j]); });
        Matrix out(static_cast<Eigen::Index>(ts.size()), static_cast<Eigen::Index>(ss.size()));
        parallel_for(ts.size(), [&](std::size_t i) {
            for (std::size_t j = 0; j < ss.size(); ++j)
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value(rows[i], ts[i], sources[j]);
        });
        return out;
    }

private:
    void check_arg(double x, const char* name) const {
        const double len = length();
        if (!(x >= -1e-12 * len && x <= len * (1.0 + 1e-12)))
            throw DomainError(std::string(name) + " = " + std::to_string(x) + " outside [0, " +
                              std::to_string(len) + "]");
    }

    ProblemSpec problem_;
    FundamentalSystem fs_;
    Matrix boundary_;
    Matrix correction_; // K
    double det_ = 0.0;
};

inline GreensEvaluator build_greens(const ProblemSpec& problem, double tol = default_integrator_tol) {
    return GreensEvaluator(problem, tol);
}

inline double eval_greens(const GreensEvaluator& g, double t, double s) { return g(t, s); }

/// m equally spaced points covering [0, length], endpoints included.
inline std::vector<double> uniform_grid(double length, std::size_t m) {
    if (m < 2) throw ConfigError("grid needs at least 2 points");
    std::vector<double> pts(m);
    for (std::size_t i = 0; i < m; ++i) pts[i] = length * static_cast<double>(i) / static_cast<double>(m - 1);
    pts.back() = length;
    return pts;
}

/// Values on the uniform m x m grid; row = t index, column = s index.
inline Matrix sample_grid(const GreensEvaluator& g, std::size_t m) {
    const auto pts = uniform_grid(g.length(), m);
    return g.block(pts, pts);
}

} // namespace greenkit
