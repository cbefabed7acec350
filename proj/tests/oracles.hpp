// Closed-form kernels and small helpers shared by the unit tests and the acceptance runner.
#pragma once

#include <greenkit/greens.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace oracle {

using Kernel = std::function<double(double, double)>;

/// u'' with u(0) = u(1) = 0.
inline double string_dirichlet(double t, double s) { return t <= s ? t * (s - 1.0) : s * (t - 1.0); }

/// u'' - u with u(0) = u(1) = 0.
inline double cosh_dirichlet(double t, double s) {
    const double lo = std::min(t, s), hi = std::max(t, s);
    return -std::sinh(lo) * std::sinh(1.0 - hi) / std::sinh(1.0);
}

/// u'' - u with u'(0) = u'(1) = 0.
inline double cosh_neumann(double t, double s) {
    const double lo = std::min(t, s), hi = std::max(t, s);
    return -std::cosh(lo) * std::cosh(1.0 - hi) / std::sinh(1.0);
}

/// u'' - u, periodic on [0, T].
inline Kernel cosh_periodic(double T) {
    return [T](double t, double s) { return -std::cosh(T / 2.0 - std::fabs(t - s)) / (2.0 * std::sinh(T / 2.0)); };
}

/// u'''' with u = u'' = 0 at 0 and 1 (simply supported beam).
inline double beam_dirichlet(double t, double s) {
    const double lo = std::min(t, s), hi = std::max(t, s);
    return lo * (1.0 - hi) * (2.0 * hi - hi * hi - lo * lo) / 6.0;
}

inline double sup_error(const greenkit::GreensEvaluator& g, const Kernel& exact, std::size_t m) {
    const auto pts = greenkit::uniform_grid(g.length(), m);
    const greenkit::Matrix vals = g.block(pts, pts);
    double err = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            err = std::max(err, std::fabs(vals(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) -
                                          exact(pts[i], pts[j])));
    return err;
}

/// Coefficients of prod_k (t - r_k), lowest degree first.
inline std::vector<double> expand_roots(const std::vector<double>& roots, double lead) {
    std::vector<double> c{lead};
    for (double r : roots) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i) {
            next[i + 1] += c[i];
            next[i] -= r * c[i];
        }
        c = std::move(next);
    }
    return c;
}

inline double horner(const std::vector<double>& c, double t) {
    double v = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * t + *it;
    return v;
}

inline constexpr double pi = std::numbers::pi;

} // namespace oracle
