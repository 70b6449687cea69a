#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "sdsearch/common.hpp"

namespace sdsearch {

// Adaptive Simpson integration with an absolute tolerance. Used for every
// continuous expectation that has no closed form; integration limits are the
// caller's responsibility (distribution supports are truncated at the 1e-10
// quantile tails before calling).
namespace detail {

template <class F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm,
                            double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-10,
                 int max_depth = 48) {
    if (!(a < b)) return 0.0;
    if (!std::isfinite(a) || !std::isfinite(b)) {
        throw solver_error("integrate: non-finite limits");
    }
    // Seed the recursion on a handful of panels so narrow features away from
    // the midpoint are not missed by the first Simpson estimate.
    const int panels = 8;
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        const double x0 = a + i * h;
        const double x1 = (i == panels - 1) ? b : x0 + h;
        const double xm = 0.5 * (x0 + x1);
        const double f0 = f(x0);
        const double fm = f(xm);
        const double f1 = f(x1);
        const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        total += detail::adaptive_simpson_rec(f, x0, x1, f0, fm, f1, whole,
                                              abs_tol / panels, max_depth);
    }
    return total;
}

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Hermite rule in "probabilist" form: E[f(Z)] for Z ~ N(0,1) is
// approximated by sum_i weights[i] * f(nodes[i]). Nodes are computed by
// Newton iteration on the physicists' Hermite recurrence and mapped by
// x -> sqrt(2) x, w -> w / sqrt(pi).
QuadratureRule gauss_hermite(std::size_t n);

// Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(std::size_t n);

// Pairwise (cascade) summation. Used for every cross-consumer reduction so
// float results are identical regardless of how work was split over threads.
double pairwise_sum(const std::vector<double>& xs);

}  // namespace sdsearch
