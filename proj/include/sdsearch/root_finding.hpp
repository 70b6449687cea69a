#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "sdsearch/common.hpp"

namespace sdsearch {

struct RootTols {
    double x_tol = 1e-12;   // bracket width target
    double f_tol = 1e-11;   // residual target
    int max_iter = 200;
};

struct RootResult {
    double x = 0.0;
    double f = 0.0;
    int iterations = 0;
};

// Finds a sign change of a continuous, monotone-decreasing-or-increasing f by
// growing an interval geometrically from [center - step, center + step],
// never leaving [lo_cap, hi_cap]. Throws solver_error(no-bracket) when the
// capped interval contains no sign change.
template <class F>
void grow_bracket(const F& f, double center, double step, double lo_cap, double hi_cap,
                  double& a, double& b, double& fa, double& fb,
                  const std::string& what) {
    if (step <= 0.0 || !std::isfinite(step)) step = 1.0;
    a = std::fmax(lo_cap, center - step);
    b = std::fmin(hi_cap, center + step);
    if (!(a < b)) {
        a = lo_cap;
        b = hi_cap;
    }
    if (!(a <= b)) throw solver_error(what + ": no-bracket (empty search interval)");
    fa = f(a);
    fb = f(b);
    for (int i = 0; i < 200; ++i) {
        if (fa == 0.0 || fb == 0.0 || (fa < 0.0) != (fb < 0.0)) return;
        const bool at_lo = (a <= lo_cap);
        const bool at_hi = (b >= hi_cap);
        if (at_lo && at_hi) break;
        step *= 2.0;
        if (!at_lo) {
            a = std::fmax(lo_cap, a - step);
            fa = f(a);
        }
        if (!at_hi) {
            b = std::fmin(hi_cap, b + step);
            fb = f(b);
        }
    }
    if ((fa < 0.0) != (fb < 0.0) || fa == 0.0 || fb == 0.0) return;
    throw solver_error(what + ": no-bracket (no sign change on [" +
                       std::to_string(a) + ", " + std::to_string(b) + "])");
}

// Bisection safeguarded by secant steps on a sign-changing bracket.
template <class F>
RootResult solve_bracketed(const F& f, double a, double b, double fa, double fb,
                           const RootTols& tols, const std::string& what) {
    if (fa == 0.0) return {a, 0.0, 0};
    if (fb == 0.0) return {b, 0.0, 0};
    if ((fa < 0.0) == (fb < 0.0)) {
        throw solver_error(what + ": no-bracket (equal signs at endpoints)");
    }
    RootResult res;
    double x = a, fx = fa;
    for (res.iterations = 0; res.iterations < tols.max_iter; ++res.iterations) {
        // Secant proposal, clipped into the open bracket; fall back to
        // bisection whenever it is degenerate or leaves the interval.
        double mid = 0.5 * (a + b);
        double prop = mid;
        const double denom = fb - fa;
        if (denom != 0.0) {
            const double sec = a - fa * (b - a) / denom;
            const double guard = 0.01 * (b - a);
            if (sec > a + guard && sec < b - guard) prop = sec;
        }
        x = prop;
        fx = f(x);
        if (std::abs(fx) <= tols.f_tol) break;
        if ((fx < 0.0) == (fa < 0.0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if (b - a <= tols.x_tol * (1.0 + std::abs(a) + std::abs(b))) {
            x = 0.5 * (a + b);
            fx = f(x);
            break;
        }
    }
    res.x = x;
    res.f = fx;
    if (!(std::abs(fx) <= tols.f_tol ||
          b - a <= 4.0 * tols.x_tol * (1.0 + std::abs(a) + std::abs(b)))) {
        throw solver_error(what + ": solver did not converge (residual " +
                           std::to_string(fx) + ")");
    }
    return res;
}

}  // namespace sdsearch
