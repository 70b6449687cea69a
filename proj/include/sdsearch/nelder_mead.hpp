#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

namespace sdsearch {

struct SimplexOptions {
    int max_iter = 2000;
    double diameter_tol = 1e-6;  // stop when the simplex fits in this box
    double initial_step = 0.25;
};

struct SimplexResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Plain Nelder-Mead downhill simplex (reflect 1, expand 2, contract 1/2,
// shrink 1/2). Deterministic for a fixed start point and objective.
inline SimplexResult minimize_simplex(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& start, const SimplexOptions& opts = {}) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> xs(n + 1, start);
    std::vector<double> fs(n + 1);
    for (std::size_t i = 0; i < n; ++i) xs[i + 1][i] += opts.initial_step;
    for (std::size_t i = 0; i <= n; ++i) fs[i] = f(xs[i]);

    std::vector<std::size_t> order(n + 1);
    SimplexResult res;
    for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                diameter = std::max(diameter, std::abs(xs[order[i]][k] - xs[best][k]));
        if (diameter < opts.diameter_tol) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < n; ++k) centroid[k] += xs[i][k];
        }
        for (auto& c : centroid) c /= static_cast<double>(n);

        const auto blend = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t k = 0; k < n; ++k)
                p[k] = centroid[k] + t * (xs[worst][k] - centroid[k]);
            return p;
        };

        const std::vector<double> refl = blend(-1.0);
        const double f_refl = f(refl);
        if (f_refl < fs[best]) {
            const std::vector<double> exp_p = blend(-2.0);
            const double f_exp = f(exp_p);
            if (f_exp < f_refl) {
                xs[worst] = exp_p;
                fs[worst] = f_exp;
            } else {
                xs[worst] = refl;
                fs[worst] = f_refl;
            }
            continue;
        }
        if (f_refl < fs[second]) {
            xs[worst] = refl;
            fs[worst] = f_refl;
            continue;
        }
        const bool outside = f_refl < fs[worst];
        const std::vector<double> ctr = blend(outside ? -0.5 : 0.5);
        const double f_ctr = f(ctr);
        if (f_ctr < std::min(f_refl, fs[worst])) {
            xs[worst] = ctr;
            fs[worst] = f_ctr;
            continue;
        }
        // Shrink toward the best vertex.
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < n; ++k)
                xs[i][k] = xs[best][k] + 0.5 * (xs[i][k] - xs[best][k]);
            fs[i] = f(xs[i]);
        }
    }

    std::size_t arg = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (fs[i] < fs[arg]) arg = i;
    res.x = xs[arg];
    res.f = fs[arg];
    return res;
}

}  // namespace sdsearch
