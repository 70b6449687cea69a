#include "sdsearch/learning.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sdsearch/common.hpp"
#include "sdsearch/quadrature.hpp"
#include "sdsearch/reservation.hpp"
#include "sdsearch/root_finding.hpp"

namespace sdsearch {

namespace {

constexpr double kTailMass = 1e-10;
constexpr double kGaussTail = 6.5;  // standard-normal mass beyond is ~4e-11

// Numerical profile for the look-ahead dynamic program. Depth k = 2 keeps
// adaptive quadrature on every layer; k = 3 multiplies the tree width enough
// that fixed-node rules are used instead (documented accuracy ~1e-4).
struct Profile {
    bool fast = false;
    double outer_tol = 1e-8;   // expectations over partial valuations
    double inner_tol = 1e-9;   // match-value expectations and tail integrals
    RootTols root{1e-10, 1e-9, 200};
};

Profile exact_profile() { return {}; }

Profile fast_profile() {
    Profile p;
    p.fast = true;
    p.root = RootTols{1e-7, 1e-6, 200};
    return p;
}

// Cubic interpolation on a uniform grid (Catmull-Rom slopes). The tabulated
// functions below are smooth, so the error is O(h^3) in the worst kink-free
// stretch; with 8192 nodes it sits well under the 1e-6 guarantees.
class CubicGrid {
  public:
    CubicGrid() = default;
    CubicGrid(double lo, double dx, std::vector<double> vals)
        : lo_(lo), dx_(dx), vals_(std::move(vals)) {}

    double operator()(double t) const {
        const std::size_t n = vals_.size();
        double s = (t - lo_) / dx_;
        if (s <= 0.0) return vals_.front();
        if (s >= static_cast<double>(n - 1)) return vals_.back();
        std::size_t i = static_cast<std::size_t>(s);
        if (i > n - 2) i = n - 2;
        const double u = s - static_cast<double>(i);
        const double v0 = vals_[i];
        const double v1 = vals_[i + 1];
        const double m0 = i == 0 ? v1 - v0 : 0.5 * (v1 - vals_[i - 1]);
        const double m1 = i + 2 >= n ? v1 - v0 : 0.5 * (vals_[i + 2] - v0);
        const double u2 = u * u;
        const double u3 = u2 * u;
        return (2.0 * u3 - 3.0 * u2 + 1.0) * v0 + (u3 - 2.0 * u2 + u) * m0 +
               (-2.0 * u3 + 3.0 * u2) * v1 + (u3 - u2) * m1;
    }

  private:
    double lo_ = 0.0;
    double dx_ = 1.0;
    std::vector<double> vals_;
};

// Distribution tables of W = X0 + min(Y, xi) with X0 ~ N(0, var): the capped
// value a future discovery adds when the location belief has predictive
// variance `var`. Shifting the belief mean shifts W, so one table per depth
// serves every branch of the look-ahead tree.
struct TildeW {
    double var = 1.0;
    double mean = 0.0;  // E[min(Y, xi)]
    double wlo = 0.0, whi = 0.0;
    CubicGrid cdf_grid, pe_grid;

    double cdf(double w) const {
        if (w <= wlo) return 0.0;
        if (w >= whi) return 1.0;
        return std::clamp(cdf_grid(w), 0.0, 1.0);
    }
    // E[(W - t)^+]
    double pe(double t) const {
        if (t <= wlo) return mean - t;
        if (t >= whi) return 0.0;
        return std::max(0.0, pe_grid(t));
    }
};

TildeW build_tilde_w(const Distribution& y, double xi, double var) {
    TildeW tw;
    tw.var = std::max(var, 1e-12);
    tw.mean = y.mean() - y.partial_expectation(xi);  // E[min(Y, xi)]
    const Distribution x0 = Distribution::normal(0.0, tw.var);
    const double cap_lo = std::min(xi, y.support_lo(kTailMass));
    const double cap_hi = std::min(xi, y.support_hi(kTailMass));
    tw.wlo = x0.quantile(kTailMass) + cap_lo;
    tw.whi = x0.quantile(1.0 - kTailMass) + cap_hi;

    const std::size_t n = 8192;
    const double dx = (tw.whi - tw.wlo) / static_cast<double>(n - 1);
    std::vector<double> cdf_vals(n), pe_vals(n);

    const bool atoms =
        y.family() == Family::discrete || y.family() == Family::point_mass;
    const double p_cap = atoms ? 0.0 : 1.0 - y.cdf(xi);
    const double y_lo = y.support_lo(kTailMass);
    const double y_hi = std::min(xi, y.support_hi(kTailMass));
    for (std::size_t i = 0; i < n; ++i) {
        const double w = tw.wlo + dx * static_cast<double>(i);
        if (atoms) {
            double f = 0.0, p = 0.0;
            const auto& vals = y.values();
            const auto& ps = y.probs();
            for (std::size_t k = 0; k < vals.size(); ++k) {
                const double c = std::min(vals[k], xi);
                f += ps[k] * x0.cdf(w - c);
                p += ps[k] * x0.partial_expectation(w - c);
            }
            cdf_vals[i] = f;
            pe_vals[i] = p;
        } else {
            double f = p_cap * x0.cdf(w - xi);
            double p = p_cap * x0.partial_expectation(w - xi);
            if (y_lo < y_hi) {
                f += integrate([&](double t) { return x0.cdf(w - t) * y.pdf(t); }, y_lo,
                               y_hi, 1e-11);
                p += integrate(
                    [&](double t) { return x0.partial_expectation(w - t) * y.pdf(t); },
                    y_lo, y_hi, 1e-11);
            }
            cdf_vals[i] = f;
            pe_vals[i] = p;
        }
    }
    tw.cdf_grid = CubicGrid(tw.wlo, dx, std::move(cdf_vals));
    tw.pe_grid = CubicGrid(tw.wlo, dx, std::move(pe_vals));
    return tw;
}

// One conjugate update step; the posterior mean is linear in the observation
// and the variance does not depend on it, which is what lets each look-ahead
// depth share a single TildeW table.
struct PostStep {
    double sigma2 = 0.0;   // posterior variance after the update
    double w_prior = 1.0;  // mu' = w_prior * mu + w_obs * x
    double w_obs = 0.0;
};

PostStep post_step(double sigma2, double sampling_var) {
    if (sigma2 <= 0.0) return {0.0, 1.0, 0.0};
    const double s2 = 1.0 / (1.0 / sigma2 + 1.0 / sampling_var);
    return {s2, s2 / sigma2, s2 / sampling_var};
}

struct Ctx {
    const Distribution* y = nullptr;
    double c_s = 0.0;
    double c_d = 0.0;
    double xi = 0.0;      // inspection threshold offset of the match distribution
    double cap_hi = 0.0;  // upper support of min(Y, xi)
    Profile prof;
    QuadratureRule gh;  // standard-normal nodes (fast profile)
    QuadratureRule gl;  // [-1, 1] nodes (fast profile)

    // P(min(Y, xi) <= t)
    double cap_cdf(double t) const { return t >= xi ? 1.0 : y->cdf(t); }
    // E[(min(Y, xi) - t)^+] = max{0, E[(Y - t)^+] - c_s}
    double capped_pe(double t) const {
        return std::max(0.0, y->partial_expectation(t) - c_s);
    }
};

Ctx make_ctx(const Distribution& y, const SearchEnvironment& env, const Profile& prof) {
    if (env.n_d != 1)
        throw config_error("learning bounds are built for one product per discovery");
    Ctx c;
    c.y = &y;
    c.c_s = env.c_s;
    c.c_d = env.c_d;
    c.xi = solve_xi(y, env.c_s);
    c.cap_hi = std::min(c.xi, y.support_hi(kTailMass));
    c.prof = prof;
    if (prof.fast) {
        c.gh = gauss_hermite(16);
        c.gl = gauss_legendre(24);
    }
    return c;
}

double integrate_piece(const Ctx& c, const std::function<double(double)>& f, double a,
                       double b) {
    if (b <= a) return 0.0;
    if (c.prof.fast) {
        double v = 0.0;
        for (std::size_t i = 0; i < c.gl.nodes.size(); ++i) {
            const double t = 0.5 * (a + b) + 0.5 * (b - a) * c.gl.nodes[i];
            v += 0.5 * (b - a) * c.gl.weights[i] * f(t);
        }
        return v;
    }
    return integrate(f, a, b, c.prof.inner_tol);
}

// E[h(X)] for X ~ N(mu, var).
double expect_gauss(const Ctx& c, double mu, double var,
                    const std::function<double(double)>& h) {
    if (var <= 0.0) return h(mu);
    const double sd = std::sqrt(var);
    if (c.prof.fast) {
        double v = 0.0;
        for (std::size_t i = 0; i < c.gh.nodes.size(); ++i)
            v += c.gh.weights[i] * h(mu + sd * c.gh.nodes[i]);
        return v;
    }
    const double norm = 1.0 / (sd * std::sqrt(2.0 * M_PI));
    const auto f = [&](double x) {
        const double u = (x - mu) / sd;
        return h(x) * norm * std::exp(-0.5 * u * u);
    };
    return integrate(f, mu - kGaussTail * sd, mu + kGaussTail * sd, c.prof.outer_tol);
}

// Expectation over the match value of g(max(z, x + Y)); the region Y <= z - x
// collapses onto g(z) exactly.
double expect_y_max(const Ctx& c, double z, double x,
                    const std::function<double(double)>& g) {
    const double cut = z - x;
    const Distribution& y = *c.y;
    if (y.family() == Family::discrete || y.family() == Family::point_mass) {
        double v = 0.0;
        const auto& vals = y.values();
        const auto& ps = y.probs();
        for (std::size_t k = 0; k < vals.size(); ++k)
            v += ps[k] * g(std::max(z, x + vals[k]));
        return v;
    }
    const double lo = std::max(y.support_lo(kTailMass), cut);
    const double hi = y.support_hi(kTailMass);
    double v = y.cdf(cut) * g(z);
    if (lo < hi) v += integrate_piece(c, [&](double t) { return g(x + t) * y.pdf(t); }, lo, hi);
    return v;
}

// Fallback m plus the option of one last discovery against belief mean mu:
// m + max{0, E[(mu + W0 - m)^+] - c_d}.
double hold_one(const Ctx& c, const TildeW& tw, double m, double mu) {
    return m + std::max(0.0, tw.pe(m - mu) - c.c_d);
}

// Value of paying c_d for a final discovery from N(mu, tw.var) and then
// running the terminal inspection problem over the known partial valuations
// `xs` plus the new product, with fallback z:
//   -c_d + E[max{z, x_new + cap_new, max_k xs_k + cap_k}]
// evaluated as z + the tail integral of 1 - prod_k F_cap(w - x_k) * F_W(w - mu),
// split at each product's capping point (the pieces are smooth; beyond the
// last cap the integral is the tabulated partial expectation, and for atomic
// match distributions each piece is exact).
double discover_boxes(const Ctx& c, const TildeW& tw, double z, double mu,
                      const std::vector<double>& xs) {
    std::vector<double> cuts;
    const bool atoms =
        c.y->family() == Family::discrete || c.y->family() == Family::point_mass;
    for (const double x : xs) {
        if (atoms) {
            for (const double v : c.y->values()) {
                const double s = x + std::min(v, c.xi);
                if (s > z) cuts.push_back(s);
            }
        } else {
            const double s = x + c.cap_hi;
            if (s > z) cuts.push_back(s);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    const auto prod_cap = [&](double w) {
        double p = 1.0;
        for (const double x : xs) p *= c.cap_cdf(w - x);
        return p;
    };
    double v = 0.0;
    double a = z;
    for (const double b : cuts) {
        if (b <= a) continue;
        if (atoms) {
            // prod_cap is constant on (a, b): integrate 1 - q * F_W exactly.
            const double q = prod_cap(0.5 * (a + b));
            v += (b - a) * (1.0 - q) + q * (tw.pe(a - mu) - tw.pe(b - mu));
        } else {
            v += integrate_piece(
                c, [&](double w) { return 1.0 - prod_cap(w) * tw.cdf(w - mu); }, a, b);
        }
        a = b;
    }
    v += tw.pe(a - mu);  // beyond every cap the known products are dominated
    return -c.c_d + z + v;
}

// Value with fallback z, one aware product x1, and one future discovery, when
// the next partial valuation is drawn from N(mu1, tw.var).
double v_one(const Ctx& c, const TildeW& tw, double z, double x1, double mu1) {
    const double inspect =
        -c.c_s +
        expect_y_max(c, z, x1, [&](double m) { return hold_one(c, tw, m, mu1); });
    const double discover = discover_boxes(c, tw, z, mu1, {x1});
    return std::max({z, inspect, discover});
}

// Depth-3 layer: states with two discoveries remaining. `s1` is the update
// applied after the next observation (producing the mean fed to tw2).
struct Depth3 {
    PostStep s2;       // update from depth-1 belief to depth-2 belief
    double v1 = 1.0;   // predictive variance at depth 1 (draws of x2)
    const TildeW* tw2 = nullptr;
};

double u_two(const Ctx& c, const Depth3& d, double z, double x1, double x2, double mu2) {
    const double i1 = -c.c_s + expect_y_max(c, z, x1, [&](double m) {
        return v_one(c, *d.tw2, m, x2, mu2);
    });
    const double i2 = -c.c_s + expect_y_max(c, z, x2, [&](double m) {
        return v_one(c, *d.tw2, m, x1, mu2);
    });
    const double discover = discover_boxes(c, *d.tw2, z, mu2, {x1, x2});
    return std::max({z, i1, i2, discover});
}

double hold_two(const Ctx& c, const Depth3& d, double m, double mu1) {
    const double discover =
        -c.c_d + expect_gauss(c, mu1, d.v1, [&](double x2) {
            const double mu2 = d.s2.w_prior * mu1 + d.s2.w_obs * x2;
            return v_one(c, *d.tw2, m, x2, mu2);
        });
    return std::max(m, discover);
}

double v_two(const Ctx& c, const Depth3& d, double z, double x1, double mu1) {
    const double inspect = -c.c_s + expect_y_max(c, z, x1, [&](double m) {
        return hold_two(c, d, m, mu1);
    });
    const double discover =
        -c.c_d + expect_gauss(c, mu1, d.v1, [&](double x2) {
            const double mu2 = d.s2.w_prior * mu1 + d.s2.w_obs * x2;
            return u_two(c, d, z, x1, x2, mu2);
        });
    return std::max({z, inspect, discover});
}

double solve_threshold(const Ctx& c, const BeliefState& b,
                       const std::function<double(double, double)>& value_after,
                       double center, const std::string& what) {
    const double pred_var = b.sigma2 + b.sampling_var;
    const auto g = [&](double z) {
        const auto h = [&](double x1) { return value_after(z, x1); };
        return -c.c_d + expect_gauss(c, b.mu, pred_var, h) - z;
    };
    const double scale = std::sqrt(pred_var) + c.y->stddev() + 1.0;
    double a = 0, bb = 0, fa = 0, fb = 0;
    grow_bracket(g, center, 0.5 * scale, center - 10.0 * scale, center + 100.0 * scale,
                 a, bb, fa, fb, what);
    return solve_bracketed(g, a, bb, fa, fb, c.prof.root, what).x;
}

// Expectation of h under a distribution (adaptive; full-information solver).
double expect_dist(const Ctx& c, const Distribution& xdist,
                   const std::function<double(double)>& h) {
    const double sd = xdist.stddev();
    if (sd <= 0.0) return h(xdist.mean());
    const double lo = xdist.quantile(kTailMass);
    const double hi = xdist.quantile(1.0 - kTailMass);
    return integrate([&](double x) { return h(x) * xdist.pdf(x); }, lo, hi,
                     c.prof.outer_tol);
}

}  // namespace

void BeliefState::validate() const {
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
        throw config_error("belief prior variance must be finite and >= 0");
    if (!(sampling_var > 0.0) || !std::isfinite(sampling_var))
        throw config_error("belief sampling variance must be finite and > 0");
    if (!std::isfinite(mu)) throw config_error("belief mean must be finite");
}

Distribution BeliefState::predictive() const {
    validate();
    return Distribution::normal(mu, sigma2 + sampling_var);
}

BeliefState posterior_update(const BeliefState& b, double x_observed) {
    b.validate();
    BeliefState out = b;
    out.observations = b.observations + 1;
    if (b.sigma2 > 0.0) {
        const PostStep s = post_step(b.sigma2, b.sampling_var);
        out.sigma2 = s.sigma2;
        out.mu = s.w_prior * b.mu + s.w_obs * x_observed;
    }
    return out;
}

double k_step_lookahead(const BeliefState& b, const Distribution& y,
                        const SearchEnvironment& env, int k) {
    b.validate();
    if (k < 1 || k > 3)
        throw config_error("look-ahead depth must be 1, 2, or 3 (the tree grows "
                           "exponentially past that)");
    if (env.n_d != 1)
        throw config_error("learning bounds are built for one product per discovery");
    ValuationModel pred_model{b.predictive(), y, true};
    SearchEnvironment e = env;
    e.n_d = 1;
    const double z1 = solve_discovery_value(pred_model, e);
    // A degenerate prior never updates, so every look-ahead depth shares the
    // one-step threshold exactly.
    if (k == 1 || b.sigma2 <= 0.0) return z1;

    const Ctx c = make_ctx(y, env, k == 2 ? exact_profile() : fast_profile());
    const PostStep s1 = post_step(b.sigma2, b.sampling_var);
    const TildeW tw1 = build_tilde_w(y, c.xi, s1.sigma2 + b.sampling_var);
    if (k == 2) {
        return solve_threshold(
            c, b,
            [&](double z, double x1) {
                const double mu1 = s1.w_prior * b.mu + s1.w_obs * x1;
                return v_one(c, tw1, z, x1, mu1);
            },
            z1, "k_step_lookahead(2)");
    }
    Depth3 d;
    d.s2 = post_step(s1.sigma2, b.sampling_var);
    d.v1 = s1.sigma2 + b.sampling_var;
    const TildeW tw2 = build_tilde_w(y, c.xi, d.s2.sigma2 + b.sampling_var);
    d.tw2 = &tw2;
    return solve_threshold(
        c, b,
        [&](double z, double x1) {
            const double mu1 = s1.w_prior * b.mu + s1.w_obs * x1;
            return v_two(c, d, z, x1, mu1);
        },
        z1, "k_step_lookahead(3)");
}

double full_info_upper_bound(const BeliefState& b, const Distribution& y,
                             const SearchEnvironment& env) {
    b.validate();
    if (env.n_d != 1)
        throw config_error("learning bounds are built for one product per discovery");
    const Ctx c = make_ctx(y, env, exact_profile());

    // Discovery value offset for a fully known location: z_d(theta) = theta + off.
    SearchEnvironment e = env;
    e.n_d = 1;
    const double off =
        solve_discovery_value({Distribution::normal(0.0, b.sampling_var), y, true}, e);

    const QuadratureRule gh = gauss_hermite(32);
    const Distribution pred = b.predictive();
    const double z1 = solve_discovery_value({pred, y, true}, e);

    const auto r = [&](double zbar) {
        const auto inner = [&](double x1) {
            // Posterior over theta after seeing x1; evaluate the known-theta
            // continuation in closed form at each node.
            const BeliefState post = posterior_update(b, x1);
            const auto at_theta = [&](double theta) {
                const double cap = std::max(zbar, theta + off);
                return cap + c.capped_pe(cap - x1);
            };
            if (post.sigma2 <= 0.0) return at_theta(post.mu);
            double v = 0.0;
            const double sd = std::sqrt(post.sigma2);
            for (std::size_t i = 0; i < gh.nodes.size(); ++i)
                v += gh.weights[i] * at_theta(post.mu + sd * gh.nodes[i]);
            return v;
        };
        return -c.c_d + expect_dist(c, pred, inner) - zbar;
    };

    const double scale = pred.stddev() + y.stddev() + 1.0;
    double a = 0, bb = 0, fa = 0, fb = 0;
    grow_bracket(r, z1, 0.5 * scale, z1 - 10.0 * scale, z1 + 200.0 * scale, a, bb, fa,
                 fb, "full_info_upper_bound");
    return solve_bracketed(r, a, bb, fa, fb, RootTols{1e-10, 1e-9, 200},
                           "full_info_upper_bound")
        .x;
}

BoundsDecision bounds_decision(const BeliefState& b, const Distribution& y,
                               const SearchEnvironment& env, double best_in_hand) {
    BoundsDecision d;
    d.z_lower = k_step_lookahead(b, y, env, 1);
    d.z_upper = full_info_upper_bound(b, y, env);
    if (best_in_hand <= d.z_lower) d.verdict = BoundsVerdict::continue_search;
    else if (best_in_hand >= d.z_upper) d.verdict = BoundsVerdict::stop;
    else d.verdict = BoundsVerdict::indeterminate;
    return d;
}

}  // namespace sdsearch
