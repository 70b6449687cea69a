#include "sdsearch/reservation.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "sdsearch/quadrature.hpp"
#include "sdsearch/root_finding.hpp"

namespace sdsearch {

double q_s(const ValuationModel& m, double x, double c_s, double z) {
    return m.y.partial_expectation(z - x) - c_s;
}

double solve_xi(const Distribution& y, double c_s) {
    if (!(c_s > 0.0)) throw config_error("solve_xi: c_s must be > 0");
    const double lo = y.support_lo();
    const double hi = y.support_hi();
    const auto f = [&](double t) { return y.partial_expectation(t) - c_s; };
    double a, b, fa, fb;
    grow_bracket(f, y.mean(), std::fmax(y.stddev(), 1.0), lo, hi, a, b, fa, fb,
                 "solve_xi");
    RootTols tols;
    tols.f_tol = 1e-12;
    return solve_bracketed(f, a, b, fa, fb, tols, "solve_xi").x;
}

namespace {

// E_X[ max{0, Q_s(X, c_s, z)} ] - c_d : the n_d = 1 reduction.
double q_d_myopic(const ValuationModel& m, double xi, double c_s, double c_d, double z) {
    if (m.x.is_discrete()) {
        const auto& xv = m.x.values();
        const auto& xp = m.x.probs();
        double v = 0.0;
        for (std::size_t i = 0; i < xv.size(); ++i) {
            v += xp[i] * std::max(0.0, m.y.partial_expectation(z - xv[i]) - c_s);
        }
        return v - c_d;
    }
    // Q_s(x, c_s, z) > 0 exactly when x > z - xi.
    const double xlo = std::fmax(m.x.support_lo(), z - xi);
    const double xhi = m.x.support_hi();
    if (!(xlo < xhi)) return -c_d;
    const double val = integrate(
        [&](double x) { return (m.y.partial_expectation(z - x) - c_s) * m.x.pdf(x); },
        xlo, xhi, 1e-11);
    return val - c_d;
}

// Upper end of the support of tilde_W = X + min(Y, xi).
double tilde_w_top(const ValuationModel& m, double xi) {
    return m.x.support_hi() + std::min(xi, m.y.support_hi());
}
double tilde_w_bottom(const ValuationModel& m, double xi) {
    return m.x.support_lo() + std::min(xi, m.y.support_lo());
}

// Exact tail integral of 1 - G^n for a purely discrete tilde_W.
double discrete_tail_integral(const ValuationModel& m, double xi, int n_d, double z) {
    const auto& xv = m.x.values();
    const auto& xp = m.x.probs();
    const auto& yv = m.y.values();
    const auto& yp = m.y.probs();
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(xv.size() * yv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) {
        for (std::size_t j = 0; j < yv.size(); ++j) {
            atoms.emplace_back(xv[i] + std::min(yv[j], xi), xp[i] * yp[j]);
        }
    }
    std::sort(atoms.begin(), atoms.end());
    // merge equal support points
    std::vector<std::pair<double, double>> merged;
    for (const auto& a : atoms) {
        if (!merged.empty() && merged.back().first == a.first) {
            merged.back().second += a.second;
        } else {
            merged.push_back(a);
        }
    }
    double total = 0.0;
    if (z < merged.front().first) total += merged.front().first - z;
    double cum = 0.0;
    for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
        cum += merged[k].second;
        const double seg_lo = std::fmax(z, merged[k].first);
        const double seg_hi = merged[k + 1].first;
        if (seg_hi > seg_lo) {
            total += (1.0 - std::pow(std::min(cum, 1.0), n_d)) * (seg_hi - seg_lo);
        }
    }
    return total;
}

}  // namespace

double q_d_integral(const ValuationModel& m, double xi, int n_d, double c_s, double c_d,
                    double z) {
    (void)c_s;  // xi already encodes the inspection cost
    m.require_independent("q_d_integral");
    if (n_d < 1) throw config_error("q_d: n_d must be >= 1");
    if (m.x.is_discrete() && m.y.is_discrete()) {
        return discrete_tail_integral(m, xi, n_d, z) - c_d;
    }
    const double top = tilde_w_top(m, xi);
    if (z >= top) return -c_d;
    const double val = integrate(
        [&](double w) {
            return 1.0 - std::pow(tilde_w_cdf(m, xi, w, 1e-12), n_d);
        },
        z, top, 1e-10);
    return val - c_d;
}

double q_d(const ValuationModel& m, double xi, int n_d, double c_s, double c_d, double z) {
    m.require_independent("q_d");
    if (n_d < 1) throw config_error("q_d: n_d must be >= 1");
    if (n_d == 1 && !(m.x.is_discrete() && m.y.is_discrete())) {
        return q_d_myopic(m, xi, c_s, c_d, z);
    }
    return q_d_integral(m, xi, n_d, c_s, c_d, z);
}

double solve_discovery_value(const ValuationModel& m, const SearchEnvironment& env) {
    env.validate();
    m.require_independent("solve_discovery_value");
    const double xi = solve_xi(m.y, env.c_s);
    const double bottom = tilde_w_bottom(m, xi);
    const double top = tilde_w_top(m, xi);
    const auto f = [&](double z) { return q_d(m, xi, env.n_d, env.c_s, env.c_d, z); };
    // E[min(Y, xi)] = E[Y] - c_s, so center the bracket at E[tilde_W].
    const double center = m.x.mean() + m.y.mean() - env.c_s;
    double a, b, fa, fb;
    grow_bracket(f, center, std::fmax(m.x.stddev() + m.y.stddev(), 1.0), bottom, top, a,
                 b, fa, fb, "solve_discovery_value");
    RootTols tols;
    tols.f_tol = 1e-10;
    return solve_bracketed(f, a, b, fa, fb, tols, "solve_discovery_value").x;
}

double solve_rs_reservation(const ValuationModel& m, double c_rs) {
    m.require_independent("solve_rs_reservation");
    if (!(c_rs > 0.0)) throw config_error("solve_rs_reservation: c_rs must be > 0");
    const double bottom = m.x.support_lo() + m.y.support_lo();
    const double top = m.x.support_hi() + m.y.support_hi();
    const auto f = [&](double z) { return sum_partial_expectation(m, z, 1e-12) - c_rs; };
    double a, b, fa, fb;
    grow_bracket(f, m.x.mean() + m.y.mean(), std::fmax(m.x.stddev() + m.y.stddev(), 1.0),
                 bottom, top, a, b, fa, fb, "solve_rs_reservation");
    RootTols tols;
    tols.f_tol = 1e-11;
    return solve_bracketed(f, a, b, fa, fb, tols, "solve_rs_reservation").x;
}

std::vector<PositionXi> ds_xi_by_position(const Distribution& y, double c_s, double slope,
                                          int h_first, int h_last) {
    if (h_first < 0 || h_last < h_first) {
        throw config_error("ds_xi_by_position: need 0 <= h_first <= h_last");
    }
    if (slope < 0.0) throw config_error("ds_xi_by_position: slope must be >= 0");
    std::vector<PositionXi> out;
    out.reserve(static_cast<std::size_t>(h_last - h_first + 1));
    for (int h = h_first; h <= h_last; ++h) {
        PositionXi px;
        px.h = h;
        try {
            px.xi = solve_xi(y, c_s + slope * h);
        } catch (const std::exception& e) {
            px.error = e.what();
        }
        out.push_back(std::move(px));
    }
    return out;
}

std::vector<double> position_dependent_discovery_values(
    const std::vector<ValuationModel>& models_by_position, const SearchEnvironment& env) {
    env.validate();
    if (models_by_position.empty()) {
        throw config_error("position_dependent_discovery_values: no beliefs supplied");
    }
    for (const auto& m : models_by_position) {
        m.require_independent("position_dependent_discovery_values");
        if (!(m.y == models_by_position.front().y)) {
            throw model_error(
                "position_dependent_discovery_values: residual distribution must be "
                "common across positions");
        }
    }
    const double xi = solve_xi(models_by_position.front().y, env.c_s);
    std::vector<double> z_d(models_by_position.size());
    for (std::size_t t = 0; t < models_by_position.size(); ++t) {
        z_d[t] = solve_discovery_value(models_by_position[t], env);
    }
    // Ordering requirement: later beliefs must not dominate earlier ones on
    // the region that matters for stopping, x >= z_d - xi.
    const int grid_n = 257;
    for (std::size_t t = 0; t + 1 < models_by_position.size(); ++t) {
        const auto& gt = models_by_position[t].x;
        const auto& gn = models_by_position[t + 1].x;
        const double lo = std::fmin(z_d[t], z_d[t + 1]) - xi;
        const double hi = std::fmax(gt.support_hi(), gn.support_hi());
        if (!(lo < hi)) continue;
        for (int i = 0; i < grid_n; ++i) {
            const double x = lo + (hi - lo) * i / (grid_n - 1);
            if (gt.cdf(x) > gn.cdf(x) + 1e-10) {
                throw model_error(
                    "position_dependent_discovery_values: ordering-violation (belief at "
                    "position " + std::to_string(t + 1) + " dominates position " +
                    std::to_string(t) + " at x=" + std::to_string(x) + ")");
            }
        }
        if (z_d[t + 1] > z_d[t] + 1e-8) {
            throw model_error(
                "position_dependent_discovery_values: ordering-violation (z_d increased "
                "from position " + std::to_string(t) + " to " + std::to_string(t + 1) + ")");
        }
    }
    return z_d;
}

ReservationBundle compute_reservations(const ValuationModel& m, const SearchEnvironment& env) {
    env.validate();
    ReservationBundle b;
    switch (env.mode) {
        case Mode::SD: {
            m.require_independent("compute_reservations");
            b.xi = solve_xi(m.y, env.c_s);
            b.z_d = solve_discovery_value(m, env);
            b.Xi = *b.z_d - m.x.mean();
            if (env.num_products && env.n_d > 1) {
                // A finite product set can end on a batch smaller than n_d;
                // pre-solve the discovery value for every possible batch size.
                b.z_d_by_batch_size.resize(static_cast<std::size_t>(env.n_d));
                b.z_d_by_batch_size.back() = *b.z_d;
                for (std::int64_t s = 1; s < env.n_d; ++s) {
                    SearchEnvironment partial = env;
                    partial.n_d = s;
                    b.z_d_by_batch_size[static_cast<std::size_t>(s - 1)] =
                        solve_discovery_value(m, partial);
                }
            }
            break;
        }
        case Mode::RS: {
            m.require_independent("compute_reservations");
            b.z_rs = solve_rs_reservation(m, env.rs_cost());
            if (!(env.u_0 < *b.z_rs)) {
                throw config_error(
                    "compute_reservations: RS mode requires u_0 < z_rs (u_0=" +
                    std::to_string(env.u_0) + ", z_rs=" + std::to_string(*b.z_rs) + ")");
            }
            break;
        }
        case Mode::DS1:
        case Mode::DS2: {
            if (!env.num_products) {
                throw config_error("compute_reservations: directed search requires "
                                   "finite num_products");
            }
            const double slope = env.mode == Mode::DS1 ? 0.0 : env.ds_cost_slope;
            const auto xs =
                ds_xi_by_position(m.y, env.c_s, slope, 0,
                                  static_cast<int>(*env.num_products));
            b.xi_by_position.reserve(xs.size());
            for (const auto& px : xs) {
                if (!px.xi) {
                    throw solver_error("compute_reservations: position " +
                                       std::to_string(px.h) + ": " + px.error);
                }
                b.xi_by_position.push_back(*px.xi);
            }
            b.xi = b.xi_by_position.empty() ? solve_xi(m.y, env.c_s)
                                            : b.xi_by_position.front();
            break;
        }
        case Mode::FI:
            break;
    }
    return b;
}

std::string to_string(Mode m) {
    switch (m) {
        case Mode::SD: return "SD";
        case Mode::RS: return "RS";
        case Mode::DS1: return "DS1";
        case Mode::DS2: return "DS2";
        case Mode::FI: return "FI";
    }
    return "?";
}

Mode mode_from_string(const std::string& s) {
    if (s == "SD") return Mode::SD;
    if (s == "RS") return Mode::RS;
    if (s == "DS1") return Mode::DS1;
    if (s == "DS2") return Mode::DS2;
    if (s == "FI") return Mode::FI;
    throw config_error("unknown mode: " + s);
}

}  // namespace sdsearch
