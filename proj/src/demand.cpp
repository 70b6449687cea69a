#include "sdsearch/demand.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "sdsearch/common.hpp"
#include "sdsearch/parallel.hpp"
#include "sdsearch/policy.hpp"
#include "sdsearch/quadrature.hpp"
#include "sdsearch/reservation.hpp"
#include "sdsearch/rng.hpp"

namespace sdsearch {

namespace {

constexpr double kTail = 1e-10;

bool fully_discrete(const ValuationModel& m) {
    const auto d = [](const Distribution& dist) {
        return dist.family() == Family::discrete || dist.family() == Family::point_mass;
    };
    return d(m.x) && d(m.y);
}

// Atoms of the capped value X + min(Y, xi) for fully discrete models.
std::map<double, double> capped_atoms(const ValuationModel& m, double xi) {
    std::map<double, double> atoms;
    const auto& xv = m.x.values();
    const auto& xp = m.x.probs();
    const auto& yv = m.y.values();
    const auto& yp = m.y.probs();
    for (std::size_t i = 0; i < xv.size(); ++i)
        for (std::size_t k = 0; k < yv.size(); ++k)
            atoms[xv[i] + std::min(yv[k], xi)] += xp[i] * yp[k];
    return atoms;
}

// P(consumer keeps discovering past one product): capped value strictly below
// the discovery value. Strictness only matters when an atom can sit exactly
// on the threshold, so discrete models sum atoms directly.
double continue_prob_sd(const ValuationModel& m, double xi, double z_d) {
    if (fully_discrete(m)) {
        double p = 0.0;
        for (const auto& [w, pw] : capped_atoms(m, xi))
            if (w < z_d) p += pw;
        return p;
    }
    return tilde_w_cdf(m, xi, z_d);
}

double continue_prob_rs(const ValuationModel& m, double z_rs) {
    if (fully_discrete(m)) {
        double p = 0.0;
        const auto& xv = m.x.values();
        const auto& xp = m.x.probs();
        const auto& yv = m.y.values();
        const auto& yp = m.y.probs();
        for (std::size_t i = 0; i < xv.size(); ++i)
            for (std::size_t k = 0; k < yv.size(); ++k)
                if (xv[i] + yv[k] < z_rs) p += xp[i] * yp[k];
        return p;
    }
    return sum_cdf(m, z_rs);
}

void require_outside_below(double u_0, double threshold, const char* what) {
    if (!(u_0 < threshold))
        throw config_error(std::string(what) +
                           ": demand formulas require the outside option below the "
                           "search threshold (u_0 = " +
                           std::to_string(u_0) + ", threshold = " +
                           std::to_string(threshold) + ")");
}

// Piecewise-linear inverse of a monotone CDF tabulated on [lo, hi].
class TabulatedInverse {
  public:
    template <class F>
    TabulatedInverse(const F& cdf, double lo, double hi, std::size_t n) : w_(n), c_(n) {
        for (std::size_t i = 0; i < n; ++i) {
            w_[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
            c_[i] = cdf(w_[i]);
            if (i > 0) c_[i] = std::max(c_[i], c_[i - 1]);  // monotone guard
        }
        const double last = c_.back();
        if (last > 0.0)
            for (auto& v : c_) v /= last;
    }

    double sample(double u) const {
        const auto it = std::lower_bound(c_.begin(), c_.end(), u);
        if (it == c_.begin()) return w_.front();
        if (it == c_.end()) return w_.back();
        const std::size_t k = static_cast<std::size_t>(it - c_.begin());
        const double c0 = c_[k - 1], c1 = c_[k];
        if (c1 <= c0) return w_[k];
        return w_[k - 1] + (u - c0) / (c1 - c0) * (w_[k] - w_[k - 1]);
    }

  private:
    std::vector<double> w_, c_;
};

// P(one of the J conditional capped values beats the outside option), where
// each value is an independent draw conditioned below z_d. By exchangeability
// each position wins the argmax with probability p_win / J.
struct RecallWin {
    double p_win = 0.0;
    double se = 0.0;
    bool exact = false;
};

RecallWin recall_win_exact(const ValuationModel& m, double xi, double z_d, double u_0,
                           std::int64_t J) {
    std::vector<double> w, p;
    double total = 0.0;
    for (const auto& [wa, pa] : capped_atoms(m, xi)) {
        if (wa < z_d) {
            w.push_back(wa);
            p.push_back(pa);
            total += pa;
        }
    }
    RecallWin out;
    out.exact = true;
    if (total <= 0.0) return out;
    for (auto& pa : p) pa /= total;
    std::size_t combos = 1;
    for (std::int64_t j = 0; j < J; ++j) {
        combos *= w.size();
        if (combos > 4000000) throw solver_error("recall enumeration too large");
    }
    double win = 0.0;
    for (std::size_t combo = 0; combo < combos; ++combo) {
        double prob = 1.0, best = -std::numeric_limits<double>::infinity();
        std::size_t rem = combo;
        for (std::int64_t j = 0; j < J; ++j) {
            const std::size_t k = rem % w.size();
            rem /= w.size();
            prob *= p[k];
            best = std::max(best, w[k]);
        }
        if (best > u_0) win += prob;
    }
    out.p_win = win;
    return out;
}

RecallWin recall_win_mc(const ValuationModel& m, double xi, double z_d, double u_0,
                        std::int64_t J, const DemandOptions& opts) {
    const double lo = m.x.support_lo(kTail) + std::min(m.y.support_lo(kTail), xi);
    RecallWin out;
    if (!(lo < z_d)) return out;
    const TabulatedInverse inv([&](double t) { return tilde_w_cdf(m, xi, t); }, lo, z_d,
                               4097);
    const RandomStream stream(opts.seed, /*stream_id=*/0xDE);
    const std::int64_t paths = std::max<std::int64_t>(opts.mc_paths, 1);
    std::vector<std::int64_t> wins(static_cast<std::size_t>(paths), 0);
    parallel_for(paths, opts.threads, [&](std::int64_t path) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::int64_t j = 0; j < J; ++j) {
            const double u = stream.uniform_at(
                static_cast<std::uint64_t>(path) * static_cast<std::uint64_t>(J) +
                static_cast<std::uint64_t>(j));
            best = std::max(best, inv.sample(u));
        }
        wins[static_cast<std::size_t>(path)] = best > u_0 ? 1 : 0;
    });
    std::int64_t total = 0;
    for (const auto v : wins) total += v;
    out.p_win = static_cast<double>(total) / static_cast<double>(paths);
    out.se = std::sqrt(std::max(0.0, out.p_win * (1.0 - out.p_win) /
                                         static_cast<double>(paths)));
    return out;
}

double pow_int(double base, std::int64_t e) {
    double r = 1.0;
    for (std::int64_t i = 0; i < e; ++i) r *= base;
    return r;
}

}  // namespace

double stop_prob_sd(const ValuationModel& m, const ReservationBundle& bundle,
                    std::int64_t j) {
    if (j < 1) throw config_error("stop_prob_sd: position must be >= 1");
    const double p = continue_prob_sd(m, bundle.require_xi(), bundle.require_z_d());
    return 1.0 - pow_int(p, j - 1);
}

double stop_prob_rs(const ValuationModel& m, double z_rs, std::int64_t j) {
    if (j < 1) throw config_error("stop_prob_rs: position must be >= 1");
    const double p = continue_prob_rs(m, z_rs);
    return 1.0 - pow_int(p, j - 1);
}

DemandPoint SdDemandProfile::at(std::int64_t h) const {
    if (h < 1) throw config_error("demand position must be >= 1");
    if (num_products && h > *num_products)
        throw config_error("demand position exceeds the number of products");
    DemandPoint d;
    d.value = pow_int(p_continue, h - 1) * (1.0 - p_continue) + recall_all * rho;
    d.se = recall_all * rho_se;
    return d;
}

SdDemandProfile sd_demand_profile(const ValuationModel& m, const SearchEnvironment& env,
                                  const ReservationBundle& bundle,
                                  const DemandOptions& opts) {
    if (env.n_d != 1) {
        throw config_error("sd_demand_profile: position demand identifies positions "
                           "with single discoveries, so n_d must be 1");
    }
    const double xi = bundle.require_xi();
    const double z_d = bundle.require_z_d();
    require_outside_below(env.u_0, z_d, "sd_demand_profile");

    SdDemandProfile prof;
    prof.num_products = env.num_products;
    prof.p_continue = continue_prob_sd(m, xi, z_d);
    if (!env.num_products) return prof;  // unbounded: no recall component

    const std::int64_t J = *env.num_products;
    if (J < 1) throw config_error("sd_demand_profile: need at least one product");
    prof.recall_all = pow_int(prof.p_continue, J);
    if (prof.recall_all > 0.0) {
        RecallWin win;
        bool exact_ok = false;
        if (fully_discrete(m)) {
            double atoms_below = 0.0;
            for (const auto& [w, pw] : capped_atoms(m, xi))
                if (w < z_d) atoms_below += 1.0;
            double combos = std::pow(atoms_below, static_cast<double>(J));
            exact_ok = combos <= 4000000.0;
        }
        win = exact_ok ? recall_win_exact(m, xi, z_d, env.u_0, J)
                       : recall_win_mc(m, xi, z_d, env.u_0, J, opts);
        prof.exact = win.exact;
        prof.rho = win.p_win / static_cast<double>(J);
        prof.rho_se = win.se / static_cast<double>(J);
        prof.outside = prof.recall_all * (1.0 - win.p_win);
        prof.outside_se = prof.recall_all * win.se;
    }
    return prof;
}

DemandPoint demand_sd(const ValuationModel& m, const SearchEnvironment& env,
                      const ReservationBundle& bundle, std::int64_t h,
                      const DemandOptions& opts) {
    return sd_demand_profile(m, env, bundle, opts).at(h);
}

double ranking_effect_sd(const ValuationModel& m, const ReservationBundle& bundle,
                         std::int64_t h) {
    if (h < 1) throw config_error("ranking_effect_sd: position must be >= 1");
    const double p = continue_prob_sd(m, bundle.require_xi(), bundle.require_z_d());
    const double stop = 1.0 - p;
    return pow_int(p, h - 1) * stop * stop;
}

double ranking_effect_rs(const ValuationModel& m, double z_rs, std::int64_t h) {
    if (h < 1) throw config_error("ranking_effect_rs: position must be >= 1");
    const double p = continue_prob_rs(m, z_rs);
    const double stop = 1.0 - p;
    return pow_int(p, h - 1) * stop * stop;
}

RankingThresholdReport find_ranking_threshold(const ValuationModel& m,
                                              const SearchEnvironment& env) {
    SearchEnvironment sd_env = env;
    sd_env.mode = Mode::SD;
    const ReservationBundle bundle = compute_reservations(m, sd_env);
    RankingThresholdReport rep;
    rep.z_d = bundle.require_z_d();
    rep.z_rs = solve_rs_reservation(m, env.rs_cost());
    require_outside_below(env.u_0, rep.z_d, "find_ranking_threshold");
    require_outside_below(env.u_0, rep.z_rs, "find_ranking_threshold");
    rep.p_sd = continue_prob_sd(m, bundle.require_xi(), rep.z_d);
    rep.p_rs = continue_prob_rs(m, rep.z_rs);

    const double r_sd_1 = (1.0 - rep.p_sd) * (1.0 - rep.p_sd);
    const double r_rs_1 = (1.0 - rep.p_rs) * (1.0 - rep.p_rs);
    if (r_sd_1 >= r_rs_1) {
        rep.h_star = 1;
        return rep;
    }
    if (rep.p_sd >= 1.0) {
        rep.note = "SD ranking effects vanish (search never stops early)";
        return rep;
    }
    if (rep.p_rs <= 0.0) {
        rep.h_star = 2;  // RS effect is zero past h = 1, SD stays positive
        return rep;
    }
    if (!(rep.p_sd > rep.p_rs)) {
        rep.note = "SD continue-probability does not exceed RS; curves never cross";
        return rep;
    }
    // In logs, r_SD(h) - r_RS(h) changes sign at
    //   h = 1 + 2 (log(1-p_rs) - log(1-p_sd)) / (log p_sd - log p_rs);
    // scan a small window around that point to return the first integer hit.
    const double cross = 1.0 + 2.0 *
                                   (std::log1p(-rep.p_rs) - std::log1p(-rep.p_sd)) /
                                   (std::log(rep.p_sd) - std::log(rep.p_rs));
    std::int64_t start = std::max<std::int64_t>(1, static_cast<std::int64_t>(cross) - 3);
    for (std::int64_t h = start; h < start + 1000000; ++h) {
        const double lsd = 2.0 * std::log1p(-rep.p_sd) +
                           static_cast<double>(h - 1) * std::log(rep.p_sd);
        const double lrs = 2.0 * std::log1p(-rep.p_rs) +
                           static_cast<double>(h - 1) * std::log(rep.p_rs);
        if (lsd >= lrs) {
            rep.h_star = h;
            return rep;
        }
    }
    rep.note = "no crossing found within the scan limit";
    return rep;
}

DemandCurve demand_curve(const ValuationModel& m, const SearchEnvironment& env,
                         const ReservationBundle& bundle, std::int64_t h_max,
                         const DemandOptions& opts) {
    if (h_max < 1) throw config_error("demand_curve: need h_max >= 1");
    if (env.n_d != 1) {
        throw config_error("demand_curve: position demand identifies positions with "
                           "single discoveries, so n_d must be 1");
    }
    DemandCurve curve;
    curve.mode = env.mode;
    curve.num_products = env.num_products;
    const std::int64_t cap =
        env.num_products ? std::min<std::int64_t>(h_max, *env.num_products) : h_max;

    switch (env.mode) {
        case Mode::SD: {
            const SdDemandProfile prof = sd_demand_profile(m, env, bundle, opts);
            curve.method = !env.num_products ? "analytic"
                           : prof.exact      ? "exact"
                                             : "analytic+mc-recall";
            curve.outside = prof.outside;
            curve.outside_se = prof.outside_se;
            if (!env.num_products) {
                // Unbounded: demand is the pure stop-at-h component.
                double ph = 1.0;
                for (std::int64_t h = 1; h <= cap; ++h) {
                    DemandRow row;
                    row.h = h;
                    row.demand = {ph * (1.0 - prof.p_continue), 0.0};
                    row.ranking = DemandPoint{ranking_effect_sd(m, bundle, h), 0.0};
                    curve.rows.push_back(row);
                    ph *= prof.p_continue;
                }
            } else {
                for (std::int64_t h = 1; h <= cap; ++h) {
                    DemandRow row;
                    row.h = h;
                    row.demand = prof.at(h);
                    if (h < *env.num_products)
                        row.ranking = DemandPoint{ranking_effect_sd(m, bundle, h), 0.0};
                    curve.rows.push_back(row);
                }
            }
            return curve;
        }
        case Mode::RS: {
            const double z_rs = bundle.require_z_rs();
            require_outside_below(env.u_0, z_rs, "demand_curve");
            curve.method = "analytic";
            const double p = continue_prob_rs(m, z_rs);
            double ph = 1.0;
            for (std::int64_t h = 1; h <= cap; ++h) {
                DemandRow row;
                row.h = h;
                row.demand = {ph * (1.0 - p), 0.0};
                row.ranking = DemandPoint{ranking_effect_rs(m, z_rs, h), 0.0};
                curve.rows.push_back(row);
                ph *= p;
            }
            return curve;
        }
        case Mode::DS1:
        case Mode::DS2:
        case Mode::FI: {
            if (!env.num_products)
                throw config_error("demand_curve: simulated modes need a finite "
                                   "number of products");
            curve.method = "mc";
            const std::int64_t J = *env.num_products;
            ConsumerProblem problem;
            problem.num_products = J;
            problem.s0_count = 0;
            const std::int64_t n = std::max<std::int64_t>(opts.mc_paths, 1);
            const auto outcomes = simulate_population_outcomes(env, m, bundle, problem,
                                                               n, opts.seed, opts.threads);
            std::vector<std::int64_t> count(static_cast<std::size_t>(J) + 1, 0);
            std::int64_t outside_count = 0;
            for (const auto& o : outcomes) {
                if (o.purchased == 0) {
                    ++outside_count;
                } else if (o.purchased_position >= 1 && o.purchased_position <= J) {
                    ++count[static_cast<std::size_t>(o.purchased_position)];
                }
            }
            const double dn = static_cast<double>(n);
            for (std::int64_t h = 1; h <= cap; ++h) {
                const double ph = static_cast<double>(count[static_cast<std::size_t>(h)]) / dn;
                DemandRow row;
                row.h = h;
                row.demand = {ph, std::sqrt(std::max(0.0, ph * (1.0 - ph) / dn))};
                if (h < J) {
                    const double pn =
                        static_cast<double>(count[static_cast<std::size_t>(h + 1)]) / dn;
                    const double diff = ph - pn;
                    // The indicators are disjoint, so E[(1_h - 1_{h+1})^2] = p_h + p_{h+1}.
                    const double var = ph + pn - diff * diff;
                    row.ranking = DemandPoint{diff, std::sqrt(std::max(0.0, var / dn))};
                }
                curve.rows.push_back(row);
            }
            curve.outside = static_cast<double>(outside_count) / dn;
            curve.outside_se =
                std::sqrt(std::max(0.0, curve.outside * (1.0 - curve.outside) / dn));
            return curve;
        }
    }
    throw config_error("demand_curve: unsupported mode");
}

}  // namespace sdsearch
