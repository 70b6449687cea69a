#include "sdsearch/outcomes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdsearch/parallel.hpp"
#include "sdsearch/quadrature.hpp"
#include "sdsearch/reservation.hpp"

namespace sdsearch {

double default_position_bonus(int h) { return 1.0 / (1.0 + h); }

EffectiveValue effective_value(const ProductView& p, const ReservationBundle& bundle,
                               const PositionBonus& f) {
    (void)f;  // enters the ranking only ordinally; see PositionBonus
    EffectiveValue ev;
    ev.position = p.position;
    ev.id = p.id;
    if (p.in_c0) {
        // Utility already known: the option is ranked at its full value.
        ev.base = p.x + p.y;
        ev.tie = ev.base;
        return ev;
    }
    const double xi = bundle.require_xi();
    const double w_tilde = p.x + std::min(p.y, xi);
    const double z_d = bundle.z_d_for_batch(p.batch_size);
    if (p.in_s0 || w_tilde < z_d) {
        ev.base = w_tilde;
        ev.tie = w_tilde;
        return ev;
    }
    // A product whose capped valuation clears its discovery value stops the
    // search on discovery, so later options are never reached: it ranks at
    // the threshold itself, above every option with a smaller base, and the
    // infinitesimal position bonus (earlier batch first, then capped
    // valuation, then id) decides among stoppers via the key's tie fields.
    ev.base = z_d;
    ev.tie = w_tilde;
    return ev;
}

EffectiveValue effective_outside_value(double u_0) {
    EffectiveValue ev;
    ev.base = u_0;
    ev.tie = u_0;
    ev.position = -1;
    ev.id = 0;
    return ev;
}

std::int64_t eventual_purchase(const std::vector<ProductView>& products, double u_0,
                               const ReservationBundle& bundle, const PositionBonus& f) {
    EffectiveValue best = effective_outside_value(u_0);
    for (const auto& p : products) {
        const EffectiveValue ev = effective_value(p, bundle, f);
        if (best < ev) best = ev;
    }
    return best.id;
}

namespace {

struct MeanSe {
    double mean;
    double se;
};

MeanSe reduce_mean_se(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = pairwise_sum(v) / n;
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    const double var = pairwise_sum(sq) / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

}  // namespace

MonteCarloValue expected_payoff(const SearchEnvironment& env, const ValuationModel& m,
                                const ReservationBundle& bundle, const ConsumerProblem& problem,
                                std::int64_t n_paths, std::uint64_t seed, int threads) {
    env.validate();
    m.require_independent("expected_payoff");
    MonteCarloValue out;
    if (!problem.num_products) {
        // With unboundedly many products some discovery eventually clears z_d
        // almost surely, so the value is exact.
        out.mean = std::max(env.u_0, bundle.require_z_d());
        out.se = 0.0;
        out.paths = 0;
        return out;
    }
    const std::int64_t J = *problem.num_products;
    if (J == 0) {
        out.mean = env.u_0;
        out.se = 0.0;
        out.paths = 0;
        return out;
    }
    if (n_paths <= 1) throw config_error("expected_payoff: need n_paths > 1");
    const double xi = bundle.require_xi();
    // Per-product discovery cap: products of the final batch of a finite set
    // may arrive in a batch smaller than n_d and carry that batch's threshold.
    std::vector<double> cap(static_cast<std::size_t>(J),
                            std::numeric_limits<double>::infinity());
    for (std::int64_t j = problem.s0_count + 1; j <= J; ++j) {
        const std::int64_t batch = (j - problem.s0_count - 1) / env.n_d;
        const std::int64_t size =
            std::min<std::int64_t>(env.n_d, J - problem.s0_count - batch * env.n_d);
        cap[static_cast<std::size_t>(j - 1)] = bundle.z_d_for_batch(size);
    }
    std::vector<double> vals(static_cast<std::size_t>(n_paths));
    parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t i) {
        ModelDraws draws(m, seed, static_cast<std::uint64_t>(i));
        double best = env.u_0;
        for (std::int64_t j = 1; j <= J; ++j) {
            // Caps never increase along the scan, so once the running best
            // reaches the current cap no later product can beat it.
            const double c = cap[static_cast<std::size_t>(j - 1)];
            if (best >= c) break;
            const double w = draws.x(j) + std::min(draws.y(j), xi);
            best = std::max(best, std::min(w, c));
        }
        vals[i] = best;
    });
    const MeanSe ms = reduce_mean_se(vals);
    out.mean = ms.mean;
    out.se = ms.se;
    out.paths = n_paths;
    return out;
}

MonteCarloValue payoff_diff_sd_ds(const SearchEnvironment& env, const ValuationModel& m,
                                  std::int64_t num_products, std::int64_t n_paths,
                                  std::uint64_t seed, int threads) {
    m.require_independent("payoff_diff_sd_ds");
    if (env.n_d != 1) {
        throw config_error("payoff_diff_sd_ds: the position cost schedule maps one "
                           "product per position, so n_d must be 1");
    }
    if (num_products < 1) throw config_error("payoff_diff_sd_ds: need num_products >= 1");
    if (n_paths <= 1) throw config_error("payoff_diff_sd_ds: need n_paths > 1");
    if (!(env.c_s > 0.0)) throw config_error("payoff_diff_sd_ds: c_s must be > 0");
    if (env.c_d < 0.0) throw config_error("payoff_diff_sd_ds: c_d must be >= 0");
    const double xi = solve_xi(m.y, env.c_s);
    std::optional<double> z_d;
    if (env.c_d > 0.0) {
        SearchEnvironment sd_env = env;
        sd_env.mode = Mode::SD;
        sd_env.num_products = num_products;
        z_d = solve_discovery_value(m, sd_env);
    }
    // Directed-search thresholds for positions 1..J with cost c_s + h * c_d.
    std::vector<double> xi_h(static_cast<std::size_t>(num_products));
    for (std::int64_t h = 1; h <= num_products; ++h) {
        xi_h[static_cast<std::size_t>(h - 1)] = solve_xi(m.y, env.c_s + env.c_d * h);
    }
    std::vector<double> diffs(static_cast<std::size_t>(n_paths));
    parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t i) {
        ModelDraws draws(m, seed, static_cast<std::uint64_t>(i));
        double sd_best = env.u_0;
        double ds_best = env.u_0;
        for (std::int64_t j = 1; j <= num_products; ++j) {
            const double x = draws.x(j);
            const double y = draws.y(j);
            double w_sd = x + std::min(y, xi);
            if (z_d) w_sd = std::min(w_sd, *z_d);
            sd_best = std::max(sd_best, w_sd);
            ds_best = std::max(ds_best, x + std::min(y, xi_h[static_cast<std::size_t>(j - 1)]));
        }
        diffs[i] = sd_best - ds_best;
    });
    const MeanSe ms = reduce_mean_se(diffs);
    return {ms.mean, ms.se, n_paths};
}

WelfareThreshold welfare_threshold_n_star(const SearchEnvironment& env,
                                          const ValuationModel& m, double delta, int n_max,
                                          std::int64_t n_paths, std::uint64_t seed,
                                          int threads) {
    env.validate();
    m.require_independent("welfare_threshold_n_star");
    if (env.n_d != 1) {
        throw config_error("welfare_threshold_n_star: the product-count sweep grows "
                           "one product at a time, so n_d must be 1");
    }
    if (!(delta > 0.0) || delta >= env.c_s || delta >= env.c_d) {
        throw config_error("welfare_threshold_n_star: need 0 < delta < min(c_s, c_d)");
    }
    if (n_max < 1) throw config_error("welfare_threshold_n_star: need n_max >= 1");
    SearchEnvironment env_cs = env;  // inspection made cheaper
    env_cs.c_s -= delta;
    env_cs.mode = Mode::SD;
    SearchEnvironment env_cd = env;  // discovery made cheaper
    env_cd.c_d -= delta;
    env_cd.mode = Mode::SD;
    const double xi_cs = solve_xi(m.y, env_cs.c_s);
    const double xi_cd = solve_xi(m.y, env_cd.c_s);
    const double zd_cs = solve_discovery_value(m, env_cs);
    const double zd_cd = solve_discovery_value(m, env_cd);

    // Paired paths: per path, running prefix maxima over J give both payoff
    // curves from the same draws.
    std::vector<std::vector<double>> diff_by_j(
        static_cast<std::size_t>(n_max),
        std::vector<double>(static_cast<std::size_t>(n_paths)));
    parallel_for(static_cast<std::size_t>(n_paths), threads, [&](std::size_t i) {
        ModelDraws draws(m, seed, static_cast<std::uint64_t>(i));
        double best_cs = env.u_0;
        double best_cd = env.u_0;
        for (int j = 1; j <= n_max; ++j) {
            const double x = draws.x(j);
            const double y = draws.y(j);
            best_cs = std::max(best_cs, std::min(x + std::min(y, xi_cs), zd_cs));
            best_cd = std::max(best_cd, std::min(x + std::min(y, xi_cd), zd_cd));
            diff_by_j[static_cast<std::size_t>(j - 1)][i] = best_cd - best_cs;
        }
    });
    WelfareThreshold wt;
    wt.diff_mean.resize(static_cast<std::size_t>(n_max));
    wt.diff_se.resize(static_cast<std::size_t>(n_max));
    int last_loss = 0;  // largest J at which the discovery reduction did not win
    bool won_before = false;
    for (int j = 1; j <= n_max; ++j) {
        const MeanSe ms = reduce_mean_se(diff_by_j[static_cast<std::size_t>(j - 1)]);
        wt.diff_mean[static_cast<std::size_t>(j - 1)] = ms.mean;
        wt.diff_se[static_cast<std::size_t>(j - 1)] = ms.se;
        const bool wins = ms.mean > 0.0;
        if (!wins) {
            last_loss = j;
            if (won_before) wt.monotone = false;
        } else {
            won_before = true;
        }
    }
    if (last_loss < n_max) wt.n_star = last_loss;
    return wt;
}

}  // namespace sdsearch
