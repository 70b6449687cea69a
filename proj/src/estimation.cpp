#include "sdsearch/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sdsearch/common.hpp"
#include "sdsearch/nelder_mead.hpp"
#include "sdsearch/parallel.hpp"
#include "sdsearch/policy.hpp"
#include "sdsearch/quadrature.hpp"
#include "sdsearch/reservation.hpp"
#include "sdsearch/rng.hpp"

namespace sdsearch {

namespace {

// Taste shocks are standard normal by scale normalization; the data generator
// enforces the same distribution so generated and fitted scales coincide.
Distribution standard_taste() { return Distribution::normal(0.0, 1.0); }

Distribution xb_belief(double mean, double var, const char* origin) {
    if (!(var > 1e-12)) {
        throw solver_error(std::string(origin) +
                           ": partial-valuation variance degenerates under these "
                           "preference parameters");
    }
    return Distribution::normal(mean, var);
}

// Thresholds one candidate parameter vector implies for the panel. Solving
// them can fail at extreme candidates (costs beyond the taste-shock support);
// callers inside the optimizer treat that as an infinitely bad objective.
struct FitContext {
    Mode mode = Mode::FI;
    double xi = 0.0;              // flat inspection offset (SD, DS1)
    std::vector<double> xi_by_h;  // per-position offsets (DS2)
    double z_d = 0.0;             // discovery value (SD)
    double z_rs = 0.0;            // joint-search reservation value (RS)
};

FitContext make_fit_context(const PanelData& panel, const ModelParams& p) {
    const DgpConfig& cfg = panel.config;
    FitContext ctx;
    ctx.mode = p.model;
    const Distribution y = standard_taste();
    switch (p.model) {
        case Mode::FI:
            break;
        case Mode::DS1:
            ctx.xi = solve_xi(y, p.c_s);
            break;
        case Mode::DS2: {
            const int max_pos = static_cast<int>(
                std::max<std::int64_t>(0, cfg.num_products - cfg.s0_count));
            const auto xs = ds_xi_by_position(y, p.c_s, p.c_d, 0, max_pos);
            ctx.xi_by_h.reserve(xs.size());
            for (const auto& px : xs) {
                if (!px.xi) {
                    throw solver_error("estimation: inspection threshold at position " +
                                       std::to_string(px.h) + ": " + px.error);
                }
                ctx.xi_by_h.push_back(*px.xi);
            }
            break;
        }
        case Mode::RS: {
            const ValuationModel m{xb_belief(panel.xb_mean(p.beta1, p.beta2),
                                             panel.xb_var(p.beta1, p.beta2), "estimation"),
                                   y, true};
            ctx.z_rs = solve_rs_reservation(m, p.c_s);
            break;
        }
        case Mode::SD: {
            ctx.xi = solve_xi(y, p.c_s);
            // The discovery value is rebuilt exactly the way the generator
            // built it (configured characteristic distributions, not sample
            // moments), so replaying a record against these conditions is not
            // distorted by sampling noise in knife-edge cases.
            const double mean = p.beta1 * cfg.x1.mean() + p.beta2 * cfg.x2.mean();
            const double var = p.beta1 * p.beta1 * cfg.x1.variance() +
                               p.beta2 * p.beta2 * cfg.x2.variance();
            SearchEnvironment env;
            env.mode = Mode::SD;
            env.n_d = 1;
            env.c_s = p.c_s;
            env.c_d = p.c_d;
            env.num_products = cfg.num_products;
            ctx.z_d = solve_discovery_value(
                {xb_belief(mean, var, "estimation"), y, true}, env);
            break;
        }
    }
    return ctx;
}

// Per-consumer quantities that do not depend on the taste-shock draw.
struct Scratch {
    std::vector<double> xb;        // x'beta per product
    std::vector<double> zthr;      // per-product inspection threshold
    std::vector<std::size_t> ord;  // product index by observed inspection rank
};

void build_scratch(const FitContext& ctx, const ConsumerRecord& rec, const ModelParams& p,
                   Scratch& s) {
    const std::size_t J = rec.x1.size();
    s.xb.resize(J);
    s.zthr.assign(J, 0.0);
    s.ord.assign(static_cast<std::size_t>(rec.num_inspected), 0);
    for (std::size_t k = 0; k < J; ++k) {
        s.xb[k] = p.beta1 * rec.x1[k] + p.beta2 * rec.x2[k];
        if (ctx.mode == Mode::DS1 || ctx.mode == Mode::SD) {
            s.zthr[k] = s.xb[k] + ctx.xi;
        } else if (ctx.mode == Mode::DS2) {
            s.zthr[k] = s.xb[k] + ctx.xi_by_h.at(static_cast<std::size_t>(rec.position[k]));
        }
        const std::int64_t rank = rec.inspected_rank[k];
        if (rank > 0) s.ord.at(static_cast<std::size_t>(rank - 1)) = k;
    }
}

// Appends the inequality margins that make the observed record optimal under
// the candidate model, evaluated at one taste-shock draw (y_draw[0] is the
// outside option's shock, y_draw[1 + k] product k's). Nonnegative margins
// mean the draw rationalizes the record.
void append_inequalities(const FitContext& ctx, const ConsumerRecord& rec,
                         const ModelParams& p, const Scratch& s, const double* y_draw,
                         std::vector<double>& out) {
    const std::size_t J = rec.x1.size();
    const std::size_t n_ins = static_cast<std::size_t>(rec.num_inspected);
    const double u_out = p.beta3 + y_draw[0];
    const auto u_at = [&](std::size_t k) { return s.xb[k] + y_draw[k + 1]; };
    const double u_star =
        rec.purchased == 0 ? u_out : u_at(static_cast<std::size_t>(rec.purchased - 1));

    if (ctx.mode == Mode::FI) {
        // Everything is in the choice set: the purchase beat every option.
        if (rec.purchased != 0) out.push_back(u_star - u_out);
        for (std::size_t k = 0; k < J; ++k) {
            if (static_cast<std::int64_t>(k) + 1 != rec.purchased) {
                out.push_back(u_star - u_at(k));
            }
        }
        return;
    }

    if (ctx.mode == Mode::DS1 || ctx.mode == Mode::DS2 || ctx.mode == Mode::RS) {
        // Stopping: when the consumer quit searching, no remaining option was
        // worth its reservation value.
        if (n_ins < J) {
            double best = u_out;
            for (const std::size_t k : s.ord) best = std::max(best, u_at(k));
            if (ctx.mode == Mode::RS) {
                out.push_back(best - ctx.z_rs);
            } else {
                for (std::size_t k = 0; k < J; ++k) {
                    if (rec.inspected_rank[k] == 0) out.push_back(best - s.zthr[k]);
                }
            }
        }
        // Continuation: every inspection after the first was taken while its
        // reservation value still exceeded the standing best utility.
        double run = u_out;
        if (n_ins >= 1) run = std::max(run, u_at(s.ord[0]));
        for (std::size_t m = 1; m < n_ins; ++m) {
            const double z_next = ctx.mode == Mode::RS ? ctx.z_rs : s.zthr[s.ord[m]];
            out.push_back(z_next - run);
            run = std::max(run, u_at(s.ord[m]));
        }
    }

    if (ctx.mode == Mode::SD && n_ins < J) {
        // Stopping: a purchased product beat one more discovery — but only
        // when products were left to discover; a consumer who ran out of
        // alternatives may well settle below the discovery value. The chosen
        // option also beat every aware (initial or discovered) product left
        // uninspected.
        std::int64_t n_initial = 0;
        for (std::size_t k = 0; k < J; ++k) {
            if (rec.position[k] == 0) ++n_initial;
        }
        const bool undiscovered_remain =
            rec.discoveries < static_cast<std::int64_t>(J) - n_initial;
        if (rec.purchased != 0 && undiscovered_remain) {
            out.push_back(u_star - ctx.z_d);
        }
        for (std::size_t k = 0; k < J; ++k) {
            if (rec.inspected_rank[k] == 0 &&
                static_cast<std::int64_t>(rec.position[k]) <= rec.discoveries) {
                out.push_back(u_star - s.zthr[k]);
            }
        }
    }

    // Purchase: the chosen option was the best of the consideration set.
    if (rec.purchased != 0) out.push_back(u_star - u_out);
    for (const std::size_t k : s.ord) {
        if (static_cast<std::int64_t>(k) + 1 != rec.purchased) {
            out.push_back(u_star - u_at(k));
        }
    }
}

// Cache of standard-normal taste draws, consumer-major: draw d of consumer i
// occupies a row of (1 + J) values whose n-th entry is the quantile of
// uniform n = d * (1 + J) + j from stream (seed, i). Built once and shared by
// every likelihood evaluation so optimizer and standalone calls agree bit for
// bit at any thread count.
struct DrawCache {
    std::int64_t n_draws = 0;
    std::int64_t width = 0;
    std::vector<double> vals;

    const double* at(std::size_t consumer, std::int64_t d) const {
        return vals.data() +
               (static_cast<std::size_t>(consumer) * static_cast<std::size_t>(n_draws) +
                static_cast<std::size_t>(d)) *
                   static_cast<std::size_t>(width);
    }
};

DrawCache build_draw_cache(const PanelData& panel, std::int64_t n_draws, std::uint64_t seed,
                           int threads) {
    DrawCache cache;
    cache.n_draws = n_draws;
    cache.width = panel.config.num_products + 1;
    const std::size_t per = static_cast<std::size_t>(n_draws * cache.width);
    cache.vals.resize(panel.consumers.size() * per);
    parallel_for(panel.consumers.size(), threads, [&](std::size_t i) {
        const RandomStream rs(seed, static_cast<std::uint64_t>(i));
        double* dst = cache.vals.data() + i * per;
        for (std::size_t n = 0; n < per; ++n) {
            dst[n] = normal_quantile(rs.uniform_at(static_cast<std::uint64_t>(n)));
        }
    });
    return cache;
}

double consumer_loglik(const FitContext& ctx, const ConsumerRecord& rec, const ModelParams& p,
                       double lambda, const DrawCache& cache, std::size_t i, Scratch& scratch,
                       std::vector<double>& kappas) {
    build_scratch(ctx, rec, p, scratch);
    double sum = 0.0;
    for (std::int64_t d = 0; d < cache.n_draws; ++d) {
        kappas.clear();
        append_inequalities(ctx, rec, p, scratch, cache.at(i, d), kappas);
        double mass = 0.0;
        for (const double kappa : kappas) {
            mass += std::exp(std::min(700.0, -lambda * kappa));
        }
        sum += 1.0 / (1.0 + mass);
    }
    const double avg = sum / static_cast<double>(cache.n_draws);
    return std::log(std::max(avg, 1e-300));
}

double likelihood_core(const PanelData& panel, const FitContext& ctx, const ModelParams& p,
                       double lambda, const DrawCache& cache, int threads) {
    std::vector<double> slots(panel.consumers.size());
    parallel_for(panel.consumers.size(), threads, [&](std::size_t i) {
        Scratch scratch;
        std::vector<double> kappas;
        kappas.reserve(64);
        slots[i] =
            consumer_loglik(ctx, panel.consumers[i], p, lambda, cache, i, scratch, kappas);
    });
    return pairwise_sum(slots);
}

double pct_delta(double base, double alt) {
    if (alt == base) return 0.0;
    return 100.0 * (alt - base) / std::abs(base);
}

}  // namespace

void DgpConfig::validate() const {
    if (num_consumers <= 0) throw config_error("dgp: num_consumers must be > 0");
    if (num_products <= 0) throw config_error("dgp: num_products must be > 0");
    if (s0_count < 0 || s0_count > num_products) {
        throw config_error("dgp: s0_count must lie in [0, num_products]");
    }
    if (!(c_s > 0.0)) throw config_error("dgp: c_s must be > 0");
    if (!(c_d > 0.0)) throw config_error("dgp: c_d must be > 0");
    if (x1.family() != Family::normal || x2.family() != Family::normal) {
        throw config_error("dgp: product characteristics must be normal");
    }
    if (y.family() != Family::normal || y.mean() != 0.0 || y.variance() != 1.0) {
        throw config_error(
            "dgp: taste shocks must be standard normal (the scale normalization "
            "assumed by every fitted model)");
    }
}

PanelData simulate_panel(const DgpConfig& dgp, int threads) {
    dgp.validate();
    PanelData panel;
    panel.config = dgp;
    const std::int64_t J = dgp.num_products;

    // Belief over the partial valuation x'beta implied by the generating
    // characteristic distributions (a sum of independent normals).
    const double xb_m = dgp.beta1 * dgp.x1.mean() + dgp.beta2 * dgp.x2.mean();
    const double xb_v = dgp.beta1 * dgp.beta1 * dgp.x1.variance() +
                        dgp.beta2 * dgp.beta2 * dgp.x2.variance();
    const ValuationModel belief{xb_belief(xb_m, xb_v, "simulate_panel"), dgp.y, true};

    SearchEnvironment env;
    env.mode = Mode::SD;
    env.n_d = 1;
    env.c_s = dgp.c_s;
    env.c_d = dgp.c_d;
    env.num_products = J;

    ReservationBundle bundle;
    bundle.xi = solve_xi(dgp.y, dgp.c_s);
    bundle.z_d = solve_discovery_value(belief, env);
    bundle.Xi = *bundle.z_d - belief.x.mean();

    const std::uint64_t chars_seed = derive_seed(dgp.seed, "chars");
    const std::uint64_t taste_seed = derive_seed(dgp.seed, "tastes");

    panel.consumers.resize(static_cast<std::size_t>(dgp.num_consumers));
    parallel_for(panel.consumers.size(), threads, [&](std::size_t i) {
        const RandomStream chars(chars_seed, static_cast<std::uint64_t>(i));
        const RandomStream tastes(taste_seed, static_cast<std::uint64_t>(i));
        ConsumerRecord rec;
        rec.x1.resize(static_cast<std::size_t>(J));
        rec.x2.resize(static_cast<std::size_t>(J));
        rec.position.resize(static_cast<std::size_t>(J));
        rec.inspected_rank.assign(static_cast<std::size_t>(J), 0);
        rec.y_realized.resize(static_cast<std::size_t>(J));
        std::vector<double> xs(static_cast<std::size_t>(J));
        for (std::int64_t k = 0; k < J; ++k) {
            const std::size_t kk = static_cast<std::size_t>(k);
            rec.x1[kk] = dgp.x1.quantile(chars.uniform_at(2 * static_cast<std::uint64_t>(k)));
            rec.x2[kk] =
                dgp.x2.quantile(chars.uniform_at(2 * static_cast<std::uint64_t>(k) + 1));
            xs[kk] = dgp.beta1 * rec.x1[kk] + dgp.beta2 * rec.x2[kk];
            rec.position[kk] =
                k + 1 <= dgp.s0_count ? 0 : static_cast<int>(k + 1 - dgp.s0_count);
            rec.y_realized[kk] =
                dgp.y.quantile(tastes.uniform_at(static_cast<std::uint64_t>(k) + 1));
        }
        rec.outside_y = dgp.y.quantile(tastes.uniform_at(0));

        SearchEnvironment cenv = env;
        cenv.u_0 = dgp.beta3 + rec.outside_y;
        const VectorDraws draws(std::move(xs), rec.y_realized);
        const Trajectory tr =
            simulate_consumer(cenv, bundle, {J, dgp.s0_count}, draws, true);
        rec.purchased = tr.purchased;
        rec.num_inspected = tr.inspections;
        rec.discoveries = tr.discoveries;
        std::int64_t rank = 0;
        for (const Step& st : tr.steps) {
            if (st.kind == ActionKind::inspect) {
                rec.inspected_rank[static_cast<std::size_t>(st.target - 1)] = ++rank;
            }
        }
        panel.consumers[i] = std::move(rec);
    });

    const double n_pts = static_cast<double>(dgp.num_consumers) * static_cast<double>(J);
    double m1 = 0.0, m2 = 0.0;
    for (const auto& rec : panel.consumers) {
        for (std::size_t k = 0; k < rec.x1.size(); ++k) {
            m1 += rec.x1[k];
            m2 += rec.x2[k];
        }
    }
    panel.mean_x1 = m1 / n_pts;
    panel.mean_x2 = m2 / n_pts;
    double v1 = 0.0, v2 = 0.0, cv = 0.0;
    for (const auto& rec : panel.consumers) {
        for (std::size_t k = 0; k < rec.x1.size(); ++k) {
            const double d1 = rec.x1[k] - panel.mean_x1;
            const double d2 = rec.x2[k] - panel.mean_x2;
            v1 += d1 * d1;
            v2 += d2 * d2;
            cv += d1 * d2;
        }
    }
    panel.var_x1 = v1 / n_pts;
    panel.var_x2 = v2 / n_pts;
    panel.cov_x12 = cv / n_pts;
    return panel;
}

std::size_t gamma_size(Mode model) {
    switch (model) {
        case Mode::FI: return 3;
        case Mode::DS1:
        case Mode::RS: return 4;
        case Mode::DS2:
        case Mode::SD: return 5;
    }
    throw config_error("gamma_size: unknown model");
}

ModelParams params_from_gamma(Mode model, const std::vector<double>& gamma) {
    if (gamma.size() != gamma_size(model)) {
        throw config_error("params_from_gamma: expected " +
                           std::to_string(gamma_size(model)) + " parameters for " +
                           to_string(model) + ", got " + std::to_string(gamma.size()));
    }
    ModelParams p;
    p.model = model;
    p.beta1 = gamma[0];
    p.beta2 = gamma[1];
    p.beta3 = gamma[2];
    if (gamma.size() >= 4) p.c_s = std::exp(gamma[3]);
    if (gamma.size() >= 5) p.c_d = std::exp(gamma[4]);
    return p;
}

std::vector<double> gamma_from_params(const ModelParams& p) {
    const std::size_t dim = gamma_size(p.model);
    std::vector<double> g{p.beta1, p.beta2, p.beta3};
    if (dim >= 4) {
        if (!(p.c_s > 0.0)) throw config_error("gamma_from_params: c_s must be > 0");
        g.push_back(std::log(p.c_s));
    }
    if (dim >= 5) {
        if (!(p.c_d > 0.0)) throw config_error("gamma_from_params: c_d must be > 0");
        g.push_back(std::log(p.c_d));
    }
    return g;
}

std::vector<double> model_inequalities(const PanelData& panel, std::size_t consumer,
                                       const ModelParams& p,
                                       const std::vector<double>& y_draw) {
    if (consumer >= panel.consumers.size()) {
        throw config_error("model_inequalities: consumer index out of range");
    }
    const ConsumerRecord& rec = panel.consumers[consumer];
    if (y_draw.size() != rec.x1.size() + 1) {
        throw config_error(
            "model_inequalities: y_draw needs one entry for the outside option plus one "
            "per product");
    }
    const FitContext ctx = make_fit_context(panel, p);
    Scratch scratch;
    build_scratch(ctx, rec, p, scratch);
    std::vector<double> out;
    append_inequalities(ctx, rec, p, scratch, y_draw.data(), out);
    return out;
}

double smoothed_likelihood(const PanelData& panel, const ModelParams& p, double lambda,
                           std::int64_t n_draws, std::uint64_t seed, int threads) {
    if (panel.consumers.empty()) throw config_error("smoothed_likelihood: empty panel");
    if (!(lambda > 0.0)) throw config_error("smoothed_likelihood: lambda must be > 0");
    if (n_draws <= 0) throw config_error("smoothed_likelihood: n_draws must be > 0");
    const FitContext ctx = make_fit_context(panel, p);
    const DrawCache cache = build_draw_cache(panel, n_draws, seed, threads);
    return likelihood_core(panel, ctx, p, lambda, cache, threads);
}

EstimationResult estimate(const PanelData& panel, const EstimationConfig& cfg) {
    if (panel.consumers.empty()) throw config_error("estimate: empty panel");
    if (!(cfg.lambda > 0.0)) throw config_error("estimate: lambda must be > 0");
    if (cfg.n_draws <= 0) throw config_error("estimate: n_draws must be > 0");
    if (cfg.restarts < 1) throw config_error("estimate: restarts must be >= 1");

    const DrawCache cache = build_draw_cache(panel, cfg.n_draws, cfg.seed, cfg.threads);
    const std::size_t dim = gamma_size(cfg.model);
    const auto objective = [&](const std::vector<double>& g) -> double {
        try {
            const ModelParams p = params_from_gamma(cfg.model, g);
            const FitContext ctx = make_fit_context(panel, p);
            return -likelihood_core(panel, ctx, p, cfg.lambda, cache, cfg.threads);
        } catch (const std::runtime_error&) {
            return 1e100;  // thresholds unsolvable at these parameters
        }
    };

    std::vector<double> g0{1.0, -1.0, 2.0};
    while (g0.size() < dim) g0.push_back(std::log(0.05));
    SimplexOptions opts;
    opts.max_iter = cfg.max_iter;
    opts.diameter_tol = cfg.simplex_tol;

    const RandomStream jitter(cfg.seed, 0xE5);
    SimplexResult best;
    bool have = false;
    for (int r = 0; r < cfg.restarts; ++r) {
        std::vector<double> start = g0;
        if (r > 0) {
            for (std::size_t k = 0; k < dim; ++k) {
                start[k] += 2.0 * jitter.uniform_at(static_cast<std::uint64_t>(r) * 16 + k) -
                            1.0;
            }
        }
        SimplexResult res = minimize_simplex(objective, start, opts);
        if (!have || res.f < best.f) {
            best = std::move(res);
            have = true;
        }
    }

    EstimationResult out;
    out.model = cfg.model;
    out.gamma = best.x;
    out.params = params_from_gamma(cfg.model, best.x);
    out.loglik = -best.f;
    out.converged = best.converged;
    out.iterations = best.iterations;
    out.restarts_used = cfg.restarts;
    const double denom = std::abs(out.params.beta2);
    out.ratio_beta1 = out.params.beta1 / denom;
    out.ratio_beta3 = out.params.beta3 / denom;
    if (dim >= 4) out.ratio_cs = out.params.c_s / denom;
    if (dim >= 5) out.ratio_cd = out.params.c_d / denom;
    return out;
}

ConditionAudit audit_sd_conditions(const PanelData& panel) {
    if (panel.consumers.empty()) throw config_error("audit_sd_conditions: empty panel");
    const DgpConfig& cfg = panel.config;
    ModelParams p;
    p.model = Mode::SD;
    p.beta1 = cfg.beta1;
    p.beta2 = cfg.beta2;
    p.beta3 = cfg.beta3;
    p.c_s = cfg.c_s;
    p.c_d = cfg.c_d;
    const FitContext ctx = make_fit_context(panel, p);

    ConditionAudit audit;
    audit.consumers = static_cast<std::int64_t>(panel.consumers.size());
    audit.min_kappa = std::numeric_limits<double>::infinity();
    Scratch scratch;
    std::vector<double> kappas;
    std::vector<double> y_draw;
    for (const ConsumerRecord& rec : panel.consumers) {
        y_draw.assign(1, rec.outside_y);
        y_draw.insert(y_draw.end(), rec.y_realized.begin(), rec.y_realized.end());
        build_scratch(ctx, rec, p, scratch);
        kappas.clear();
        append_inequalities(ctx, rec, p, scratch, y_draw.data(), kappas);
        bool violated = false;
        for (const double kappa : kappas) {
            audit.min_kappa = std::min(audit.min_kappa, kappa);
            if (kappa < -1e-9) violated = true;
        }
        if (violated) ++audit.violations;
    }
    if (!std::isfinite(audit.min_kappa)) audit.min_kappa = 0.0;
    return audit;
}

SimStats simulate_fit(const PanelData& panel, const ModelParams& p,
                      std::int64_t paths_per_consumer, std::uint64_t seed,
                      const ScenarioSpec& scenario, int threads) {
    if (panel.consumers.empty()) throw config_error("simulate_fit: empty panel");
    if (paths_per_consumer <= 0) {
        throw config_error("simulate_fit: paths_per_consumer must be > 0");
    }
    const DgpConfig& cfg = panel.config;
    const std::int64_t J = cfg.num_products;
    // Removing the search frictions turns every process into outright choice
    // of the best option, which the full-information policy evaluates.
    const Mode mode = scenario.zero_costs ? Mode::FI : p.model;

    SearchEnvironment env;
    env.mode = mode;
    env.n_d = 1;
    env.num_products = J;
    ReservationBundle bundle;
    switch (mode) {
        case Mode::FI:
            env.c_s = 1.0;  // never charged: the policy inspects nothing
            env.c_d = 1.0;
            break;
        case Mode::SD: {
            env.c_s = p.c_s;
            env.c_d = p.c_d;
            bundle.xi = solve_xi(cfg.y, p.c_s);
            const double mean = p.beta1 * cfg.x1.mean() + p.beta2 * cfg.x2.mean();
            const double var = p.beta1 * p.beta1 * cfg.x1.variance() +
                               p.beta2 * p.beta2 * cfg.x2.variance();
            bundle.z_d = solve_discovery_value(
                {xb_belief(mean, var, "simulate_fit"), cfg.y, true}, env);
            bundle.Xi = *bundle.z_d - mean;
            break;
        }
        case Mode::RS: {
            // The joint reveal cost is p.c_s; its split between the two cost
            // fields is never observed separately on this path.
            env.c_s = 0.5 * p.c_s;
            env.c_d = 0.5 * p.c_s;
            const ValuationModel m{xb_belief(panel.xb_mean(p.beta1, p.beta2),
                                             panel.xb_var(p.beta1, p.beta2), "simulate_fit"),
                                   cfg.y, true};
            bundle.z_rs = solve_rs_reservation(m, p.c_s);
            break;
        }
        case Mode::DS1:
        case Mode::DS2: {
            env.c_s = p.c_s;
            env.ds_cost_slope = mode == Mode::DS2 ? p.c_d : 0.0;
            // c_d is never charged on directed-search paths but must validate.
            env.c_d = p.c_d > 0.0 ? p.c_d : 1.0;
            const auto xs = ds_xi_by_position(cfg.y, p.c_s, env.ds_cost_slope, 0,
                                              static_cast<int>(J));
            bundle.xi_by_position.reserve(xs.size());
            for (const auto& px : xs) {
                if (!px.xi) {
                    throw solver_error("simulate_fit: inspection threshold at position " +
                                       std::to_string(px.h) + ": " + px.error);
                }
                bundle.xi_by_position.push_back(*px.xi);
            }
            bundle.xi = bundle.xi_by_position.front();
            break;
        }
    }

    struct Acc {
        double insp = 0.0, buy = 0.0, pay = 0.0, d0 = 0.0, d1 = 0.0, d5 = 0.0;
    };
    const std::size_t n = panel.consumers.size();
    std::vector<Acc> acc(n);
    const std::uint64_t path_seed = derive_seed(seed, "paths");
    parallel_for(n, threads, [&](std::size_t i) {
        const ConsumerRecord& rec = panel.consumers[i];
        std::vector<double> x2v = rec.x2;
        std::int64_t id1 = -1, id5 = -1;
        for (std::size_t k = 0; k < x2v.size(); ++k) {
            if (rec.position[k] == 1) id1 = static_cast<std::int64_t>(k) + 1;
            if (rec.position[k] == 5) {
                id5 = static_cast<std::int64_t>(k) + 1;
                x2v[k] *= 1.0 - scenario.price_cut_pct_h5 / 100.0;
            }
        }
        std::vector<double> xs(x2v.size());
        for (std::size_t k = 0; k < xs.size(); ++k) {
            xs[k] = p.beta1 * rec.x1[k] + p.beta2 * x2v[k];
        }
        std::vector<double> ys(xs.size());
        Acc a;
        for (std::int64_t t = 0; t < paths_per_consumer; ++t) {
            const RandomStream rs(path_seed, static_cast<std::uint64_t>(i) *
                                                     static_cast<std::uint64_t>(
                                                         paths_per_consumer) +
                                                 static_cast<std::uint64_t>(t));
            const double y0 = cfg.y.quantile(rs.uniform_at(0));
            for (std::size_t k = 0; k < ys.size(); ++k) {
                ys[k] = cfg.y.quantile(rs.uniform_at(static_cast<std::uint64_t>(k) + 1));
            }
            SearchEnvironment penv = env;
            penv.u_0 = p.beta3 + y0;
            const VectorDraws draws(xs, ys);
            const Trajectory tr =
                simulate_consumer(penv, bundle, {J, cfg.s0_count}, draws, false);
            a.insp += static_cast<double>(tr.inspections);
            a.buy += tr.purchased != 0 ? 1.0 : 0.0;
            a.pay += tr.payoff;
            a.d0 += tr.purchased == 0 ? 1.0 : 0.0;
            a.d1 += tr.purchased == id1 ? 1.0 : 0.0;
            a.d5 += tr.purchased == id5 ? 1.0 : 0.0;
        }
        acc[i] = a;
    });

    const double denom =
        static_cast<double>(n) * static_cast<double>(paths_per_consumer);
    std::vector<double> tmp(n);
    const auto mean_of = [&](const std::function<double(const Acc&)>& sel) {
        for (std::size_t i = 0; i < n; ++i) tmp[i] = sel(acc[i]);
        return pairwise_sum(tmp) / denom;
    };
    SimStats s;
    s.mean_inspections = mean_of([](const Acc& a) { return a.insp; });
    s.purchase_share = mean_of([](const Acc& a) { return a.buy; });
    s.cs = mean_of([](const Acc& a) { return a.pay; });
    s.d0 = mean_of([](const Acc& a) { return a.d0; });
    s.d1 = mean_of([](const Acc& a) { return a.d1; });
    s.d5 = mean_of([](const Acc& a) { return a.d5; });
    return s;
}

CounterfactualRow counterfactual(const PanelData& panel, const ModelParams& p,
                                 Scenario scenario, std::int64_t paths_per_consumer,
                                 std::uint64_t seed, int threads) {
    CounterfactualRow row;
    row.model = p.model;
    row.baseline = simulate_fit(panel, p, paths_per_consumer, seed, {}, threads);
    ScenarioSpec spec;
    if (scenario == Scenario::remove_costs) {
        spec.zero_costs = true;
    } else {
        spec.price_cut_pct_h5 = 1.0;
    }
    row.scenario = simulate_fit(panel, p, paths_per_consumer, seed, spec, threads);
    row.d_cs_pct = pct_delta(row.baseline.cs, row.scenario.cs);
    row.d_d0_pct = pct_delta(row.baseline.d0, row.scenario.d0);
    row.d_d1_pct = pct_delta(row.baseline.d1, row.scenario.d1);
    row.d_d5_pct = pct_delta(row.baseline.d5, row.scenario.d5);
    return row;
}

}  // namespace sdsearch
