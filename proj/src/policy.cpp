#include "sdsearch/policy.hpp"

#include <algorithm>
#include <cmath>

#include "sdsearch/parallel.hpp"
#include "sdsearch/quadrature.hpp"

namespace sdsearch {

namespace {

struct AwareProduct {
    std::int64_t id;
    double x;
    int position;
};

struct ConsideredOption {
    std::int64_t id;
    double u;
    int position;
};

// Largest utility in the consideration set; ties go to the lowest id so the
// realized choice is deterministic.
const ConsideredOption& best_considered(const std::vector<ConsideredOption>& c) {
    const ConsideredOption* best = &c.front();
    for (const auto& o : c) {
        if (o.u > best->u || (o.u == best->u && o.id < best->id)) best = &o;
    }
    return *best;
}

std::size_t best_aware_index(const std::vector<AwareProduct>& aware,
                             const std::function<double(const AwareProduct&)>& value) {
    std::size_t best = 0;
    double best_v = value(aware[0]);
    for (std::size_t i = 1; i < aware.size(); ++i) {
        const double v = value(aware[i]);
        if (v > best_v ||
            (v == best_v && (aware[i].position < aware[best].position ||
                             (aware[i].position == aware[best].position &&
                              aware[i].id < aware[best].id)))) {
            best = i;
            best_v = v;
        }
    }
    return best;
}

void record(Trajectory& tr, bool on, Step step) {
    if (on) tr.steps.push_back(std::move(step));
}

Trajectory simulate_sd(const SearchEnvironment& env, const ReservationBundle& bundle,
                       const ConsumerProblem& problem, const DrawSource& draws,
                       bool record_steps) {
    const double xi = bundle.require_xi();
    const bool positional = !bundle.z_d_by_position.empty();
    Trajectory tr;
    std::vector<ConsideredOption> considered{{0, env.u_0, -1}};
    std::vector<AwareProduct> aware;
    for (int j = 1; j <= problem.s0_count; ++j) {
        aware.push_back({j, draws.x(j), 0});
    }
    std::int64_t discovered = problem.s0_count;
    int batch = 0;
    const std::int64_t guard = 100000000;
    for (std::int64_t it = 0;; ++it) {
        if (it > guard) throw solver_error("simulate_consumer: step guard exceeded");
        const ConsideredOption& buy = best_considered(considered);
        std::optional<double> z_s;
        std::size_t insp_idx = 0;
        if (!aware.empty()) {
            insp_idx = best_aware_index(aware, [&](const AwareProduct& a) { return a.x + xi; });
            z_s = aware[insp_idx].x + xi;
        }
        std::optional<double> z_d;
        const bool can_discover =
            !problem.num_products || discovered < *problem.num_products;
        if (can_discover) {
            if (positional) {
                if (static_cast<std::size_t>(batch) >= bundle.z_d_by_position.size()) {
                    throw model_error("simulate_consumer: no discovery value for batch " +
                                      std::to_string(batch + 1));
                }
                z_d = bundle.z_d_by_position[static_cast<std::size_t>(batch)];
            } else {
                std::int64_t next_size = env.n_d;
                if (problem.num_products) {
                    next_size = std::min<std::int64_t>(next_size,
                                                       *problem.num_products - discovered);
                }
                z_d = bundle.z_d_for_batch(next_size);
            }
        }
        // Weak ties resolve buy over inspect over discover.
        if ((!z_s || buy.u >= *z_s) && (!z_d || buy.u >= *z_d)) {
            record(tr, record_steps, {ActionKind::buy, buy.id, buy.position, buy.u, z_s, z_d});
            tr.purchased = buy.id;
            tr.purchased_position = buy.position;
            tr.purchased_utility = buy.u;
            break;
        }
        if (z_s && (!z_d || *z_s >= *z_d)) {
            AwareProduct p = aware[insp_idx];
            record(tr, record_steps,
                   {ActionKind::inspect, p.id, p.position, buy.u, z_s, z_d});
            aware.erase(aware.begin() + static_cast<std::ptrdiff_t>(insp_idx));
            tr.total_cost += env.c_s;
            ++tr.inspections;
            considered.push_back({p.id, p.x + draws.y(p.id), p.position});
            continue;
        }
        // discover
        ++batch;
        std::int64_t n_new = env.n_d;
        if (problem.num_products) {
            n_new = std::min<std::int64_t>(n_new, *problem.num_products - discovered);
        }
        record(tr, record_steps,
               {ActionKind::discover, discovered + 1, batch, buy.u, z_s, z_d});
        tr.total_cost += env.c_d;
        ++tr.discoveries;
        for (std::int64_t k = 0; k < n_new; ++k) {
            const std::int64_t id = discovered + 1 + k;
            aware.push_back({id, draws.x(id), batch});
        }
        discovered += n_new;
        tr.discovered_products = discovered;
    }
    tr.payoff = tr.purchased_utility - tr.total_cost;
    return tr;
}

Trajectory simulate_rs(const SearchEnvironment& env, const ReservationBundle& bundle,
                       const ConsumerProblem& problem, const DrawSource& draws,
                       bool record_steps) {
    const double z_rs = bundle.require_z_rs();
    Trajectory tr;
    std::vector<ConsideredOption> considered{{0, env.u_0, -1}};
    std::int64_t revealed = 0;
    const std::int64_t guard = 100000000;
    for (std::int64_t it = 0;; ++it) {
        if (it > guard) throw solver_error("simulate_consumer: step guard exceeded");
        const ConsideredOption& buy = best_considered(considered);
        const bool can_search = !problem.num_products || revealed < *problem.num_products;
        if (buy.u >= z_rs || !can_search) {
            record(tr, record_steps,
                   {ActionKind::buy, buy.id, buy.position, buy.u, std::nullopt,
                    can_search ? std::optional<double>(z_rs) : std::nullopt});
            tr.purchased = buy.id;
            tr.purchased_position = buy.position;
            tr.purchased_utility = buy.u;
            break;
        }
        const std::int64_t id = ++revealed;
        record(tr, record_steps,
               {ActionKind::discover, id, static_cast<int>(id), buy.u, std::nullopt, z_rs});
        tr.total_cost += env.rs_cost();
        ++tr.discoveries;
        ++tr.inspections;  // joint reveal: one search inspects what it discovers
        considered.push_back({id, draws.x(id) + draws.y(id), static_cast<int>(id)});
        tr.discovered_products = revealed;
    }
    tr.payoff = tr.purchased_utility - tr.total_cost;
    return tr;
}

Trajectory simulate_ds(const SearchEnvironment& env, const ReservationBundle& bundle,
                       const ConsumerProblem& problem, const DrawSource& draws,
                       bool record_steps) {
    if (!problem.num_products) {
        throw config_error("simulate_consumer: directed search requires finite num_products");
    }
    const std::int64_t J = *problem.num_products;
    Trajectory tr;
    std::vector<ConsideredOption> considered{{0, env.u_0, -1}};
    std::vector<AwareProduct> aware;
    aware.reserve(static_cast<std::size_t>(J));
    for (std::int64_t j = 1; j <= J; ++j) {
        const int pos = j <= problem.s0_count ? 0 : static_cast<int>(j - problem.s0_count);
        aware.push_back({j, draws.x(j), pos});
    }
    tr.discovered_products = J;
    const auto xi_at = [&](int pos) {
        if (static_cast<std::size_t>(pos) >= bundle.xi_by_position.size()) {
            throw model_error("simulate_consumer: no inspection threshold for position " +
                              std::to_string(pos));
        }
        return bundle.xi_by_position[static_cast<std::size_t>(pos)];
    };
    while (true) {
        const ConsideredOption& buy = best_considered(considered);
        if (aware.empty()) {
            record(tr, record_steps,
                   {ActionKind::buy, buy.id, buy.position, buy.u, std::nullopt, std::nullopt});
            tr.purchased = buy.id;
            tr.purchased_position = buy.position;
            tr.purchased_utility = buy.u;
            break;
        }
        const std::size_t idx = best_aware_index(
            aware, [&](const AwareProduct& a) { return a.x + xi_at(a.position); });
        const double z_s = aware[idx].x + xi_at(aware[idx].position);
        if (buy.u >= z_s) {
            record(tr, record_steps,
                   {ActionKind::buy, buy.id, buy.position, buy.u, z_s, std::nullopt});
            tr.purchased = buy.id;
            tr.purchased_position = buy.position;
            tr.purchased_utility = buy.u;
            break;
        }
        AwareProduct p = aware[idx];
        record(tr, record_steps, {ActionKind::inspect, p.id, p.position, buy.u, z_s, std::nullopt});
        aware.erase(aware.begin() + static_cast<std::ptrdiff_t>(idx));
        tr.total_cost += env.c_s + (env.mode == Mode::DS2 ? env.ds_cost_slope * p.position : 0.0);
        ++tr.inspections;
        considered.push_back({p.id, p.x + draws.y(p.id), p.position});
    }
    tr.payoff = tr.purchased_utility - tr.total_cost;
    return tr;
}

Trajectory simulate_fi(const SearchEnvironment& env, const ConsumerProblem& problem,
                       const DrawSource& draws, bool record_steps) {
    if (!problem.num_products) {
        throw config_error("simulate_consumer: full information requires finite num_products");
    }
    const std::int64_t J = *problem.num_products;
    Trajectory tr;
    std::vector<ConsideredOption> considered{{0, env.u_0, -1}};
    for (std::int64_t j = 1; j <= J; ++j) {
        const int pos = j <= problem.s0_count ? 0 : static_cast<int>(j - problem.s0_count);
        considered.push_back({j, draws.x(j) + draws.y(j), pos});
    }
    tr.discovered_products = J;
    const ConsideredOption& buy = best_considered(considered);
    record(tr, record_steps,
           {ActionKind::buy, buy.id, buy.position, buy.u, std::nullopt, std::nullopt});
    tr.purchased = buy.id;
    tr.purchased_position = buy.position;
    tr.purchased_utility = buy.u;
    tr.payoff = buy.u;
    return tr;
}

}  // namespace

Trajectory simulate_consumer(const SearchEnvironment& env, const ReservationBundle& bundle,
                             const ConsumerProblem& problem, const DrawSource& draws,
                             bool record_steps) {
    env.validate();
    if (problem.s0_count < 0) throw config_error("simulate_consumer: s0_count must be >= 0");
    if (problem.num_products && problem.s0_count > *problem.num_products) {
        throw config_error("simulate_consumer: s0_count exceeds num_products");
    }
    switch (env.mode) {
        case Mode::SD: return simulate_sd(env, bundle, problem, draws, record_steps);
        case Mode::RS: return simulate_rs(env, bundle, problem, draws, record_steps);
        case Mode::DS1:
        case Mode::DS2: return simulate_ds(env, bundle, problem, draws, record_steps);
        case Mode::FI: return simulate_fi(env, problem, draws, record_steps);
    }
    throw config_error("simulate_consumer: unknown mode");
}

std::vector<ConsumerOutcome> simulate_population_outcomes(
    const SearchEnvironment& env, const ValuationModel& m, const ReservationBundle& bundle,
    const ConsumerProblem& problem, std::int64_t n, std::uint64_t seed, int threads) {
    std::vector<ConsumerOutcome> out(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
        ModelDraws draws(m, seed, static_cast<std::uint64_t>(i));
        const Trajectory tr = simulate_consumer(env, bundle, problem, draws, false);
        ConsumerOutcome& o = out[i];
        o.consumer = static_cast<std::int64_t>(i);
        o.purchased = tr.purchased;
        o.purchased_position = tr.purchased_position;
        o.inspections = tr.inspections;
        o.discoveries = tr.discoveries;
        o.total_cost = tr.total_cost;
        o.payoff = tr.payoff;
    });
    return out;
}

PopulationSummary simulate_population(const SearchEnvironment& env, const ValuationModel& m,
                                      const ReservationBundle& bundle,
                                      const ConsumerProblem& problem, std::int64_t n,
                                      std::uint64_t seed, int threads) {
    if (n <= 0) throw config_error("simulate_population: need n > 0");
    const auto outcomes =
        simulate_population_outcomes(env, m, bundle, problem, n, seed, threads);
    PopulationSummary s;
    s.consumers = n;
    std::vector<double> insp(outcomes.size()), disc(outcomes.size()), buy(outcomes.size()),
        pay(outcomes.size()), pay2(outcomes.size());
    int max_pos = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        insp[i] = static_cast<double>(outcomes[i].inspections);
        disc[i] = static_cast<double>(outcomes[i].discoveries);
        buy[i] = outcomes[i].purchased != 0 ? 1.0 : 0.0;
        pay[i] = outcomes[i].payoff;
        pay2[i] = outcomes[i].payoff * outcomes[i].payoff;
        max_pos = std::max(max_pos, outcomes[i].purchased_position);
    }
    const double dn = static_cast<double>(n);
    s.mean_inspections = pairwise_sum(insp) / dn;
    s.mean_discoveries = pairwise_sum(disc) / dn;
    s.purchase_share = pairwise_sum(buy) / dn;
    s.mean_payoff = pairwise_sum(pay) / dn;
    const double var = std::max(0.0, pairwise_sum(pay2) / dn - s.mean_payoff * s.mean_payoff);
    s.se_payoff = std::sqrt(var / dn);
    s.outside_share = 1.0 - s.purchase_share;
    s.demand_by_position.assign(static_cast<std::size_t>(max_pos) + 1, 0.0);
    for (const auto& o : outcomes) {
        if (o.purchased != 0) {
            s.demand_by_position[static_cast<std::size_t>(o.purchased_position)] += 1.0 / dn;
        }
    }
    return s;
}

}  // namespace sdsearch
