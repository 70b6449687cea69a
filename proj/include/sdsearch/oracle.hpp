#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdsearch/distribution.hpp"
#include "sdsearch/environment.hpp"
#include "sdsearch/outcomes.hpp"

namespace sdsearch {

// A fully discrete instance small enough for exact backward induction:
// every product's valuation pair is an independent draw from the shared
// discrete (x, y) distributions, products are discovered in index order in
// batches of n_d, and the first s0_count products are aware from the start.
struct DiscreteInstance {
    Distribution x_dist = Distribution::point_mass(0.0);
    Distribution y_dist = Distribution::point_mass(0.0);
    int num_products = 1;  // <= 4
    int n_d = 1;
    int s0_count = 0;
    double c_s = 0.1;
    double c_d = 0.1;
    double u_0 = 0.0;

    void validate() const;
    SearchEnvironment environment() const;
};

// Exact value of the optimal policy by backward induction over
// (discovered-prefix, inspected-set, revealed indices), memoized.
double dp_value(const DiscreteInstance& inst);

struct PolicyAudit {
    double dp = 0.0;            // optimal value
    double policy_value = 0.0;  // exact expected payoff of the threshold policy
    std::int64_t states_checked = 0;
    std::int64_t suboptimal_states = 0;  // reachable states where the policy action
                                         // is strictly worse than the DP optimum
};

// Compares the threshold policy against the DP optimum on every reachable
// state path, probability-weighted and exact.
PolicyAudit verify_policy_optimality(const DiscreteInstance& inst,
                                     const ReservationBundle& bundle);

struct PurchaseAudit {
    std::int64_t paths = 0;
    std::int64_t mismatches = 0;  // realized purchase not among the effective-value maxima
    double max_value_gap = 0.0;   // largest effective-value shortfall seen
    std::vector<double> purchase_prob;  // index 0 = outside, then product ids
};

// Enumerates every complete realization, replays the threshold policy on it,
// and checks that the purchased option attains the maximal effective value.
PurchaseAudit verify_eventual_purchase(const DiscreteInstance& inst,
                                       const ReservationBundle& bundle,
                                       const PositionBonus& f = default_position_bonus);

// Deterministic randomized corpus. Instances that fail threshold solving
// (no-bracket costs, degenerate supports) are rejected and redrawn.
std::vector<DiscreteInstance> generate_corpus(std::size_t count, std::uint64_t seed,
                                              int max_products = 3, int max_support = 3,
                                              int max_n_d = 2);

}  // namespace sdsearch
