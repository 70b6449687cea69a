#pragma once

#include <cstdint>
#include <optional>

#include "sdsearch/distribution.hpp"
#include "sdsearch/environment.hpp"

namespace sdsearch {

// Normal-mean learning: partial valuations are X ~ N(theta, s2) with unknown
// theta carrying a conjugate N(mu, sigma2) belief that updates after every
// discovery. The match distribution stays known.
struct BeliefState {
    double mu = 0.0;
    double sigma2 = 1.0;    // prior variance on theta (0 = dogmatic)
    double sampling_var = 1.0;  // s2, known variance of X around theta
    std::int64_t observations = 0;

    void validate() const;
    // Marginal distribution of the next partial valuation.
    Distribution predictive() const;
};

BeliefState posterior_update(const BeliefState& b, double x_observed);

// Discovery threshold when the consumer looks ahead k in {1, 2, 3} future
// discoveries, treating the k-th as the last ever available. Each extra step
// widens the exact dynamic program one level, so k is capped where the tree
// is still worth the cost. Requires n_d = 1.
double k_step_lookahead(const BeliefState& b, const Distribution& y,
                        const SearchEnvironment& env, int k);

// Discovery threshold of a consumer who will learn theta exactly after the
// next discovery: fixed point of
//   zbar = -c_d + E_x[ E_{theta|x}[ max{zbar, z_d(theta), x + min(y, xi)} ] ].
// Upper-bounds every finite-look-ahead threshold.
double full_info_upper_bound(const BeliefState& b, const Distribution& y,
                             const SearchEnvironment& env);

enum class BoundsVerdict : std::uint8_t { stop, continue_search, indeterminate };

struct BoundsDecision {
    double z_lower = 0.0;  // one-step look-ahead threshold (lower bound)
    double z_upper = 0.0;  // full-information threshold (upper bound)
    BoundsVerdict verdict = BoundsVerdict::indeterminate;
};

// Sandwiches the unknown optimal threshold: stop when the best value in hand
// clears z_upper, continue when it is below z_lower, otherwise indeterminate.
BoundsDecision bounds_decision(const BeliefState& b, const Distribution& y,
                               const SearchEnvironment& env, double best_in_hand);

}  // namespace sdsearch
