#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "sdsearch/distribution.hpp"
#include "sdsearch/environment.hpp"
#include "sdsearch/policy.hpp"

namespace sdsearch {

// Strictly decreasing, non-negative position bonus attached to products that
// would stop the search on discovery. The ranking depends on such a bonus
// only ordinally (an earlier position always carries the larger bonus), so
// the key below encodes it as a lexicographic position comparison and every
// strictly decreasing f yields the identical purchase. The parameter is kept
// so callers can state which bonus they mean; 1/(1+h) is the fixed default.
using PositionBonus = std::function<double(int)>;
double default_position_bonus(int h);  // 1 / (1 + h)

// Ranking key for one option. Options sort by base value first; ties are
// broken by an infinitesimal component implemented as a lexicographic
// comparison (position ascending, then capped valuation descending, then id
// ascending), never as a small float added onto base.
struct EffectiveValue {
    double base = 0.0;
    double tie = 0.0;  // capped valuation, compared within equal base
    int position = 0;
    std::int64_t id = 0;

    bool operator<(const EffectiveValue& o) const {
        if (base != o.base) return base < o.base;
        if (position != o.position) return position > o.position;  // earlier wins
        if (tie != o.tie) return tie < o.tie;
        return id > o.id;  // lower id wins
    }
};

struct ProductView {
    std::int64_t id = 0;
    double x = 0.0;
    double y = 0.0;
    int position = 0;    // discovery position h (0 = initially aware)
    bool in_c0 = false;  // utility known from the start
    bool in_s0 = false;  // partial valuation known from the start
    // Products revealed by the discovery that produced this product; 0 means
    // a full batch (the default threshold applies). Only a final smaller
    // batch of a finite product set needs this set explicitly.
    int batch_size = 0;
};

// Ranking value of one option under the SD policy thresholds: the option with
// the highest effective value is the one the consumer eventually purchases.
EffectiveValue effective_value(const ProductView& p, const ReservationBundle& bundle,
                               const PositionBonus& f = default_position_bonus);

// Ranking value of the outside option (id 0, always purchasable).
EffectiveValue effective_outside_value(double u_0);

// The product (or outside option, id 0) an SD consumer facing exactly these
// realizations eventually purchases, computed without simulating the search.
std::int64_t eventual_purchase(const std::vector<ProductView>& products, double u_0,
                               const ReservationBundle& bundle,
                               const PositionBonus& f = default_position_bonus);

struct MonteCarloValue {
    double mean = 0.0;
    double se = 0.0;
    std::int64_t paths = 0;
};

// Expected payoff of the optimal SD policy via the eventual-purchase
// representation: E[max{u_0, max_j W_hat_j}] where W_hat is the effective
// value with the position bonus dropped. Unbounded product sets evaluate to
// max(u_0, z_d) exactly (se = 0).
MonteCarloValue expected_payoff(const SearchEnvironment& env, const ValuationModel& m,
                                const ReservationBundle& bundle, const ConsumerProblem& problem,
                                std::int64_t n_paths, std::uint64_t seed, int threads = 1);

// Expected payoff gap between sequential discovery and directed search with
// position costs c_h = c_s + h * c_d, on paired draws. c_d = 0 is allowed
// (the discovery cap disappears and both processes coincide in value).
MonteCarloValue payoff_diff_sd_ds(const SearchEnvironment& env, const ValuationModel& m,
                                  std::int64_t num_products, std::int64_t n_paths,
                                  std::uint64_t seed, int threads = 1);

struct WelfareThreshold {
    // Smallest n such that for every tested J > n the discovery-cost
    // reduction yields the strictly larger payoff; empty when the reduction
    // never wins by J = n_max.
    std::optional<int> n_star;
    bool monotone = true;  // once winning, keeps winning on the tested grid
    std::vector<double> diff_mean;  // indexed by J - 1
    std::vector<double> diff_se;
};

// Compares reducing c_s by delta against reducing c_d by delta across
// product-set sizes J = 1..n_max (paired draws throughout).
WelfareThreshold welfare_threshold_n_star(const SearchEnvironment& env,
                                          const ValuationModel& m, double delta, int n_max,
                                          std::int64_t n_paths, std::uint64_t seed,
                                          int threads = 1);

}  // namespace sdsearch
