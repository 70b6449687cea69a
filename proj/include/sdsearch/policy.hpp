#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sdsearch/distribution.hpp"
#include "sdsearch/environment.hpp"
#include "sdsearch/rng.hpp"

namespace sdsearch {

// Lazy access to one consumer's realized valuations. Values are pure
// functions of the product index, so different search modes replayed on the
// same source consume identical realizations no matter how many products
// each mode ends up revealing, and unbounded product sets never materialize.
class DrawSource {
  public:
    virtual ~DrawSource() = default;
    virtual double x(std::int64_t j) const = 0;  // partial valuation, j >= 1
    virtual double y(std::int64_t j) const = 0;  // residual, j >= 1
};

// Inverse-CDF draws keyed by (seed, consumer, product, coordinate).
class ModelDraws : public DrawSource {
  public:
    ModelDraws(const ValuationModel& m, std::uint64_t seed, std::uint64_t consumer)
        : m_(m), stream_(seed, consumer) {}
    double x(std::int64_t j) const override {
        return m_.x.quantile(stream_.uniform_at(2 * static_cast<std::uint64_t>(j)));
    }
    double y(std::int64_t j) const override {
        return m_.y.quantile(stream_.uniform_at(2 * static_cast<std::uint64_t>(j) + 1));
    }

  private:
    ValuationModel m_;
    RandomStream stream_;
};

// Pre-supplied realizations (oracle enumeration, estimation panels).
class VectorDraws : public DrawSource {
  public:
    VectorDraws(std::vector<double> xs, std::vector<double> ys)
        : xs_(std::move(xs)), ys_(std::move(ys)) {}
    double x(std::int64_t j) const override { return xs_.at(static_cast<std::size_t>(j - 1)); }
    double y(std::int64_t j) const override { return ys_.at(static_cast<std::size_t>(j - 1)); }

  private:
    std::vector<double> xs_, ys_;
};

enum class ActionKind : std::uint8_t { buy, inspect, discover };

struct Step {
    ActionKind kind = ActionKind::buy;
    std::int64_t target = 0;     // product id (0 = outside) for buy/inspect
    int position = 0;            // discovery position of the target batch/product
    // index values compared at this step (absent when the action class was
    // unavailable)
    std::optional<double> best_buy_value;
    std::optional<double> best_inspect_value;
    std::optional<double> discover_value;
};

struct Trajectory {
    std::int64_t purchased = 0;       // 0 = outside option
    int purchased_position = -1;      // -1 for the outside option
    double purchased_utility = 0.0;
    std::int64_t inspections = 0;
    std::int64_t discoveries = 0;     // discovery events (batches) in SD, reveals in RS
    std::int64_t discovered_products = 0;
    double total_cost = 0.0;
    double payoff = 0.0;              // purchased utility minus accumulated costs
    std::vector<Step> steps;          // populated only when recording is on
};

// One consumer's problem: finite or unbounded product list, the first
// s0_count products pre-aware at position 0 (their partial valuations are
// known from the start).
struct ConsumerProblem {
    std::optional<std::int64_t> num_products;  // empty = unbounded
    int s0_count = 0;
};

Trajectory simulate_consumer(const SearchEnvironment& env, const ReservationBundle& bundle,
                             const ConsumerProblem& problem, const DrawSource& draws,
                             bool record_steps = false);

struct PopulationSummary {
    std::int64_t consumers = 0;
    double mean_inspections = 0.0;
    double mean_discoveries = 0.0;
    double purchase_share = 0.0;  // bought a product rather than the outside option
    double outside_share = 0.0;
    double mean_payoff = 0.0;
    double se_payoff = 0.0;
    std::vector<double> demand_by_position;  // index = discovery position h (h=0: pre-aware)
};

// Simulates consumers [0, n) from independent streams; results are identical
// for any thread count.
PopulationSummary simulate_population(const SearchEnvironment& env,
                                      const ValuationModel& m,
                                      const ReservationBundle& bundle,
                                      const ConsumerProblem& problem, std::int64_t n,
                                      std::uint64_t seed, int threads = 1);

// Per-consumer record used by the population CSV/JSONL writers.
struct ConsumerOutcome {
    std::int64_t consumer = 0;
    std::int64_t purchased = 0;
    int purchased_position = -1;
    std::int64_t inspections = 0;
    std::int64_t discoveries = 0;
    double total_cost = 0.0;
    double payoff = 0.0;
};

std::vector<ConsumerOutcome> simulate_population_outcomes(
    const SearchEnvironment& env, const ValuationModel& m, const ReservationBundle& bundle,
    const ConsumerProblem& problem, std::int64_t n, std::uint64_t seed, int threads = 1);

}  // namespace sdsearch
