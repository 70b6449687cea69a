#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdsearch/distribution.hpp"
#include "sdsearch/environment.hpp"

namespace sdsearch {

struct DemandOptions {
    std::int64_t mc_paths = 200000;
    std::uint64_t seed = 1;
    int threads = 1;
};

// Probability that discovery stops before reaching position j (so the product
// that would appear there is never seen).
double stop_prob_sd(const ValuationModel& m, const ReservationBundle& bundle,
                    std::int64_t j);
double stop_prob_rs(const ValuationModel& m, double z_rs, std::int64_t j);

struct DemandPoint {
    double value = 0.0;
    double se = 0.0;  // zero when the number is analytic or exact
};

// Demand for the product discovered at position h in the SD model. Splits
// into the stop-at-h component (analytic) and the recall component where all
// products get discovered and the best capped value wins (exact enumeration
// for small discrete models, conditional Monte Carlo otherwise).
struct SdDemandProfile {
    double p_continue = 0.0;   // P(capped value below the discovery value)
    double recall_all = 0.0;   // P(no position ever stops the search)
    double rho = 0.0;          // P(a given position wins the recall argmax)
    double rho_se = 0.0;
    double outside = 0.0;      // total outside-option demand
    double outside_se = 0.0;
    bool exact = false;
    std::optional<std::int64_t> num_products;

    DemandPoint at(std::int64_t h) const;
};

SdDemandProfile sd_demand_profile(const ValuationModel& m, const SearchEnvironment& env,
                                  const ReservationBundle& bundle,
                                  const DemandOptions& opts = {});

DemandPoint demand_sd(const ValuationModel& m, const SearchEnvironment& env,
                      const ReservationBundle& bundle, std::int64_t h,
                      const DemandOptions& opts = {});

// Demand drop between adjacent positions, d(h) - d(h+1).
double ranking_effect_sd(const ValuationModel& m, const ReservationBundle& bundle,
                         std::int64_t h);
double ranking_effect_rs(const ValuationModel& m, double z_rs, std::int64_t h);

struct RankingThresholdReport {
    std::optional<std::int64_t> h_star;  // first h with r_SD(h) >= r_RS(h)
    double p_sd = 0.0;
    double p_rs = 0.0;
    double z_d = 0.0;
    double z_rs = 0.0;
    std::string note;
};

// Compares SD against random search at the matched cost c_rs = c_s + c_d and
// reports where the SD ranking effect overtakes the RS one.
RankingThresholdReport find_ranking_threshold(const ValuationModel& m,
                                              const SearchEnvironment& env);

struct DemandRow {
    std::int64_t h = 0;
    DemandPoint demand;
    std::optional<DemandPoint> ranking;  // absent where h+1 is out of range
};

struct DemandCurve {
    Mode mode = Mode::SD;
    std::optional<std::int64_t> num_products;
    std::string method;  // "analytic", "analytic+mc-recall", "exact", or "mc"
    std::vector<DemandRow> rows;
    double outside = 0.0;
    double outside_se = 0.0;
};

// Demand and ranking effects for positions 1..h_max under env.mode. SD and RS
// evaluate analytically (plus the SD recall component); DS and FI simulate.
DemandCurve demand_curve(const ValuationModel& m, const SearchEnvironment& env,
                         const ReservationBundle& bundle, std::int64_t h_max,
                         const DemandOptions& opts = {});

}  // namespace sdsearch
