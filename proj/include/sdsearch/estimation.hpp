#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdsearch/distribution.hpp"
#include "sdsearch/environment.hpp"

namespace sdsearch {

// Data-generating process for the synthetic panel: consumers solve the SD
// problem over products whose utility is u_j = beta1 x1_j + beta2 x2_j + y_j,
// with the outside option carrying the third (dummy) characteristic and its
// own taste draw: u_0 = beta3 + y_0.
struct DgpConfig {
    std::int64_t num_consumers = 2000;
    std::int64_t num_products = 30;
    Distribution x1 = Distribution::normal(2.0, 9.0);
    Distribution x2 = Distribution::normal(3.5, 1.0);
    Distribution y = Distribution::normal(0.0, 1.0);
    double beta1 = 1.0;
    double beta2 = -1.0;
    double beta3 = 3.5;
    double c_s = 0.03;
    double c_d = 0.06;
    int s0_count = 1;  // products aware before any discovery (position 0)
    std::uint64_t seed = 1;

    void validate() const;
};

struct ConsumerRecord {
    std::vector<double> x1, x2;                // per product, position order
    std::vector<int> position;                 // 0 = initially aware
    std::vector<std::int64_t> inspected_rank;  // 0 = never inspected, else 1-based
    std::int64_t purchased = 0;                // 0 = outside, else product id
    std::int64_t num_inspected = 0;
    std::int64_t discoveries = 0;
    // Generator-side realizations, kept for audits and baseline replay; they
    // are not part of the observed panel and are excluded from the CSV export.
    std::vector<double> y_realized;
    double outside_y = 0.0;
};

struct PanelData {
    DgpConfig config;
    std::vector<ConsumerRecord> consumers;
    // Pooled empirical moments of the product characteristics (outside row
    // excluded); the fitted models build their partial-valuation belief from
    // these under candidate preference parameters.
    double mean_x1 = 0.0, mean_x2 = 0.0;
    double var_x1 = 0.0, var_x2 = 0.0, cov_x12 = 0.0;

    double xb_mean(double b1, double b2) const { return b1 * mean_x1 + b2 * mean_x2; }
    double xb_var(double b1, double b2) const {
        return b1 * b1 * var_x1 + b2 * b2 * var_x2 + 2.0 * b1 * b2 * cov_x12;
    }
};

PanelData simulate_panel(const DgpConfig& dgp, int threads = 1);

// Natural-space parameters of one fitted (or true) model. c_s carries the
// single cost of DS1 (inspection) and RS (joint reveal); c_d is used by SD
// (discovery) and DS2 (per-position cost slope).
struct ModelParams {
    Mode model = Mode::SD;
    double beta1 = 0.0, beta2 = 0.0, beta3 = 0.0;
    double c_s = 0.0;
    double c_d = 0.0;
};

struct EstimationConfig {
    Mode model = Mode::DS1;
    double lambda = 10.0;
    std::int64_t n_draws = 500;
    int restarts = 3;
    int max_iter = 2000;
    double simplex_tol = 1e-6;
    std::uint64_t seed = 7;
    int threads = 1;
};

struct EstimationResult {
    Mode model = Mode::DS1;
    std::vector<double> gamma;  // optimizer space: betas then log-costs
    ModelParams params;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    int restarts_used = 0;
    // Ratios to |beta2| as reported conventionally (price normalization).
    double ratio_beta1 = 0.0;
    double ratio_beta3 = 0.0;
    std::optional<double> ratio_cs;
    std::optional<double> ratio_cd;
};

// Optimizer-space layout per model: FI (b1,b2,b3); DS1/RS (+log c);
// DS2/SD (+log c_s, +log c_d).
std::size_t gamma_size(Mode model);
ModelParams params_from_gamma(Mode model, const std::vector<double>& gamma);
std::vector<double> gamma_from_params(const ModelParams& p);

// Inequality list (kappa values) for one consumer under one taste-shock draw
// y_draw (index 0 = outside, then products in position order). Nonnegative
// values mean the draw is consistent with the observed record.
std::vector<double> model_inequalities(const PanelData& panel, std::size_t consumer,
                                       const ModelParams& p,
                                       const std::vector<double>& y_draw);

// Kernel-smoothed simulated log-likelihood; bit-identical for fixed
// (panel, params, lambda, n_draws, seed) regardless of thread count.
double smoothed_likelihood(const PanelData& panel, const ModelParams& p, double lambda,
                           std::int64_t n_draws, std::uint64_t seed, int threads = 1);

EstimationResult estimate(const PanelData& panel, const EstimationConfig& cfg);

// Verifies that every simulated consumer's realized draws satisfy the SD
// purchase/stopping conditions at the true parameters.
struct ConditionAudit {
    std::int64_t consumers = 0;
    std::int64_t violations = 0;
    double min_kappa = 0.0;
};
ConditionAudit audit_sd_conditions(const PanelData& panel);

// Fitted-model simulation on the panel's characteristics: search statistics,
// consumer surplus, and position demand, averaged over paths_per_consumer
// fresh taste-shock paths.
struct SimStats {
    double mean_inspections = 0.0;
    double purchase_share = 0.0;
    double cs = 0.0;       // mean realized payoff net of search costs
    double d0 = 0.0;       // outside-option demand
    double d1 = 0.0;       // demand at discovery position 1
    double d5 = 0.0;       // demand at discovery position 5
};

struct ScenarioSpec {
    bool zero_costs = false;       // remove all search frictions
    double price_cut_pct_h5 = 0.0; // reduce x2 of the position-5 product by this %
};

SimStats simulate_fit(const PanelData& panel, const ModelParams& p,
                      std::int64_t paths_per_consumer, std::uint64_t seed,
                      const ScenarioSpec& scenario = {}, int threads = 1);

struct CounterfactualRow {
    Mode model = Mode::SD;
    SimStats baseline;
    SimStats scenario;
    double d_cs_pct = 0.0;
    double d_d0_pct = 0.0;
    double d_d1_pct = 0.0;
    double d_d5_pct = 0.0;
};

enum class Scenario : std::uint8_t { remove_costs, price_cut_h5 };

CounterfactualRow counterfactual(const PanelData& panel, const ModelParams& p,
                                 Scenario scenario, std::int64_t paths_per_consumer,
                                 std::uint64_t seed, int threads = 1);

}  // namespace sdsearch
