#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "sdsearch/estimation.hpp"
#include "sdsearch/rng.hpp"

using namespace sdsearch;

namespace {

DgpConfig small_dgp(std::int64_t n, std::int64_t j, std::uint64_t seed) {
    DgpConfig dgp;
    dgp.num_consumers = n;
    dgp.num_products = j;
    dgp.seed = seed;
    return dgp;
}

ModelParams true_params(const DgpConfig& dgp, Mode mode) {
    ModelParams p;
    p.model = mode;
    p.beta1 = dgp.beta1;
    p.beta2 = dgp.beta2;
    p.beta3 = dgp.beta3;
    p.c_s = dgp.c_s;
    p.c_d = dgp.c_d;
    return p;
}

}  // namespace

TEST_CASE("panel simulation is deterministic and thread-invariant") {
    const auto dgp = small_dgp(50, 8, 21);
    const auto a = simulate_panel(dgp, 1);
    const auto b = simulate_panel(dgp, 3);
    REQUIRE(a.consumers.size() == 50);
    REQUIRE(b.consumers.size() == 50);
    for (std::size_t i = 0; i < a.consumers.size(); ++i) {
        CHECK(a.consumers[i].purchased == b.consumers[i].purchased);
        CHECK(a.consumers[i].num_inspected == b.consumers[i].num_inspected);
        CHECK(a.consumers[i].x1 == b.consumers[i].x1);
        CHECK(a.consumers[i].inspected_rank == b.consumers[i].inspected_rank);
    }
    CHECK(a.mean_x1 == b.mean_x1);
    CHECK(a.cov_x12 == b.cov_x12);

    auto other = dgp;
    other.seed = 22;
    const auto c = simulate_panel(other, 1);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.consumers.size() && !any_diff; ++i) {
        if (a.consumers[i].x1 != c.consumers[i].x1) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("panel records are internally consistent") {
    const auto dgp = small_dgp(120, 6, 77);
    const auto panel = simulate_panel(dgp);
    for (const auto& rec : panel.consumers) {
        REQUIRE(rec.x1.size() == 6);
        REQUIRE(rec.position.size() == 6);
        // One product is aware up front; the rest are numbered by discovery.
        CHECK(rec.position[0] == 0);
        for (std::size_t k = 1; k < 6; ++k) {
            CHECK(rec.position[k] == static_cast<int>(k));
        }
        CHECK(rec.purchased >= 0);
        CHECK(rec.purchased <= 6);
        if (rec.purchased != 0) {
            // Nothing can be bought without being inspected first.
            CHECK(rec.inspected_rank[static_cast<std::size_t>(rec.purchased - 1)] > 0);
        }
        std::int64_t n_ranked = 0;
        std::vector<bool> seen(static_cast<std::size_t>(rec.num_inspected) + 1, false);
        for (const auto r : rec.inspected_rank) {
            CHECK(r >= 0);
            CHECK(r <= rec.num_inspected);
            if (r > 0) {
                ++n_ranked;
                CHECK(!seen[static_cast<std::size_t>(r)]);  // ranks are distinct
                seen[static_cast<std::size_t>(r)] = true;
            }
        }
        CHECK(n_ranked == rec.num_inspected);
        CHECK(rec.discoveries <= 5);
        CHECK(rec.y_realized.size() == 6);
    }
}

TEST_CASE("every simulated record satisfies the model conditions at the truth") {
    const auto panel = simulate_panel(small_dgp(150, 10, 4));
    const auto audit = audit_sd_conditions(panel);
    CHECK(audit.consumers == 150);
    CHECK(audit.violations == 0);
    CHECK(audit.min_kappa >= -1e-9);
}

TEST_CASE("optimizer-space parameters round-trip through the natural space") {
    CHECK(gamma_size(Mode::FI) == 3);
    CHECK(gamma_size(Mode::DS1) == 4);
    CHECK(gamma_size(Mode::RS) == 4);
    CHECK(gamma_size(Mode::DS2) == 5);
    CHECK(gamma_size(Mode::SD) == 5);

    ModelParams p;
    p.model = Mode::SD;
    p.beta1 = 0.9;
    p.beta2 = -1.1;
    p.beta3 = 3.2;
    p.c_s = 0.03;
    p.c_d = 0.06;
    const auto g = gamma_from_params(p);
    REQUIRE(g.size() == 5);
    CHECK(g[3] == doctest::Approx(std::log(0.03)).epsilon(1e-12));
    const auto back = params_from_gamma(Mode::SD, g);
    CHECK(back.beta1 == 0.9);
    CHECK(back.c_s == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(back.c_d == doctest::Approx(0.06).epsilon(1e-12));

    CHECK_THROWS_AS(params_from_gamma(Mode::FI, g), config_error);
    p.model = Mode::DS1;
    p.c_s = 0.0;
    CHECK_THROWS_AS(gamma_from_params(p), config_error);
}

TEST_CASE("full-information inequalities rank the purchase against every option") {
    PanelData panel;
    panel.config.num_consumers = 1;
    panel.config.num_products = 2;
    ConsumerRecord rec;
    rec.x1 = {2.0, 1.0};
    rec.x2 = {0.0, 0.0};
    rec.position = {0, 1};
    rec.inspected_rank = {1, 2};
    rec.num_inspected = 2;
    rec.purchased = 1;
    panel.consumers.push_back(rec);

    ModelParams p;
    p.model = Mode::FI;
    p.beta1 = 1.0;
    p.beta2 = 0.0;
    p.beta3 = 0.0;
    const std::vector<double> y_draw = {0.1, 1.0, 0.3};  // outside, product 1, product 2
    const auto kappas = model_inequalities(panel, 0, p, y_draw);
    REQUIRE(kappas.size() == 2);  // beats the outside option and the rival
    CHECK(kappas[0] == doctest::Approx(2.9).epsilon(1e-12));
    CHECK(kappas[1] == doctest::Approx(1.7).epsilon(1e-12));
    for (const double k : kappas) CHECK(k >= 0.0);

    panel.consumers[0].purchased = 2;  // the dominated product: negative margin
    const auto bad = model_inequalities(panel, 0, p, y_draw);
    REQUIRE(bad.size() == 2);
    CHECK(bad[1] == doctest::Approx(-1.7).epsilon(1e-12));

    CHECK_THROWS_AS(model_inequalities(panel, 1, p, y_draw), config_error);
    CHECK_THROWS_AS(model_inequalities(panel, 0, p, {0.0, 0.0}), config_error);
}

TEST_CASE("a single zero margin smooths to a half probability") {
    // One consumer, one product, one draw: the purchase of the outside option
    // pits it against a single rival. The intercept is chosen so the margin
    // vanishes at exactly the taste shocks the cached draw will produce.
    const std::uint64_t seed = 5;
    const RandomStream rs(seed, 0);
    const double y0 = normal_quantile(rs.uniform_at(0));
    const double y1 = normal_quantile(rs.uniform_at(1));

    PanelData panel;
    panel.config.num_consumers = 1;
    panel.config.num_products = 1;
    ConsumerRecord rec;
    rec.x1 = {1.3};
    rec.x2 = {-0.4};
    rec.position = {0};
    rec.inspected_rank = {0};
    rec.num_inspected = 0;
    rec.purchased = 0;
    panel.consumers.push_back(rec);

    ModelParams p;
    p.model = Mode::FI;
    p.beta1 = 0.0;
    p.beta2 = 0.0;
    p.beta3 = y1 - y0;  // kappa = (beta3 + y0) - y1 = 0 at the cached draw

    const double ll = smoothed_likelihood(panel, p, 10.0, 1, seed);
    CHECK(ll == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    // The zero margin is a fixed point of the smoother at any sharpness.
    CHECK(smoothed_likelihood(panel, p, 200.0, 1, seed) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-10));
}

TEST_CASE("the smoothed likelihood is bit-identical across thread counts") {
    const auto panel = simulate_panel(small_dgp(40, 6, 9));
    const auto p = true_params(panel.config, Mode::SD);
    const double a = smoothed_likelihood(panel, p, 10.0, 120, 31, 1);
    const double b = smoothed_likelihood(panel, p, 10.0, 120, 31, 4);
    CHECK(a == b);
    CHECK(std::isfinite(a));
    CHECK(a < 0.0);
    CHECK_THROWS_AS(smoothed_likelihood(panel, p, 0.0, 10, 1), config_error);
    CHECK_THROWS_AS(smoothed_likelihood(panel, p, 10.0, 0, 1), config_error);
}

TEST_CASE("the true parameters dominate large perturbations in likelihood") {
    const auto panel = simulate_panel(small_dgp(300, 10, 42));
    const auto p = true_params(panel.config, Mode::SD);
    const double at_truth = smoothed_likelihood(panel, p, 10.0, 200, 13);

    // Preference perturbations scramble the recorded rankings and must lose.
    // Costs are left out: the validation conditions are one-sided, so cheaper
    // thresholds can only loosen them and carry no cost identification.
    auto b1_up = p;
    b1_up.beta1 *= 1.4;
    auto b2_down = p;
    b2_down.beta2 *= 0.6;
    auto b3_up = p;
    b3_up.beta3 += 1.0;
    CHECK(at_truth > smoothed_likelihood(panel, b1_up, 10.0, 200, 13));
    CHECK(at_truth > smoothed_likelihood(panel, b2_down, 10.0, 200, 13));
    CHECK(at_truth > smoothed_likelihood(panel, b3_up, 10.0, 200, 13));
}

TEST_CASE("a light estimation run is finite, deterministic, and well-shaped") {
    const auto panel = simulate_panel(small_dgp(50, 5, 11));
    EstimationConfig cfg;
    cfg.model = Mode::FI;
    cfg.n_draws = 60;
    cfg.restarts = 1;
    cfg.max_iter = 250;
    cfg.simplex_tol = 1e-4;
    cfg.seed = 3;
    const auto res = estimate(panel, cfg);
    CHECK(res.model == Mode::FI);
    REQUIRE(res.gamma.size() == 3);
    CHECK(std::isfinite(res.loglik));
    CHECK(res.iterations > 0);
    CHECK(!res.ratio_cs.has_value());
    CHECK(!res.ratio_cd.has_value());
    CHECK(res.ratio_beta1 == res.params.beta1 / std::abs(res.params.beta2));

    const auto again = estimate(panel, cfg);
    CHECK(again.gamma == res.gamma);
    CHECK(again.loglik == res.loglik);

    auto bad = cfg;
    bad.restarts = 0;
    CHECK_THROWS_AS(estimate(panel, bad), config_error);
}

TEST_CASE("fitted-model simulation conserves market shares") {
    const auto panel = simulate_panel(small_dgp(100, 8, 33));
    const auto p = true_params(panel.config, Mode::SD);
    const auto stats = simulate_fit(panel, p, 50, 17);
    CHECK(stats.purchase_share + stats.d0 == doctest::Approx(1.0).epsilon(1e-12));
    for (const double v : {stats.purchase_share, stats.d0, stats.d1, stats.d5}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK(stats.mean_inspections >= 0.0);
    CHECK(std::isfinite(stats.cs));

    const auto threaded = simulate_fit(panel, p, 50, 17, {}, 3);
    CHECK(threaded.cs == stats.cs);
    CHECK(threaded.d1 == stats.d1);
    CHECK_THROWS_AS(simulate_fit(panel, p, 0, 17), config_error);
}

TEST_CASE("removing costs is a no-op for the frictionless model and a gain otherwise") {
    const auto panel = simulate_panel(small_dgp(100, 8, 61));

    auto fi = true_params(panel.config, Mode::FI);
    const auto fi_row = counterfactual(panel, fi, Scenario::remove_costs, 40, 9);
    CHECK(fi_row.d_cs_pct == 0.0);
    CHECK(fi_row.d_d0_pct == 0.0);
    CHECK(fi_row.d_d1_pct == 0.0);
    CHECK(fi_row.d_d5_pct == 0.0);
    CHECK(fi_row.scenario.cs == fi_row.baseline.cs);
    CHECK(fi_row.scenario.d1 == fi_row.baseline.d1);
    CHECK(fi_row.scenario.mean_inspections == fi_row.baseline.mean_inspections);

    const auto sd = true_params(panel.config, Mode::SD);
    const auto sd_row = counterfactual(panel, sd, Scenario::remove_costs, 60, 9);
    // Same taste draws path by path: the frictionless payoff dominates.
    CHECK(sd_row.scenario.cs >= sd_row.baseline.cs);
    CHECK(sd_row.d_cs_pct > 0.0);
}
