#include <doctest.h>

#include <cmath>
#include <vector>

#include "sdsearch/outcomes.hpp"
#include "sdsearch/policy.hpp"
#include "sdsearch/reservation.hpp"

using namespace sdsearch;

namespace {

const ValuationModel kStdModel{Distribution::normal(0.0, 1.0),
                               Distribution::normal(0.0, 1.0), true};

SearchEnvironment sd_env(double c_s, double c_d, double u_0,
                         std::optional<std::int64_t> J, int n_d = 1) {
    SearchEnvironment env;
    env.mode = Mode::SD;
    env.c_s = c_s;
    env.c_d = c_d;
    env.u_0 = u_0;
    env.num_products = J;
    env.n_d = n_d;
    return env;
}

ProductView discovered(std::int64_t id, double x, double y, int position) {
    ProductView v;
    v.id = id;
    v.x = x;
    v.y = y;
    v.position = position;
    return v;
}

}  // namespace

TEST_CASE("effective value cases: known utility, aware, and discovered products") {
    const auto env = sd_env(0.1, 0.1, 0.0, std::nullopt);
    const auto bundle = compute_reservations(kStdModel, env);
    const double xi = *bundle.xi;
    const double zd = *bundle.z_d;

    ProductView c0;
    c0.id = 1;
    c0.x = zd + 1.0;  // utility far above the discovery value: no cap
    c0.y = 0.5;
    c0.in_c0 = true;
    CHECK(effective_value(c0, bundle).base == c0.x + c0.y);

    ProductView s0;
    s0.id = 2;
    s0.x = zd + 2.0;  // capped valuation above z_d, still uncapped for S_0
    s0.y = 5.0;
    s0.in_s0 = true;
    const auto ev_s0 = effective_value(s0, bundle);
    CHECK(ev_s0.base == doctest::Approx(s0.x + std::min(s0.y, xi)).epsilon(1e-14));
    CHECK(ev_s0.base > zd);

    const auto low = effective_value(discovered(3, zd - 3.0, 0.1, 1), bundle);
    CHECK(low.base == doctest::Approx(zd - 3.0 + std::min(0.1, xi)).epsilon(1e-14));

    const auto high = effective_value(discovered(4, zd + 1.0, 10.0, 2), bundle);
    CHECK(high.base == zd);  // stoppers rank exactly at the threshold
    CHECK(high.tie == doctest::Approx(zd + 1.0 + xi).epsilon(1e-14));

    const auto outside = effective_outside_value(0.25);
    CHECK(outside.base == 0.25);
    CHECK(outside.position == -1);
    CHECK(outside.id == 0);
}

TEST_CASE("ranking order: stoppers sort by position, then capped valuation") {
    const auto env = sd_env(0.1, 0.1, 0.0, std::nullopt);
    const auto bundle = compute_reservations(kStdModel, env);
    const double zd = *bundle.z_d;

    const auto early_small = effective_value(discovered(1, zd + 0.2, 9.0, 1), bundle);
    const auto late_large = effective_value(discovered(2, zd + 5.0, 9.0, 2), bundle);
    // The search never reaches position 2: the earlier stopper wins although
    // its uncapped valuation is far smaller.
    CHECK(late_large < early_small);

    const auto same_pos_hi = effective_value(discovered(3, zd + 1.0, 9.0, 1), bundle);
    CHECK(early_small < same_pos_hi);  // same batch: larger capped valuation wins

    // An aware product whose capped valuation exceeds z_d outranks every
    // discovered stopper; one whose capped valuation falls short loses to them.
    ProductView aware;
    aware.id = 4;
    aware.in_s0 = true;
    aware.x = zd + 0.5;
    aware.y = 9.0;
    CHECK(early_small < effective_value(aware, bundle));
    aware.x = zd - *bundle.xi - 0.5;  // capped valuation x + xi lands below z_d
    CHECK(effective_value(aware, bundle) < early_small);

    // Equal-base ties: earlier position wins; the outside option (position -1)
    // beats any product stopper at the same value.
    EffectiveValue outside = effective_outside_value(zd);
    CHECK(early_small < outside);
    CHECK(outside.position < early_small.position);

    // Identical keys except id: the lower id is the deterministic winner.
    const auto twin_a = effective_value(discovered(5, zd + 1.0, 9.0, 1), bundle);
    const auto twin_b = effective_value(discovered(6, zd + 1.0, 9.0, 1), bundle);
    CHECK(twin_b < twin_a);
}

TEST_CASE("purchase prediction is invariant to the position-bonus choice") {
    const auto env = sd_env(0.08, 0.05, 0.1, std::nullopt);
    const auto bundle = compute_reservations(kStdModel, env);
    const PositionBonus harmonic = default_position_bonus;
    const PositionBonus dyadic = [](int h) { return std::pow(2.0, -h); };
    RandomStream rs(77, 0);
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<ProductView> views;
        const int J = 1 + static_cast<int>(rs.next_u64() % 7);
        const int s0 = static_cast<int>(rs.next_u64() % 2);
        for (int j = 1; j <= J; ++j) {
            ProductView v;
            v.id = j;
            v.x = 2.5 * (rs.next_uniform01() - 0.3);
            v.y = 2.5 * (rs.next_uniform01() - 0.5);
            v.in_s0 = j <= s0;
            v.position = v.in_s0 ? 0 : j - s0;
            views.push_back(v);
        }
        CHECK(eventual_purchase(views, 0.1, bundle, harmonic) ==
              eventual_purchase(views, 0.1, bundle, dyadic));
    }
}

TEST_CASE("expected payoff: closed-form limits") {
    const auto bundle =
        compute_reservations(kStdModel, sd_env(0.1, 0.1, 0.0, std::nullopt));
    auto env = sd_env(0.1, 0.1, 0.3, std::nullopt);
    const auto unbounded = expected_payoff(env, kStdModel, bundle, {std::nullopt, 0}, 10, 1);
    CHECK(unbounded.mean == std::max(0.3, *bundle.z_d));
    CHECK(unbounded.se == 0.0);

    env = sd_env(0.1, 0.1, 0.45, 0);
    const auto empty = expected_payoff(env, kStdModel, bundle, {0, 0}, 10, 1);
    CHECK(empty.mean == 0.45);
    CHECK(empty.se == 0.0);
}

TEST_CASE("expected payoff matches the simulated policy, with and without batches") {
    struct Cfg {
        std::int64_t J;
        int s0;
        int n_d;
    };
    for (const Cfg cfg : {Cfg{6, 1, 1}, Cfg{5, 0, 2}, Cfg{7, 2, 3}}) {
        const auto env = sd_env(0.1, 0.08, 0.0, cfg.J, cfg.n_d);
        const auto bundle = compute_reservations(kStdModel, env);
        ConsumerProblem problem{cfg.J, cfg.s0};
        const std::int64_t paths = 40000;
        const auto repr = expected_payoff(env, kStdModel, bundle, problem, paths, 3);
        const auto sim = simulate_population(env, kStdModel, bundle, problem, paths, 4);
        const double se = std::hypot(repr.se, sim.se_payoff);
        CHECK(std::abs(repr.mean - sim.mean_payoff) < 3.0 * se);
    }
}

TEST_CASE("expected payoff is identical across thread counts") {
    const auto env = sd_env(0.1, 0.1, 0.0, 9);
    const auto bundle = compute_reservations(kStdModel, env);
    const auto a = expected_payoff(env, kStdModel, bundle, {9, 1}, 20000, 11, 1);
    const auto b = expected_payoff(env, kStdModel, bundle, {9, 1}, 20000, 11, 4);
    CHECK(a.mean == b.mean);
    CHECK(a.se == b.se);
}

TEST_CASE("payoff difference against directed search") {
    const auto env = sd_env(0.05, 0.05, 0.0, std::nullopt);
    // Zero discovery cost makes both processes identical on paired draws.
    auto env0 = env;
    env0.c_d = 0.0;
    const auto zero = payoff_diff_sd_ds(env0, kStdModel, 6, 5000, 2);
    CHECK(zero.mean == 0.0);
    CHECK(zero.se == 0.0);
    // Batch discoveries have no directed-search analogue.
    auto env2 = env;
    env2.n_d = 2;
    CHECK_THROWS_AS(payoff_diff_sd_ds(env2, kStdModel, 6, 100, 2), config_error);
    CHECK_THROWS_AS(payoff_diff_sd_ds(env, kStdModel, 0, 100, 2), config_error);
}

TEST_CASE("welfare comparison input guards") {
    const auto env = sd_env(0.1, 0.1, 0.0, std::nullopt);
    CHECK_THROWS_AS(welfare_threshold_n_star(env, kStdModel, 0.2, 4, 100, 1), config_error);
    CHECK_THROWS_AS(welfare_threshold_n_star(env, kStdModel, -0.01, 4, 100, 1),
                    config_error);
    auto env2 = env;
    env2.n_d = 2;
    CHECK_THROWS_AS(welfare_threshold_n_star(env2, kStdModel, 0.01, 4, 100, 1),
                    config_error);
}

TEST_CASE("welfare comparison produces paired curves with finite errors") {
    const auto env = sd_env(0.1, 0.1, 0.0, std::nullopt);
    const auto wt = welfare_threshold_n_star(env, kStdModel, 0.01, 5, 40000, 3);
    REQUIRE(wt.diff_mean.size() == 5);
    REQUIRE(wt.diff_se.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(std::isfinite(wt.diff_mean[i]));
        CHECK(wt.diff_se[i] > 0.0);
        CHECK(wt.diff_se[i] < 0.01);
    }
}
