// sdsearch command-line interface.
//
// Every subcommand reads one JSON config, derives all randomness from the
// --seed flag via stable purpose labels, computes entirely in memory, and only
// then writes its artifacts, so a failing run never leaves partial output.
// Artifacts embed the resolved config and seed; reruns with the same config
// and seed are byte-identical regardless of --threads.
//
// Exit codes: 0 success, 2 invalid config, 3 solver failure, 4 corpus
// violation (1 for unexpected internal errors).

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdsearch/common.hpp"
#include "sdsearch/config_io.hpp"
#include "sdsearch/demand.hpp"
#include "sdsearch/environment.hpp"
#include "sdsearch/estimation.hpp"
#include "sdsearch/learning.hpp"
#include "sdsearch/oracle.hpp"
#include "sdsearch/outcomes.hpp"
#include "sdsearch/policy.hpp"
#include "sdsearch/reservation.hpp"
#include "sdsearch/rng.hpp"

namespace {

using nlohmann::json;
using namespace sdsearch;

struct CliOptions {
    std::string config_path;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    int threads = 1;
    std::string format = "csv";
};

// One named table; rows are JSON objects keyed by the header names so the
// same data serializes to CSV cells and to typed JSON results.
struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<json> rows;
};

struct CommandOutput {
    json resolved_config = json::object();
    std::vector<Table> tables;
    int exit_code = 0;
};

const std::vector<std::string> kTopLevelKeys = {
    "model",  "environment", "problem",    "simulate",       "payoff", "demand",
    "oracle", "learning",    "estimation", "counterfactual", "panel",  "tables"};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw config_error("config: parse error in '" + path + "': " + e.what());
    }
    require_keys(j, "config", kTopLevelKeys);
    return j;
}

const json& need_block(const json& cfg, const std::string& name) {
    if (!cfg.contains(name)) {
        throw config_error("config: command requires a '" + name + "' block");
    }
    return cfg.at(name);
}

std::string cell_text(const json& row, const std::string& key) {
    if (!row.contains(key)) return "";
    const json& v = row.at(key);
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_float()) return csv_num(v.get<double>());
    return v.dump();
}

void write_artifacts(const std::string& command, const CliOptions& opt,
                     const CommandOutput& out) {
    namespace fs = std::filesystem;
    fs::create_directories(opt.out_dir);
    const auto write_file = [&](const std::string& name, const std::string& content) {
        const fs::path path = fs::path(opt.out_dir) / name;
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open output file " + path.string());
        f << content;
        if (!f) throw std::runtime_error("failed writing " + path.string());
    };

    if (opt.format == "json") {
        json results = json::object();
        for (const Table& t : out.tables) results[t.name] = t.rows;
        const json doc{{"command", command},
                       {"schema", command + "-v1"},
                       {"seed", opt.seed},
                       {"config", out.resolved_config},
                       {"results", results}};
        write_file(command + ".json", doc.dump(2) + "\n");
        return;
    }
    for (const Table& t : out.tables) {
        CsvBuilder csv;
        csv.comment("command: " + command);
        csv.comment("schema: " + t.name + "-v1");
        csv.comment("seed: " + std::to_string(opt.seed));
        csv.comment("config: " + out.resolved_config.dump());
        csv.header(t.header);
        for (const json& row : t.rows) {
            std::vector<std::string> cells;
            cells.reserve(t.header.size());
            for (const std::string& key : t.header) cells.push_back(cell_text(row, key));
            csv.row(cells);
        }
        write_file(t.name + ".csv", csv.str());
    }
}

json bundle_to_json(const ReservationBundle& b) {
    json j = json::object();
    if (b.xi) j["xi"] = *b.xi;
    if (b.Xi) j["Xi"] = *b.Xi;
    if (b.z_d) j["z_d"] = *b.z_d;
    if (b.z_rs) j["z_rs"] = *b.z_rs;
    return j;
}

// ---------------------------------------------------------------- reservation

CommandOutput run_reservation(const json& cfg, const CliOptions& /*opt*/) {
    const ValuationModel m = valuation_model_from_json(need_block(cfg, "model"), "model");
    const SearchEnvironment env =
        environment_from_json(need_block(cfg, "environment"), "environment");
    const ReservationBundle bundle = compute_reservations(m, env);

    CommandOutput out;
    out.resolved_config = {{"model", valuation_model_to_json(m)},
                           {"environment", environment_to_json(env)}};
    Table t{"reservation",
            {"mode", "n_d", "c_s", "c_d", "xi", "Xi", "z_d", "z_rs"},
            {}};
    json row{{"mode", to_string(env.mode)}, {"n_d", env.n_d}, {"c_s", env.c_s},
             {"c_d", env.c_d}};
    row.update(bundle_to_json(bundle));
    t.rows.push_back(row);
    out.tables.push_back(std::move(t));

    if (!bundle.xi_by_position.empty()) {
        Table pt{"reservation_positions", {"h", "xi"}, {}};
        for (std::size_t h = 0; h < bundle.xi_by_position.size(); ++h) {
            pt.rows.push_back({{"h", static_cast<std::int64_t>(h)},
                               {"xi", bundle.xi_by_position[h]}});
        }
        out.tables.push_back(std::move(pt));
    }
    return out;
}

// ------------------------------------------------------------------- simulate

CommandOutput run_simulate(const json& cfg, const CliOptions& opt) {
    const ValuationModel m = valuation_model_from_json(need_block(cfg, "model"), "model");
    const SearchEnvironment env =
        environment_from_json(need_block(cfg, "environment"), "environment");
    json problem_block = cfg.contains("problem") ? cfg.at("problem") : json::object();
    require_keys(problem_block, "problem", {"s0_count"});
    ConsumerProblem problem;
    problem.num_products = env.num_products;
    problem.s0_count = static_cast<int>(get_int_or(problem_block, "problem", "s0_count", 0));

    const json& sim = need_block(cfg, "simulate");
    require_keys(sim, "simulate", {"consumers", "emit_outcomes"});
    const std::int64_t consumers = get_int(sim, "simulate", "consumers");
    const bool emit_outcomes = get_bool_or(sim, "simulate", "emit_outcomes", false);

    const ReservationBundle bundle = compute_reservations(m, env);
    const std::uint64_t sim_seed = derive_seed(opt.seed, "simulate");
    const PopulationSummary summary =
        simulate_population(env, m, bundle, problem, consumers, sim_seed, opt.threads);

    CommandOutput out;
    out.resolved_config = {{"model", valuation_model_to_json(m)},
                           {"environment", environment_to_json(env)},
                           {"problem", {{"s0_count", problem.s0_count}}},
                           {"simulate",
                            {{"consumers", consumers}, {"emit_outcomes", emit_outcomes}}}};

    Table t{"simulate",
            {"consumers", "mean_inspections", "mean_discoveries", "purchase_share",
             "outside_share", "mean_payoff", "se_payoff"},
            {}};
    t.rows.push_back({{"consumers", summary.consumers},
                      {"mean_inspections", summary.mean_inspections},
                      {"mean_discoveries", summary.mean_discoveries},
                      {"purchase_share", summary.purchase_share},
                      {"outside_share", summary.outside_share},
                      {"mean_payoff", summary.mean_payoff},
                      {"se_payoff", summary.se_payoff}});
    out.tables.push_back(std::move(t));

    Table pt{"simulate_positions", {"h", "share"}, {}};
    for (std::size_t h = 0; h < summary.demand_by_position.size(); ++h) {
        pt.rows.push_back(
            {{"h", static_cast<std::int64_t>(h)}, {"share", summary.demand_by_position[h]}});
    }
    out.tables.push_back(std::move(pt));

    if (emit_outcomes) {
        const auto outcomes = simulate_population_outcomes(env, m, bundle, problem, consumers,
                                                           sim_seed, opt.threads);
        Table ot{"simulate_outcomes",
                 {"consumer", "purchased", "position", "inspections", "discoveries",
                  "total_cost", "payoff"},
                 {}};
        for (const ConsumerOutcome& o : outcomes) {
            ot.rows.push_back({{"consumer", o.consumer},
                               {"purchased", o.purchased},
                               {"position", o.purchased_position},
                               {"inspections", o.inspections},
                               {"discoveries", o.discoveries},
                               {"total_cost", o.total_cost},
                               {"payoff", o.payoff}});
        }
        out.tables.push_back(std::move(ot));
    }
    return out;
}

// --------------------------------------------------------------- oracle-check

CommandOutput run_oracle_check(const json& cfg, const CliOptions& opt) {
    json block = cfg.contains("oracle") ? cfg.at("oracle") : json::object();
    require_keys(block, "oracle",
                 {"instances", "max_products", "max_support", "max_n_d", "value_tol"});
    const std::int64_t instances = get_int_or(block, "oracle", "instances", 200);
    const int max_products =
        static_cast<int>(get_int_or(block, "oracle", "max_products", 3));
    const int max_support = static_cast<int>(get_int_or(block, "oracle", "max_support", 3));
    const int max_n_d = static_cast<int>(get_int_or(block, "oracle", "max_n_d", 2));
    const double value_tol = get_number_or(block, "oracle", "value_tol", 1e-8);
    if (instances <= 0) throw config_error("oracle.instances: must be > 0");

    const auto corpus = generate_corpus(static_cast<std::size_t>(instances),
                                        derive_seed(opt.seed, "oracle"), max_products,
                                        max_support, max_n_d);

    CommandOutput out;
    out.resolved_config = {{"oracle",
                            {{"instances", instances},
                             {"max_products", max_products},
                             {"max_support", max_support},
                             {"max_n_d", max_n_d},
                             {"value_tol", value_tol}}}};

    Table t{"oracle_check",
            {"instance", "num_products", "n_d", "s0_count", "c_s", "c_d", "u_0", "dp_value",
             "policy_value", "gap", "suboptimal_states", "paths", "mismatches", "status"},
            {}};
    std::int64_t violations = 0;
    double max_gap = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const DiscreteInstance& inst = corpus[i];
        const ValuationModel m{inst.x_dist, inst.y_dist, true};
        const ReservationBundle bundle = compute_reservations(m, inst.environment());
        const PolicyAudit audit = verify_policy_optimality(inst, bundle);
        const PurchaseAudit purchase = verify_eventual_purchase(inst, bundle);
        const double gap = std::abs(audit.dp - audit.policy_value);
        max_gap = std::max(max_gap, gap);
        const bool bad =
            gap > value_tol || audit.suboptimal_states > 0 || purchase.mismatches > 0;
        if (bad) ++violations;
        t.rows.push_back({{"instance", static_cast<std::int64_t>(i)},
                          {"num_products", inst.num_products},
                          {"n_d", inst.n_d},
                          {"s0_count", inst.s0_count},
                          {"c_s", inst.c_s},
                          {"c_d", inst.c_d},
                          {"u_0", inst.u_0},
                          {"dp_value", audit.dp},
                          {"policy_value", audit.policy_value},
                          {"gap", gap},
                          {"suboptimal_states", audit.suboptimal_states},
                          {"paths", purchase.paths},
                          {"mismatches", purchase.mismatches},
                          {"status", bad ? "violation" : "ok"}});
    }
    out.tables.push_back(std::move(t));

    Table st{"oracle_summary", {"instances", "violations", "max_gap", "value_tol"}, {}};
    st.rows.push_back({{"instances", static_cast<std::int64_t>(corpus.size())},
                       {"violations", violations},
                       {"max_gap", max_gap},
                       {"value_tol", value_tol}});
    out.tables.push_back(std::move(st));
    out.exit_code = violations > 0 ? 4 : 0;
    return out;
}

// --------------------------------------------------------------------- payoff

CommandOutput run_payoff(const json& cfg, const CliOptions& opt) {
    const ValuationModel m = valuation_model_from_json(need_block(cfg, "model"), "model");
    const SearchEnvironment env =
        environment_from_json(need_block(cfg, "environment"), "environment");
    if (env.mode != Mode::SD) {
        throw config_error("payoff: environment.mode must be SD");
    }
    json problem_block = cfg.contains("problem") ? cfg.at("problem") : json::object();
    require_keys(problem_block, "problem", {"s0_count"});
    ConsumerProblem problem;
    problem.num_products = env.num_products;
    problem.s0_count = static_cast<int>(get_int_or(problem_block, "problem", "s0_count", 0));

    json block = cfg.contains("payoff") ? cfg.at("payoff") : json::object();
    require_keys(block, "payoff", {"paths", "sd_vs_ds", "welfare"});
    const std::int64_t paths = get_int_or(block, "payoff", "paths", 100000);
    if (paths <= 0) throw config_error("payoff.paths: must be > 0");

    const ReservationBundle bundle = compute_reservations(m, env);

    CommandOutput out;
    json resolved{{"model", valuation_model_to_json(m)},
                  {"environment", environment_to_json(env)},
                  {"problem", {{"s0_count", problem.s0_count}}},
                  {"payoff", {{"paths", paths}}}};

    Table t{"payoff", {"metric", "j", "mean", "se"}, {}};
    const PopulationSummary policy =
        simulate_population(env, m, bundle, problem, paths,
                            derive_seed(opt.seed, "payoff-policy"), opt.threads);
    t.rows.push_back({{"metric", "policy_mean_payoff"},
                      {"mean", policy.mean_payoff},
                      {"se", policy.se_payoff}});
    const MonteCarloValue repr =
        expected_payoff(env, m, bundle, problem, paths,
                        derive_seed(opt.seed, "payoff-representation"), opt.threads);
    t.rows.push_back(
        {{"metric", "eventual_purchase_value"}, {"mean", repr.mean}, {"se", repr.se}});

    if (block.contains("sd_vs_ds")) {
        const json& sub = block.at("sd_vs_ds");
        require_keys(sub, "payoff.sd_vs_ds", {"paths"});
        const std::int64_t cmp_paths = get_int_or(sub, "payoff.sd_vs_ds", "paths", paths);
        if (!env.num_products) {
            throw config_error("payoff.sd_vs_ds: environment.num_products must be finite");
        }
        const MonteCarloValue diff =
            payoff_diff_sd_ds(env, m, *env.num_products, cmp_paths,
                              derive_seed(opt.seed, "payoff-sd-ds"), opt.threads);
        t.rows.push_back({{"metric", "sd_minus_ds_payoff"}, {"mean", diff.mean}, {"se", diff.se}});
        resolved["payoff"]["sd_vs_ds"] = {{"paths", cmp_paths}};
    }

    if (block.contains("welfare")) {
        const json& sub = block.at("welfare");
        require_keys(sub, "payoff.welfare", {"delta", "n_max", "paths"});
        const double delta = get_number(sub, "payoff.welfare", "delta");
        const int n_max = static_cast<int>(get_int_or(sub, "payoff.welfare", "n_max", 8));
        const std::int64_t w_paths = get_int_or(sub, "payoff.welfare", "paths", paths);
        const WelfareThreshold wt =
            welfare_threshold_n_star(env, m, delta, n_max, w_paths,
                                     derive_seed(opt.seed, "payoff-welfare"), opt.threads);
        for (std::size_t i = 0; i < wt.diff_mean.size(); ++i) {
            t.rows.push_back({{"metric", "discovery_minus_inspection_cut"},
                              {"j", static_cast<std::int64_t>(i) + 1},
                              {"mean", wt.diff_mean[i]},
                              {"se", wt.diff_se[i]}});
        }
        json nstar = wt.n_star ? json(*wt.n_star) : json(nullptr);
        t.rows.push_back({{"metric", "welfare_threshold_n_star"},
                          {"j", nstar},
                          {"mean", wt.monotone ? 1.0 : 0.0},
                          {"se", 0.0}});
        resolved["payoff"]["welfare"] = {
            {"delta", delta}, {"n_max", n_max}, {"paths", w_paths}};
    }
    out.resolved_config = std::move(resolved);
    out.tables.push_back(std::move(t));
    return out;
}

// --------------------------------------------------------------------- demand

CommandOutput run_demand(const json& cfg, const CliOptions& opt) {
    const ValuationModel m = valuation_model_from_json(need_block(cfg, "model"), "model");
    const SearchEnvironment env =
        environment_from_json(need_block(cfg, "environment"), "environment");
    json block = cfg.contains("demand") ? cfg.at("demand") : json::object();
    require_keys(block, "demand", {"h_max", "mc_paths", "ranking_threshold"});
    const std::int64_t h_max = get_int_or(block, "demand", "h_max", 10);
    const std::int64_t mc_paths = get_int_or(block, "demand", "mc_paths", 200000);
    const bool want_threshold = get_bool_or(block, "demand", "ranking_threshold", false);

    const ReservationBundle bundle = compute_reservations(m, env);
    DemandOptions dopt;
    dopt.mc_paths = mc_paths;
    dopt.seed = derive_seed(opt.seed, "demand");
    dopt.threads = opt.threads;
    const DemandCurve curve = demand_curve(m, env, bundle, h_max, dopt);

    CommandOutput out;
    out.resolved_config = {{"model", valuation_model_to_json(m)},
                           {"environment", environment_to_json(env)},
                           {"demand",
                            {{"h_max", h_max},
                             {"mc_paths", mc_paths},
                             {"ranking_threshold", want_threshold}}}};

    Table t{"demand", {"h", "demand", "se", "ranking_effect", "ranking_se", "method"}, {}};
    for (const DemandRow& r : curve.rows) {
        json row{{"h", r.h},
                 {"demand", r.demand.value},
                 {"se", r.demand.se},
                 {"method", curve.method}};
        if (r.ranking) {
            row["ranking_effect"] = r.ranking->value;
            row["ranking_se"] = r.ranking->se;
        }
        t.rows.push_back(std::move(row));
    }
    out.tables.push_back(std::move(t));

    Table ot{"demand_outside", {"outside", "se"}, {}};
    ot.rows.push_back({{"outside", curve.outside}, {"se", curve.outside_se}});
    out.tables.push_back(std::move(ot));

    if (want_threshold) {
        if (env.mode != Mode::SD) {
            throw config_error("demand.ranking_threshold: requires environment.mode SD");
        }
        const RankingThresholdReport rep = find_ranking_threshold(m, env);
        Table tt{"demand_threshold", {"h_star", "p_sd", "p_rs", "z_d", "z_rs", "note"}, {}};
        tt.rows.push_back({{"h_star", rep.h_star ? json(*rep.h_star) : json(nullptr)},
                           {"p_sd", rep.p_sd},
                           {"p_rs", rep.p_rs},
                           {"z_d", rep.z_d},
                           {"z_rs", rep.z_rs},
                           {"note", rep.note}});
        out.tables.push_back(std::move(tt));
    }
    return out;
}

// --------------------------------------------------------------------- bounds

CommandOutput run_bounds(const json& cfg, const CliOptions& /*opt*/) {
    const SearchEnvironment env =
        environment_from_json(need_block(cfg, "environment"), "environment");
    const json& block = need_block(cfg, "learning");
    require_keys(block, "learning", {"belief", "y", "observe", "k", "best_in_hand"});
    BeliefState belief = belief_from_json(need_block(block, "belief"), "learning.belief");
    const Distribution y = distribution_from_json(need_block(block, "y"), "learning.y");
    const int k = static_cast<int>(get_int_or(block, "learning", "k", 2));
    std::vector<double> observe;
    if (block.contains("observe")) {
        const json& arr = block.at("observe");
        if (!arr.is_array()) throw config_error("learning.observe: expected an array");
        for (const auto& v : arr) {
            if (!v.is_number()) throw config_error("learning.observe: expected numbers");
            observe.push_back(v.get<double>());
        }
    }
    std::optional<double> best_in_hand;
    if (block.contains("best_in_hand")) {
        best_in_hand = get_number(block, "learning", "best_in_hand");
    }

    for (const double x : observe) belief = posterior_update(belief, x);

    CommandOutput out;
    json resolved{{"environment", environment_to_json(env)},
                  {"learning",
                   {{"belief", belief_to_json(belief)},
                    {"y", distribution_to_json(y)},
                    {"observe", observe},
                    {"k", k}}}};
    if (best_in_hand) resolved["learning"]["best_in_hand"] = *best_in_hand;
    out.resolved_config = std::move(resolved);

    Table t{"bounds", {"quantity", "value"}, {}};
    for (int kk = 1; kk <= k; ++kk) {
        t.rows.push_back({{"quantity", "z_lookahead_" + std::to_string(kk)},
                          {"value", k_step_lookahead(belief, y, env, kk)}});
    }
    t.rows.push_back({{"quantity", "z_upper"}, {"value", full_info_upper_bound(belief, y, env)}});
    if (best_in_hand) {
        const BoundsDecision d = bounds_decision(belief, y, env, *best_in_hand);
        t.rows.push_back({{"quantity", "best_in_hand"}, {"value", *best_in_hand}});
        const char* verdict = d.verdict == BoundsVerdict::stop ? "stop"
                              : d.verdict == BoundsVerdict::continue_search
                                  ? "continue"
                                  : "indeterminate";
        t.rows.push_back({{"quantity", "verdict"}, {"value", verdict}});
    }
    out.tables.push_back(std::move(t));
    return out;
}

// ---------------------------------------------------------- estimation shared

EstimationConfig estimation_config_from(const json& cfg, Mode model,
                                        const CliOptions& opt, json* resolved) {
    json block = cfg.contains("estimation") ? cfg.at("estimation") : json::object();
    require_keys(block, "estimation",
                 {"model", "lambda", "n_draws", "restarts", "max_iter", "simplex_tol"});
    EstimationConfig ec;
    ec.model = model;
    ec.lambda = get_number_or(block, "estimation", "lambda", 10.0);
    ec.n_draws = get_int_or(block, "estimation", "n_draws", 500);
    ec.restarts = static_cast<int>(get_int_or(block, "estimation", "restarts", 3));
    ec.max_iter = static_cast<int>(get_int_or(block, "estimation", "max_iter", 2000));
    ec.simplex_tol = get_number_or(block, "estimation", "simplex_tol", 1e-6);
    ec.seed = derive_seed(opt.seed, "estimate");
    ec.threads = opt.threads;
    if (resolved) {
        (*resolved)["estimation"] = {{"lambda", ec.lambda},
                                     {"n_draws", ec.n_draws},
                                     {"restarts", ec.restarts},
                                     {"max_iter", ec.max_iter},
                                     {"simplex_tol", ec.simplex_tol}};
    }
    return ec;
}

json params_to_json(const ModelParams& p) {
    return json{{"model", to_string(p.model)}, {"beta1", p.beta1}, {"beta2", p.beta2},
                {"beta3", p.beta3},            {"c_s", p.c_s},     {"c_d", p.c_d}};
}

ModelParams true_sd_params(const DgpConfig& dgp) {
    ModelParams p;
    p.model = Mode::SD;
    p.beta1 = dgp.beta1;
    p.beta2 = dgp.beta2;
    p.beta3 = dgp.beta3;
    p.c_s = dgp.c_s;
    p.c_d = dgp.c_d;
    return p;
}

json estimate_row(const EstimationResult& res) {
    json row{{"model", to_string(res.model)},
             {"loglik", res.loglik},
             {"converged", res.converged},
             {"iterations", res.iterations},
             {"beta1", res.params.beta1},
             {"beta2", res.params.beta2},
             {"beta3", res.params.beta3},
             {"beta1_ratio", res.ratio_beta1},
             {"beta3_ratio", res.ratio_beta3}};
    if (gamma_size(res.model) >= 4) {
        row["c_s"] = res.params.c_s;
        row["cs_ratio"] = *res.ratio_cs;
    }
    if (gamma_size(res.model) >= 5) {
        row["c_d"] = res.params.c_d;
        row["cd_ratio"] = *res.ratio_cd;
    }
    return row;
}

Table panel_table(const PanelData& panel) {
    Table t{"panel",
            {"consumer_id", "product_id", "position", "x1", "x2", "outside_dummy",
             "inspected_rank", "purchased"},
            {}};
    for (std::size_t i = 0; i < panel.consumers.size(); ++i) {
        const ConsumerRecord& rec = panel.consumers[i];
        t.rows.push_back({{"consumer_id", static_cast<std::int64_t>(i)},
                          {"product_id", 0},
                          {"position", -1},
                          {"x1", 0.0},
                          {"x2", 0.0},
                          {"outside_dummy", 1},
                          {"inspected_rank", 0},
                          {"purchased", rec.purchased == 0 ? 1 : 0}});
        for (std::size_t k = 0; k < rec.x1.size(); ++k) {
            t.rows.push_back(
                {{"consumer_id", static_cast<std::int64_t>(i)},
                 {"product_id", static_cast<std::int64_t>(k) + 1},
                 {"position", rec.position[k]},
                 {"x1", rec.x1[k]},
                 {"x2", rec.x2[k]},
                 {"outside_dummy", 0},
                 {"inspected_rank", rec.inspected_rank[k]},
                 {"purchased", rec.purchased == static_cast<std::int64_t>(k) + 1 ? 1 : 0}});
        }
    }
    return t;
}

// ------------------------------------------------------------------- estimate

CommandOutput run_estimate(const json& cfg, const CliOptions& opt) {
    const DgpConfig dgp =
        dgp_from_json(need_block(cfg, "panel"), derive_seed(opt.seed, "panel"), "panel");
    const json est_block = cfg.contains("estimation") ? cfg.at("estimation") : json::object();
    const Mode model = mode_from_string(get_string_or(est_block, "estimation", "model", "DS1"));

    CommandOutput out;
    out.resolved_config["panel"] = dgp_to_json(dgp);
    const EstimationConfig ec =
        estimation_config_from(cfg, model, opt, &out.resolved_config);
    out.resolved_config["estimation"]["model"] = to_string(model);

    const PanelData panel = simulate_panel(dgp, opt.threads);
    const EstimationResult res = estimate(panel, ec);

    Table t{"estimate",
            {"model", "loglik", "converged", "iterations", "beta1", "beta2", "beta3", "c_s",
             "c_d", "beta1_ratio", "beta3_ratio", "cs_ratio", "cd_ratio"},
            {}};
    t.rows.push_back(estimate_row(res));
    out.tables.push_back(std::move(t));
    out.tables.push_back(panel_table(panel));
    return out;
}

// ------------------------------------------------------------- counterfactual

CommandOutput run_counterfactual(const json& cfg, const CliOptions& opt) {
    const DgpConfig dgp =
        dgp_from_json(need_block(cfg, "panel"), derive_seed(opt.seed, "panel"), "panel");
    json block = cfg.contains("counterfactual") ? cfg.at("counterfactual") : json::object();
    require_keys(block, "counterfactual", {"model", "scenario", "paths_per_consumer"});
    const Mode model =
        mode_from_string(get_string_or(block, "counterfactual", "model", "SD"));
    const std::string scenario_name =
        get_string_or(block, "counterfactual", "scenario", "remove-costs");
    Scenario scenario;
    if (scenario_name == "remove-costs") {
        scenario = Scenario::remove_costs;
    } else if (scenario_name == "price-cut") {
        scenario = Scenario::price_cut_h5;
    } else {
        throw config_error("counterfactual.scenario: expected 'remove-costs' or 'price-cut'");
    }
    const std::int64_t paths =
        get_int_or(block, "counterfactual", "paths_per_consumer", 5000);
    if (paths <= 0) throw config_error("counterfactual.paths_per_consumer: must be > 0");

    CommandOutput out;
    out.resolved_config["panel"] = dgp_to_json(dgp);
    out.resolved_config["counterfactual"] = {{"model", to_string(model)},
                                             {"scenario", scenario_name},
                                             {"paths_per_consumer", paths}};

    const PanelData panel = simulate_panel(dgp, opt.threads);
    ModelParams params;
    if (model == Mode::SD) {
        params = true_sd_params(dgp);
    } else {
        const EstimationConfig ec =
            estimation_config_from(cfg, model, opt, &out.resolved_config);
        params = estimate(panel, ec).params;
    }
    const CounterfactualRow row = counterfactual(panel, params, scenario, paths,
                                                 derive_seed(opt.seed, "counterfactual"),
                                                 opt.threads);

    Table t{"counterfactual",
            {"model", "scenario", "baseline_cs", "baseline_d0", "baseline_d1", "baseline_d5",
             "scenario_cs", "scenario_d0", "scenario_d1", "scenario_d5", "d_cs_pct",
             "d_d0_pct", "d_d1_pct", "d_d5_pct"},
            {}};
    t.rows.push_back({{"model", to_string(row.model)},
                      {"scenario", scenario_name},
                      {"baseline_cs", row.baseline.cs},
                      {"baseline_d0", row.baseline.d0},
                      {"baseline_d1", row.baseline.d1},
                      {"baseline_d5", row.baseline.d5},
                      {"scenario_cs", row.scenario.cs},
                      {"scenario_d0", row.scenario.d0},
                      {"scenario_d1", row.scenario.d1},
                      {"scenario_d5", row.scenario.d5},
                      {"d_cs_pct", row.d_cs_pct},
                      {"d_d0_pct", row.d_d0_pct},
                      {"d_d1_pct", row.d_d1_pct},
                      {"d_d5_pct", row.d_d5_pct}});
    out.tables.push_back(std::move(t));
    out.resolved_config["counterfactual"]["params"] = params_to_json(params);
    return out;
}

// ----------------------------------------------------------- replicate-tables

CommandOutput run_replicate_tables(const json& cfg, const CliOptions& opt) {
    const DgpConfig dgp =
        dgp_from_json(need_block(cfg, "panel"), derive_seed(opt.seed, "panel"), "panel");
    json block = cfg.contains("tables") ? cfg.at("tables") : json::object();
    require_keys(block, "tables", {"models", "paths_per_consumer"});
    std::vector<Mode> models{Mode::SD, Mode::DS1, Mode::DS2, Mode::RS, Mode::FI};
    if (block.contains("models")) {
        models.clear();
        const json& arr = block.at("models");
        if (!arr.is_array()) throw config_error("tables.models: expected an array");
        for (const auto& v : arr) {
            if (!v.is_string()) throw config_error("tables.models: expected mode strings");
            models.push_back(mode_from_string(v.get<std::string>()));
        }
    }
    const std::int64_t paths = get_int_or(block, "tables", "paths_per_consumer", 5000);
    if (paths <= 0) throw config_error("tables.paths_per_consumer: must be > 0");

    CommandOutput out;
    out.resolved_config["panel"] = dgp_to_json(dgp);
    {
        json names = json::array();
        for (const Mode m : models) names.push_back(to_string(m));
        out.resolved_config["tables"] = {{"models", names}, {"paths_per_consumer", paths}};
    }

    const PanelData panel = simulate_panel(dgp, opt.threads);
    const std::uint64_t fit_sim_seed = derive_seed(opt.seed, "tables-sim");
    const std::uint64_t cf_seed = derive_seed(opt.seed, "tables-cf");

    Table t2{"table2",
             {"model", "searches", "purchase_share_pct", "beta1_ratio", "beta3_ratio",
              "cs_ratio", "cd_ratio", "loglik", "converged"},
             {}};
    std::map<std::string, ModelParams> fitted;
    for (const Mode model : models) {
        json row{{"model", to_string(model)}};
        if (model == Mode::SD) {
            const ModelParams p = true_sd_params(dgp);
            fitted[to_string(model)] = p;
            double searches = 0.0, buys = 0.0;
            for (const ConsumerRecord& rec : panel.consumers) {
                searches += static_cast<double>(rec.num_inspected);
                buys += rec.purchased != 0 ? 1.0 : 0.0;
            }
            const double n = static_cast<double>(panel.consumers.size());
            row["searches"] = searches / n;
            row["purchase_share_pct"] = 100.0 * buys / n;
            const double denom = std::abs(p.beta2);
            row["beta1_ratio"] = p.beta1 / denom;
            row["beta3_ratio"] = p.beta3 / denom;
            row["cs_ratio"] = p.c_s / denom;
            row["cd_ratio"] = p.c_d / denom;
        } else {
            const EstimationConfig ec = estimation_config_from(cfg, model, opt,
                                                               &out.resolved_config);
            const EstimationResult res = estimate(panel, ec);
            fitted[to_string(model)] = res.params;
            row.update(estimate_row(res));
            const SimStats stats =
                simulate_fit(panel, res.params, paths, fit_sim_seed, {}, opt.threads);
            if (model != Mode::FI) row["searches"] = stats.mean_inspections;
            row["purchase_share_pct"] = 100.0 * stats.purchase_share;
            row.erase("beta1");
            row.erase("beta2");
            row.erase("beta3");
            row.erase("c_s");
            row.erase("c_d");
            row.erase("iterations");
        }
        t2.rows.push_back(std::move(row));
    }
    out.tables.push_back(std::move(t2));

    Table t3{"table3",
             {"model", "scenario", "d_cs_pct", "d_d0_pct", "d_d1_pct", "d_d5_pct"},
             {}};
    const std::vector<std::pair<Scenario, std::string>> scenarios{
        {Scenario::remove_costs, "remove-costs"}, {Scenario::price_cut_h5, "price-cut"}};
    for (const Mode model : models) {
        const ModelParams& p = fitted.at(to_string(model));
        for (const auto& [scenario, name] : scenarios) {
            const CounterfactualRow row =
                counterfactual(panel, p, scenario, paths, cf_seed, opt.threads);
            t3.rows.push_back({{"model", to_string(model)},
                               {"scenario", name},
                               {"d_cs_pct", row.d_cs_pct},
                               {"d_d0_pct", row.d_d0_pct},
                               {"d_d1_pct", row.d_d1_pct},
                               {"d_d5_pct", row.d_d5_pct}});
        }
    }
    out.tables.push_back(std::move(t3));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sdsearch: sequential search-and-discovery toolkit"};
    app.fallthrough();
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "Path to the JSON config")->required();
    app.add_option("--seed", opt.seed, "Top-level seed; all randomness derives from it");
    app.add_option("--out", opt.out_dir, "Output directory (created if missing)");
    app.add_option("--threads", opt.threads, "Worker threads (results are thread-invariant)")
        ->check(CLI::PositiveNumber);
    app.add_option("--format", opt.format, "Artifact format")
        ->check(CLI::IsMember({"csv", "json"}));

    const std::vector<std::pair<std::string, std::string>> commands{
        {"reservation", "Solve inspection/discovery thresholds for one environment"},
        {"simulate", "Simulate a consumer population under the configured search mode"},
        {"oracle-check", "Verify the threshold policy against exact dynamic programming"},
        {"payoff", "Expected-payoff identities and process comparisons"},
        {"demand", "Position demand curves and ranking effects"},
        {"bounds", "Threshold bounds under partial-valuation learning"},
        {"estimate", "Simulate a panel and fit one search model to it"},
        {"counterfactual", "Baseline-vs-scenario simulation for one model"},
        {"replicate-tables", "Panel summary, fits, and counterfactual tables"}};
    for (const auto& [name, desc] : commands) app.add_subcommand(name, desc);

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        const json cfg = load_config(opt.config_path);
        CommandOutput out;
        if (command == "reservation") {
            out = run_reservation(cfg, opt);
        } else if (command == "simulate") {
            out = run_simulate(cfg, opt);
        } else if (command == "oracle-check") {
            out = run_oracle_check(cfg, opt);
        } else if (command == "payoff") {
            out = run_payoff(cfg, opt);
        } else if (command == "demand") {
            out = run_demand(cfg, opt);
        } else if (command == "bounds") {
            out = run_bounds(cfg, opt);
        } else if (command == "estimate") {
            out = run_estimate(cfg, opt);
        } else if (command == "counterfactual") {
            out = run_counterfactual(cfg, opt);
        } else if (command == "replicate-tables") {
            out = run_replicate_tables(cfg, opt);
        } else {
            throw config_error("unknown command: " + command);
        }
        write_artifacts(command, opt, out);
        if (out.exit_code == 4) {
            std::cerr << command << ": corpus violation (see artifacts in " << opt.out_dir
                      << ")\n";
        }
        return out.exit_code;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const solver_error& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const model_error& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
