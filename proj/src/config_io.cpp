#include "sdsearch/config_io.hpp"

#include <cstdio>
#include <set>

#include "sdsearch/common.hpp"

namespace sdsearch {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& context, const std::string& what) {
    throw config_error(context + ": " + what);
}

const json& get_key(const json& j, const std::string& context, const std::string& key) {
    const auto it = j.find(key);
    if (it == j.end()) fail(context, "missing required key '" + key + "'");
    return *it;
}

}  // namespace

void require_object(const json& j, const std::string& context) {
    if (!j.is_object()) fail(context, "expected a JSON object");
}

void require_keys(const json& j, const std::string& context,
                  const std::vector<std::string>& allowed) {
    require_object(j, context);
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (ok.count(key) == 0) fail(context, "unknown key '" + key + "'");
    }
}

double get_number(const json& j, const std::string& context, const std::string& key) {
    const json& v = get_key(j, context, key);
    if (!v.is_number()) fail(context + "." + key, "expected a number");
    return v.get<double>();
}

double get_number_or(const json& j, const std::string& context, const std::string& key,
                     double fallback) {
    if (!j.contains(key)) return fallback;
    return get_number(j, context, key);
}

std::int64_t get_int(const json& j, const std::string& context, const std::string& key) {
    const json& v = get_key(j, context, key);
    if (!v.is_number_integer()) fail(context + "." + key, "expected an integer");
    return v.get<std::int64_t>();
}

std::int64_t get_int_or(const json& j, const std::string& context, const std::string& key,
                        std::int64_t fallback) {
    if (!j.contains(key)) return fallback;
    return get_int(j, context, key);
}

bool get_bool_or(const json& j, const std::string& context, const std::string& key,
                 bool fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) fail(context + "." + key, "expected a boolean");
    return v.get<bool>();
}

std::string get_string(const json& j, const std::string& context, const std::string& key) {
    const json& v = get_key(j, context, key);
    if (!v.is_string()) fail(context + "." + key, "expected a string");
    return v.get<std::string>();
}

std::string get_string_or(const json& j, const std::string& context, const std::string& key,
                          const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    return get_string(j, context, key);
}

Distribution distribution_from_json(const json& j, const std::string& context) {
    require_object(j, context);
    const std::string family = get_string(j, context, "family");
    if (family == "normal") {
        require_keys(j, context, {"family", "mean", "var"});
        return Distribution::normal(get_number(j, context, "mean"),
                                    get_number(j, context, "var"));
    }
    if (family == "uniform") {
        require_keys(j, context, {"family", "lo", "hi"});
        return Distribution::uniform(get_number(j, context, "lo"),
                                     get_number(j, context, "hi"));
    }
    if (family == "exponential") {
        require_keys(j, context, {"family", "rate"});
        return Distribution::exponential(get_number(j, context, "rate"));
    }
    if (family == "discrete") {
        require_keys(j, context, {"family", "values", "probs"});
        const json& values = get_key(j, context, "values");
        const json& probs = get_key(j, context, "probs");
        if (!values.is_array() || !probs.is_array()) {
            fail(context, "'values' and 'probs' must be arrays");
        }
        std::vector<double> vs, ps;
        for (const auto& v : values) {
            if (!v.is_number()) fail(context + ".values", "expected numbers");
            vs.push_back(v.get<double>());
        }
        for (const auto& p : probs) {
            if (!p.is_number()) fail(context + ".probs", "expected numbers");
            ps.push_back(p.get<double>());
        }
        return Distribution::discrete(std::move(vs), std::move(ps));
    }
    if (family == "point_mass") {
        require_keys(j, context, {"family", "value"});
        return Distribution::point_mass(get_number(j, context, "value"));
    }
    fail(context, "unknown distribution family '" + family + "'");
}

json distribution_to_json(const Distribution& d) {
    json j;
    switch (d.family()) {
        case Family::normal:
            j["family"] = "normal";
            j["mean"] = d.param_a();
            j["var"] = d.param_b();
            break;
        case Family::uniform:
            j["family"] = "uniform";
            j["lo"] = d.param_a();
            j["hi"] = d.param_b();
            break;
        case Family::exponential:
            j["family"] = "exponential";
            j["rate"] = d.param_a();
            break;
        case Family::discrete:
            j["family"] = "discrete";
            j["values"] = d.values();
            j["probs"] = d.probs();
            break;
        case Family::point_mass:
            j["family"] = "point_mass";
            j["value"] = d.param_a();
            break;
    }
    return j;
}

ValuationModel valuation_model_from_json(const json& j, const std::string& context) {
    require_keys(j, context, {"x", "y"});
    return ValuationModel{distribution_from_json(get_key(j, context, "x"), context + ".x"),
                          distribution_from_json(get_key(j, context, "y"), context + ".y"),
                          true};
}

json valuation_model_to_json(const ValuationModel& m) {
    return json{{"x", distribution_to_json(m.x)}, {"y", distribution_to_json(m.y)}};
}

SearchEnvironment environment_from_json(const json& j, const std::string& context) {
    require_keys(j, context,
                 {"mode", "n_d", "c_s", "c_d", "u_0", "num_products", "q", "ds_cost_slope"});
    SearchEnvironment env;
    env.mode = mode_from_string(get_string_or(j, context, "mode", "SD"));
    env.n_d = static_cast<int>(get_int_or(j, context, "n_d", env.n_d));
    env.c_s = get_number_or(j, context, "c_s", env.c_s);
    env.c_d = get_number_or(j, context, "c_d", env.c_d);
    env.u_0 = get_number_or(j, context, "u_0", env.u_0);
    env.q = get_number_or(j, context, "q", env.q);
    env.ds_cost_slope = get_number_or(j, context, "ds_cost_slope", env.ds_cost_slope);
    if (j.contains("num_products")) {
        const json& np = j.at("num_products");
        if (np.is_null()) {
            env.num_products.reset();
        } else if (np.is_number_integer()) {
            env.num_products = np.get<std::int64_t>();
        } else {
            fail(context + ".num_products", "expected an integer or null (unbounded)");
        }
    }
    env.validate();
    return env;
}

json environment_to_json(const SearchEnvironment& env) {
    json j{{"mode", to_string(env.mode)}, {"n_d", env.n_d},         {"c_s", env.c_s},
           {"c_d", env.c_d},              {"u_0", env.u_0},         {"q", env.q},
           {"ds_cost_slope", env.ds_cost_slope}};
    if (env.num_products) {
        j["num_products"] = *env.num_products;
    } else {
        j["num_products"] = nullptr;
    }
    return j;
}

BeliefState belief_from_json(const json& j, const std::string& context) {
    require_keys(j, context, {"mu", "sigma2", "sampling_var", "observations"});
    BeliefState b;
    b.mu = get_number(j, context, "mu");
    b.sigma2 = get_number(j, context, "sigma2");
    b.sampling_var = get_number(j, context, "sampling_var");
    b.observations = get_int_or(j, context, "observations", 0);
    b.validate();
    return b;
}

json belief_to_json(const BeliefState& b) {
    return json{{"mu", b.mu},
                {"sigma2", b.sigma2},
                {"sampling_var", b.sampling_var},
                {"observations", b.observations}};
}

DgpConfig dgp_from_json(const json& j, std::uint64_t seed, const std::string& context) {
    require_keys(j, context,
                 {"num_consumers", "num_products", "x1", "x2", "y", "beta1", "beta2", "beta3",
                  "c_s", "c_d", "s0_count"});
    DgpConfig dgp;
    dgp.num_consumers = get_int_or(j, context, "num_consumers", dgp.num_consumers);
    dgp.num_products = get_int_or(j, context, "num_products", dgp.num_products);
    if (j.contains("x1")) dgp.x1 = distribution_from_json(j.at("x1"), context + ".x1");
    if (j.contains("x2")) dgp.x2 = distribution_from_json(j.at("x2"), context + ".x2");
    if (j.contains("y")) dgp.y = distribution_from_json(j.at("y"), context + ".y");
    dgp.beta1 = get_number_or(j, context, "beta1", dgp.beta1);
    dgp.beta2 = get_number_or(j, context, "beta2", dgp.beta2);
    dgp.beta3 = get_number_or(j, context, "beta3", dgp.beta3);
    dgp.c_s = get_number_or(j, context, "c_s", dgp.c_s);
    dgp.c_d = get_number_or(j, context, "c_d", dgp.c_d);
    dgp.s0_count = static_cast<int>(get_int_or(j, context, "s0_count", dgp.s0_count));
    dgp.seed = seed;
    dgp.validate();
    return dgp;
}

json dgp_to_json(const DgpConfig& dgp) {
    return json{{"num_consumers", dgp.num_consumers},
                {"num_products", dgp.num_products},
                {"x1", distribution_to_json(dgp.x1)},
                {"x2", distribution_to_json(dgp.x2)},
                {"y", distribution_to_json(dgp.y)},
                {"beta1", dgp.beta1},
                {"beta2", dgp.beta2},
                {"beta3", dgp.beta3},
                {"c_s", dgp.c_s},
                {"c_d", dgp.c_d},
                {"s0_count", dgp.s0_count}};
}

std::string csv_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void CsvBuilder::comment(const std::string& line) {
    if (header_written_) {
        throw config_error("csv: provenance comments must precede the header");
    }
    out_ += "# ";
    out_ += line;
    out_ += '\n';
}

void CsvBuilder::header(const std::vector<std::string>& cols) {
    if (header_written_) throw config_error("csv: duplicate header");
    if (cols.empty()) throw config_error("csv: empty header");
    cols_ = cols.size();
    header_written_ = true;
    append_line(cols);
}

void CsvBuilder::row(const std::vector<std::string>& cells) {
    if (!header_written_) throw config_error("csv: row before header");
    if (cells.size() != cols_) {
        throw config_error("csv: row width " + std::to_string(cells.size()) +
                           " does not match header width " + std::to_string(cols_));
    }
    append_line(cells);
}

void CsvBuilder::append_line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) out_ += ',';
        const std::string& c = cells[i];
        if (c.find_first_of(",\"\n") != std::string::npos) {
            out_ += '"';
            for (const char ch : c) {
                if (ch == '"') out_ += '"';
                out_ += ch;
            }
            out_ += '"';
        } else {
            out_ += c;
        }
    }
    out_ += '\n';
}

}  // namespace sdsearch
