#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdsearch/distribution.hpp"
#include "sdsearch/environment.hpp"
#include "sdsearch/estimation.hpp"
#include "sdsearch/learning.hpp"

namespace sdsearch {

// JSON <-> domain types. Parsers validate strictly: wrong types and unknown
// keys raise config_error, so a typo can never silently fall back to a
// default. The `context` string prefixes every error ("environment.c_s: ...").

// Strict access helpers shared by all blocks.
void require_object(const nlohmann::json& j, const std::string& context);
void require_keys(const nlohmann::json& j, const std::string& context,
                  const std::vector<std::string>& allowed);
double get_number(const nlohmann::json& j, const std::string& context,
                  const std::string& key);
double get_number_or(const nlohmann::json& j, const std::string& context,
                     const std::string& key, double fallback);
std::int64_t get_int(const nlohmann::json& j, const std::string& context,
                     const std::string& key);
std::int64_t get_int_or(const nlohmann::json& j, const std::string& context,
                        const std::string& key, std::int64_t fallback);
bool get_bool_or(const nlohmann::json& j, const std::string& context, const std::string& key,
                 bool fallback);
std::string get_string(const nlohmann::json& j, const std::string& context,
                       const std::string& key);
std::string get_string_or(const nlohmann::json& j, const std::string& context,
                          const std::string& key, const std::string& fallback);

// Distribution literal: {"family": "normal", "mean": .., "var": ..},
// {"family": "uniform", "lo": .., "hi": ..}, {"family": "exponential",
// "rate": ..}, {"family": "discrete", "values": [..], "probs": [..]},
// {"family": "point_mass", "value": ..}.
Distribution distribution_from_json(const nlohmann::json& j, const std::string& context);
nlohmann::json distribution_to_json(const Distribution& d);

// {"x": <distribution>, "y": <distribution>}
ValuationModel valuation_model_from_json(const nlohmann::json& j,
                                         const std::string& context);
nlohmann::json valuation_model_to_json(const ValuationModel& m);

// {"mode": "SD", "n_d": 1, "c_s": .., "c_d": .., "u_0": 0, "num_products":
// 30 | null, "q": 0, "ds_cost_slope": 0}; num_products null means unbounded.
SearchEnvironment environment_from_json(const nlohmann::json& j,
                                        const std::string& context);
nlohmann::json environment_to_json(const SearchEnvironment& env);

// {"mu": .., "sigma2": .., "sampling_var": .., "observations": 0}
BeliefState belief_from_json(const nlohmann::json& j, const std::string& context);
nlohmann::json belief_to_json(const BeliefState& b);

// Panel data-generating process; the seed comes from the command line, not
// the config block.
DgpConfig dgp_from_json(const nlohmann::json& j, std::uint64_t seed,
                        const std::string& context);
nlohmann::json dgp_to_json(const DgpConfig& dgp);

// Fixed CSV cell format for real numbers: "%.12g" in the C locale.
std::string csv_num(double v);

// In-memory CSV artifact: leading '#' provenance comments, one header row,
// then data rows, each validated against the header width. Nothing touches
// the filesystem until the command has fully succeeded.
class CsvBuilder {
  public:
    void comment(const std::string& line);
    void header(const std::vector<std::string>& cols);
    void row(const std::vector<std::string>& cells);
    const std::string& str() const { return out_; }

  private:
    void append_line(const std::vector<std::string>& cells);
    std::string out_;
    std::size_t cols_ = 0;
    bool header_written_ = false;
};

}  // namespace sdsearch
