#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdsearch/common.hpp"
#include "sdsearch/distribution.hpp"

namespace sdsearch {

// Search process variants handled by the policy engine and the estimator.
//   SD  - sequential discovery (awareness grows in batches, inspection separate)
//   RS  - random search (discovery and inspection happen jointly at cost c_rs)
//   DS1 - directed search, all partial valuations known upfront, flat cost
//   DS2 - directed search with position-dependent inspection costs
//   FI  - full information benchmark (no costs, best option chosen outright)
enum class Mode : std::uint8_t { SD, RS, DS1, DS2, FI };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct SearchEnvironment {
    int n_d = 1;              // products revealed per discovery
    double c_s = 0.1;         // inspection cost
    double c_d = 0.1;         // discovery cost
    double u_0 = 0.0;         // utility of the outside option
    // Number of products; empty means unbounded.
    std::optional<std::int64_t> num_products = 1;
    double q = 0.0;           // per-period termination belief; retained but
                              // policy-inert (thresholds do not depend on it)
    Mode mode = Mode::SD;
    double ds_cost_slope = 0.0;  // per-position cost increment for DS2

    void validate() const {
        if (n_d < 1) throw config_error("environment: n_d must be >= 1");
        if (!(c_s > 0.0)) throw config_error("environment: c_s must be > 0");
        if (!(c_d > 0.0)) throw config_error("environment: c_d must be > 0");
        if (!(q >= 0.0 && q <= 1.0)) throw config_error("environment: q must lie in [0,1]");
        if (ds_cost_slope < 0.0) throw config_error("environment: ds_cost_slope must be >= 0");
        if (num_products && *num_products < 0) {
            throw config_error("environment: num_products must be >= 0");
        }
    }

    // Joint discovery+inspection cost used by the RS benchmark.
    double rs_cost() const { return c_s + c_d; }
};

// Solved threshold values for one (environment, valuation model) pair.
// Fields are filled only when the mode needs them; consumers must not read
// absent values (absence is explicit, never a numeric sentinel).
struct ReservationBundle {
    std::optional<double> xi;    // inspection threshold offset: z_s(j) = x_j + xi
    std::optional<double> Xi;    // discovery threshold offset:  z_d = mean(X) + Xi
    std::optional<double> z_d;   // discovery value
    std::optional<double> z_rs;  // joint-search reservation value
    // xi by position h = 0,1,2,...  (directed-search cost schedules)
    std::vector<double> xi_by_position;
    // position-dependent discovery values, when beliefs vary by position
    std::vector<double> z_d_by_position;
    // discovery values by batch size (entry s-1 holds the value of a
    // discovery that reveals exactly s products). Filled when a finite
    // product set can leave a final batch smaller than n_d; that last
    // discovery still costs the full c_d but reveals only what remains, so
    // its threshold is the one solved for the actual batch size.
    std::vector<double> z_d_by_batch_size;

    double require_xi() const { return require(xi, "xi"); }
    double require_z_d() const { return require(z_d, "z_d"); }
    double require_z_rs() const { return require(z_rs, "z_rs"); }

    // Discovery value for a batch revealing `size` products; size <= 0 or an
    // unsolved size falls back to the full-batch value.
    double z_d_for_batch(std::int64_t size) const {
        if (size >= 1 && static_cast<std::size_t>(size) <= z_d_by_batch_size.size()) {
            return z_d_by_batch_size[static_cast<std::size_t>(size - 1)];
        }
        return require_z_d();
    }

  private:
    static double require(const std::optional<double>& v, const char* name) {
        if (!v) throw model_error(std::string("reservation bundle: ") + name +
                                  " was not solved for this mode");
        return *v;
    }
};

}  // namespace sdsearch
