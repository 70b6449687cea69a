#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdsearch/common.hpp"
#include "sdsearch/rng.hpp"

namespace sdsearch {

// Standard normal CDF / quantile used throughout (quantile is Wichura's
// AS 241 PPND16, |rel err| < 1e-15).
double normal_cdf(double z);
double normal_pdf(double z);
double normal_quantile(double p);

enum class Family : std::uint8_t { normal, uniform, exponential, discrete, point_mass };

// Scalar distribution with value semantics. normal is parameterized by
// (mean, variance); uniform by [lo, hi]; exponential by rate; discrete by
// (values, probs); point_mass by its location.
class Distribution {
  public:
    static Distribution normal(double mean, double var);
    static Distribution uniform(double lo, double hi);
    static Distribution exponential(double rate);
    static Distribution discrete(std::vector<double> values, std::vector<double> probs);
    static Distribution point_mass(double value);

    Family family() const { return family_; }
    bool is_discrete() const {
        return family_ == Family::discrete || family_ == Family::point_mass;
    }

    double mean() const;
    double variance() const;
    double stddev() const;

    double cdf(double x) const;
    double pdf(double x) const;  // density; error for discrete families
    double quantile(double p) const;

    // E[max{0, Y - t}] = integral_t^inf (1 - F(y)) dy, in closed form.
    double partial_expectation(double t) const;

    // Support bounds. For unbounded families the numeric support is truncated
    // at the tail_mass / (1 - tail_mass) quantiles; bounded families return
    // exact endpoints regardless of tail_mass.
    double support_lo(double tail_mass = 1e-10) const;
    double support_hi(double tail_mass = 1e-10) const;

    double sample(RandomStream& rs) const { return quantile(rs.next_uniform01()); }

    // Atoms of a discrete family (values ascending, probs matching).
    const std::vector<double>& values() const;
    const std::vector<double>& probs() const;

    double param_a() const { return a_; }
    double param_b() const { return b_; }

    std::string describe() const;

    bool operator==(const Distribution& other) const;

  private:
    Distribution() = default;
    Family family_ = Family::point_mass;
    double a_ = 0.0;  // mean / lo / rate / value
    double b_ = 0.0;  // var / hi
    std::vector<double> values_;
    std::vector<double> probs_;
};

// Pair of independent valuation components: X is the partial valuation
// revealed by discovery, Y the residual revealed by inspection. The
// dependence tag exists so operations that require independence can reject
// anything else explicitly instead of silently assuming it.
struct ValuationModel {
    Distribution x;
    Distribution y;
    bool independent = true;

    void require_independent(const std::string& op) const {
        if (!independent) {
            throw model_error(op + ": unsupported-dependence (operation requires "
                                   "independent X and Y)");
        }
    }
};

// P(X + min(Y, xi) <= w): CDF of the capped valuation of a single
// uninspected product. Exact summation when either component is discrete,
// adaptive quadrature otherwise.
double tilde_w_cdf(const ValuationModel& m, double xi, double w, double quad_tol = 1e-12);

// P(X + Y <= t) and E[max{0, X + Y - t}] for the joint valuation.
double sum_cdf(const ValuationModel& m, double t, double quad_tol = 1e-12);
double sum_partial_expectation(const ValuationModel& m, double t, double quad_tol = 1e-12);

}  // namespace sdsearch
