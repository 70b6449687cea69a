#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sdsearch/distribution.hpp"
#include "sdsearch/environment.hpp"

namespace sdsearch {

// Myopic gain of inspecting a product with partial valuation x when the best
// fallback is z:  Q_s(x, c_s, z) = E[max{0, x + Y - z}] - c_s.
double q_s(const ValuationModel& m, double x, double c_s, double z);

// Inspection threshold offset: the xi solving E[max{0, Y - xi}] = c_s, so a
// product is worth inspecting against fallback z iff x + xi >= z. Root is
// bracketed inside the (numerically truncated) support of Y; a cost too large
// for the support is reported as a no-bracket solver_error, never clamped.
double solve_xi(const Distribution& y, double c_s);

// Gain of one more discovery against fallback z. H(w) = P(tilde_W <= w)^n_d
// is the CDF of the best of the n_d revealed products, tilde_W = X + min(Y, xi).
//
// q_d uses the single-integral reduction for n_d = 1 and the direct
// tail-integral of 1 - H otherwise; q_d_integral always evaluates the
// tail-integral form (kept as an independent cross-check route).
double q_d(const ValuationModel& m, double xi, int n_d, double c_s, double c_d, double z);
double q_d_integral(const ValuationModel& m, double xi, int n_d, double c_s, double c_d,
                    double z);

// Discovery value z_d: unique root of q_d(z) = 0.
double solve_discovery_value(const ValuationModel& m, const SearchEnvironment& env);

// Reservation value of a joint discovery+inspection search (random search):
// root z of E[max{0, X + Y - z}] = c_rs.
double solve_rs_reservation(const ValuationModel& m, double c_rs);

// Per-position inspection threshold offsets for directed search with cost
// schedule c_h = c_s + slope * h, for h in [h_first, h_last]. Failures are
// reported per position.
struct PositionXi {
    int h = 0;
    std::optional<double> xi;
    std::string error;
};
std::vector<PositionXi> ds_xi_by_position(const Distribution& y, double c_s, double slope,
                                          int h_first, int h_last);

// Discovery values when the partial-valuation belief varies with the
// discovery position. Beliefs must be ordered (earlier positions first-order
// stochastically dominate later ones on the region above z_d - xi); violations
// raise model_error (ordering-violation).
std::vector<double> position_dependent_discovery_values(
    const std::vector<ValuationModel>& models_by_position, const SearchEnvironment& env);

// Solves every threshold the given mode needs.
ReservationBundle compute_reservations(const ValuationModel& m, const SearchEnvironment& env);

}  // namespace sdsearch
