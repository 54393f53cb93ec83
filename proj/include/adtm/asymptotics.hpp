#pragma once

#include <memory>
#include <stdexcept>

#include "adtm/functional.hpp"

// The explicit analytic constructions of the blow-up analysis: Moser
// sequences, the limiting bubble w, the Green-type function g_eta with its
// additive constant, the Carleson-Chang threshold and the glued test function
// that beats it.

namespace adtm {

struct GridTooCoarse : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Blow-up profile w(r) = -((p-1)/mu) ln(1 + c_at r^{(theta+1)/(p-1)}).

struct BlowupProfile {
  MeasureParams params;
  double c_at = 0.0;  // (omega_theta/(theta+1))^{1/(p-1)}
  static BlowupProfile make(const MeasureParams& mp);
};

double w_profile(const BlowupProfile& b, double r);
double w_derivative(const BlowupProfile& b, double r);

// integral of e^{(p/(p-1)) mu w} dlambda_theta over (0, r_out) by adaptive
// quadrature plus the exact analytic tail; equals 1 for the true bubble.
double w_normal_check(const BlowupProfile& b, double r_out);

// Max interior defect of the radial equation satisfied by w, with the outer
// derivative taken by finite differences on the grid.
double w_ode_residual(const BlowupProfile& b, const RadialGrid& grid);

// ---------------------------------------------------------------------------
// Moser sequence v_{n,rho}.

struct MoserNorms {
  double grad_p = 1.0;       // ||v'||_p^p, exact by construction
  double lp_theta_p = 0.0;   // ||v||_p^p, closed form with incomplete gamma
  double plateau_radius = 0.0;
  double plateau_value = 0.0;
};

MoserNorms moser_closed_form(int n, double rho, const MeasureParams& mp);

// Samples v_{n,rho} on the grid; requires at least 32 nodes inside the
// plateau, else throws GridTooCoarse.
RadialProfile moser_profile(int n, double rho,
                            const std::shared_ptr<const RadialGrid>& grid);

// Certified lower bound for the critical supremum at eta = 1 from the
// inner-ball reduction of the Moser family.
double sharpness_certificate(int n, double rho, const MeasureParams& mp);

// ---------------------------------------------------------------------------
// Green-type function.

struct GreenFunction {
  RadialProfile profile;
  double eta = 0.0;
  double a_eta = 0.0;     // additive constant of the log expansion
  double residual = 0.0;  // max defect of the first-order equation
  double fit_slope = 0.0; // slope of g + ((theta+1)/mu) ln r on the fit window
  double lp_theta_norm_p = 0.0;  // ||g||_p^p
};

// Fixed-point iteration of the integral form with far-field closure
// g(r_out) = 0 and damping 0.5. Throws on non-convergence; a persistently
// negative bracket 1 + (eta-1) * cumulative mass signals r_out too small.
GreenFunction solve_green(double eta,
                          const std::shared_ptr<const RadialGrid>& grid,
                          double tol = 1e-6, int max_sweeps = 400);

// (omega_theta/(theta+1)) exp(mu_crit A_eta + gamma + digamma(p))
double cc_threshold(const GreenFunction& gf);

// ---------------------------------------------------------------------------
// Glued critical test function v_eps.

struct TestFunctionResult {
  RadialProfile profile;
  double norm = 0.0;       // full norm, ~1 by construction
  AdValue ad;              // functional value at mu = mu_crit
  double c_pow = 0.0;      // c^{p/(p-1)}
  double b = 0.0;
  double y_p_eta = 0.0;    // (p eta/(p-1)) ||g||_p^p / c^{p/(p-1)}
  double glue_defect = 0.0;
  double remainder_bound = 0.0;  // size of the dropped matching remainders
};

TestFunctionResult critical_test_function(double epsilon, double eta,
                                          const GreenFunction& gf);

// Dominant computable terms of the sign certificate H(epsilon, eta); the
// dropped remainders are reported as a bound, never absorbed.
struct HPartial {
  double leading = 0.0;
  double correction = 0.0;
  double partial_sum = 0.0;
  double remainder_bound = 0.0;
};

HPartial h_epsilon_eta(double epsilon, double eta, const GreenFunction& gf);

}  // namespace adtm
