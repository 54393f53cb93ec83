#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "adtm/radial.hpp"

// The constrained exponential functional with the norm enhancement factor
// (1 + eta ||u||_p^p)^{1/(p-1)}, its discrete gradient, the projected-ascent
// maximizer, the quadratic interpolation constant B_{2,theta}, and the
// vanishing diagnostics.

namespace adtm {

// min{ j in N : p-1 <= j }
int k0_of(double p);

struct FunctionalParams {
  double mu = 1.0;   // > 0
  double eta = 0.0;  // in [0, 1]
  int k0 = 1;
  bool supercritical = false;  // mu > mu_crit or eta >= 1

  static FunctionalParams make(double mu, double eta, const MeasureParams& mp);
};

// phi_p(t) = e^t - sum_{k<k0} t^k/k!; series route below t = 1 to avoid
// cancellation. Throws std::overflow_error past the exp range.
double phi_p(double t, double p);
double phi_p_prime(double t, double p);

struct AdValue {
  double value = 0.0;      // +inf when divergent
  double partial = 0.0;    // integral over the non-overflowing region
  double tail_bound = 0.0; // analytic bound for the mass beyond r_out
  bool divergent = false;
};

AdValue ad_value(const RadialProfile& u, const FunctionalParams& fp);

// Discrete first variation of ad_value with respect to the node values,
// including the eta-coupling through ||u||_p^p.
std::vector<double> ad_gradient(const RadialProfile& u,
                                const FunctionalParams& fp);

struct SolveOptions {
  double tol = 1e-7;        // relative projected-gradient residual
  long max_iter = 50000;
  bool allow_supercritical = false;
  double rho = 1.0;         // scale of the blow-up certificate family
  double r_probe = 1.0;     // concentration/vanishing probe radius
  std::uint64_t seed = 0;   // perturbs the starting family deterministically
  // warm start (node values on the solve grid); joins the starting family
  std::optional<std::vector<double>> init_values;
};

struct SolveReport {
  double value = 0.0;
  long iterations = 0;
  double grad_residual = 0.0;
  double concentration_fraction = 0.0;
  double vanishing_indicator = 0.0;
  bool converged = false;
  std::string status;  // converged | max_iter | stalled | blowup_detected
  std::optional<RadialProfile> maximizer;
  std::vector<double> value_trace;
};

SolveReport maximize_ad(const FunctionalParams& fp,
                        const std::shared_ptr<const RadialGrid>& grid,
                        const SolveOptions& opts = {});

struct B2Result {
  double b2 = 0.0;        // B_{2,theta}
  double quotient = 0.0;  // attained value of the quotient (= 1/b2)
  bool converged = false;
  long iterations = 0;
  std::optional<RadialProfile> minimizer;
};

// 1/B_{2,theta} = inf ||u'||^2_{L2_1} ||u||^2_{L2_theta} / ||u||^4_{L4_theta},
// by multi-start descent on the scale-invariant quotient (p = 2).
B2Result b2_solve(double theta, const std::shared_ptr<const RadialGrid>& grid,
                  double tol = 1e-10, long max_iter = 20000);
double b2_constant(double theta, const std::shared_ptr<const RadialGrid>& grid);

// 2(1+2 eta) / ((1+eta)^2 B_{2,theta})
double p2_attainment_threshold(double eta, double theta,
                               const std::shared_ptr<const RadialGrid>& grid);

// The scaling curve of the vanishing analysis: returns (h(t), xi_t) for a
// profile with full norm 1.
std::pair<double, double> vanishing_curve(const RadialProfile& u,
                                          const FunctionalParams& fp, double t);

struct TruncationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// p = 2 only: J(v_tau) with v_tau the normalized dilation curve through u.
double ishiwata_j(const RadialProfile& u, double mu, double eta, double tau,
                  int j_max = 200);

// d/dtau J(v_tau) at tau = 1 from the term-by-term differentiated series.
// Throws TruncationError when the reported series tail exceeds 1e-8 of the sum.
double ishiwata_derivative(const RadialProfile& u, double mu, double eta,
                           int j_max = 200);

// (share of |u'|^p mass in (0, r_probe), share of |u|^p mass in (r_probe, r_out));
// degenerate zero denominators report 0.
std::pair<double, double> concentration_diagnostics(const RadialProfile& u,
                                                    double r_probe);

}  // namespace adtm
