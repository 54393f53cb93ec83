#pragma once

#include <atomic>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "adtm/measure.hpp"

// Radial profiles in the weighted space X^{1,p}(alpha,theta): sampled
// non-negative functions with piecewise-linear semantics, their norms,
// scalings and the decreasing rearrangement.

namespace adtm {

class RadialProfile {
 public:
  RadialProfile(std::shared_ptr<const RadialGrid> grid,
                std::vector<double> values);

  const RadialGrid& grid() const { return *grid_; }
  const std::shared_ptr<const RadialGrid>& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double value(std::size_t i) const { return values_[i]; }
  double max_value() const;

  // PWL evaluation; constant on (0, r_first], zero beyond r_out.
  double interpolate(double r) const;

  // value(r_out) <= 1e-6 * max value, the discrete stand-in for u(R) -> 0.
  bool decays_at_outer() const;

  RadialProfile(const RadialProfile& other);
  RadialProfile& operator=(const RadialProfile& other);
  RadialProfile(RadialProfile&&) noexcept = default;
  RadialProfile& operator=(RadialProfile&&) noexcept = default;

 private:
  friend double norm_grad(const RadialProfile&);
  friend double full_norm(const RadialProfile&);
  std::shared_ptr<const RadialGrid> grid_;
  std::vector<double> values_;
  // Memoized norms; NaN until computed. Concurrent readers may recompute the
  // same value, which is harmless.
  mutable std::atomic<double> cache_grad_p_;
  mutable std::atomic<double> cache_full_;
};

// (integral |u'|^p dlambda_alpha)^{1/p}, u' the cellwise slope (zero on the
// origin segment). Exact per cell.
double norm_grad(const RadialProfile& u);

// (integral |u|^q dlambda_theta)^{1/q}, q >= 1.
double norm_lq(const RadialProfile& u, double q);

// (norm_grad^p + norm_lq(p)^p)^{1/p}; cached.
double full_norm(const RadialProfile& u);

RadialProfile normalize(const RadialProfile& u);

// u_tau(r) = zeta u(tau r) realized by an exact grid remap {r_i / tau}.
RadialProfile scale(const RadialProfile& u, double zeta, double tau);

// lambda_theta decreasing rearrangement of the interpolant, sampled back on
// the same grid. Non-increasing inputs are returned unchanged.
RadialProfile decreasing_rearrange(const RadialProfile& u);

// min over nodes of C ||u||^p r^{-(alpha + theta(p-1))/p} - u(r)^p with the
// calibrated constant; >= 0 certifies the radial pointwise bound on u.
double pointwise_bound_margin(const RadialProfile& u);

// The calibrated constant itself (twice the max ratio over the calibration
// family of ramps, log bubbles and exponentials).
double radial_bound_constant(const MeasureParams& mp);

// --- integral helpers shared across modules ---

// integral over (r_lo, r_hi) of |u|^q dlambda_theta (per-cell Gauss, split
// cells at the window ends, exact constant origin segment).
double power_integral_theta(const RadialProfile& u, double q, double r_lo,
                            double r_hi);
inline double power_integral_theta(const RadialProfile& u, double q) {
  return power_integral_theta(u, q, 0.0, u.grid().r_out());
}

// integral over (r_lo, r_hi) of |u'|^p dlambda_alpha, exact per cell.
double grad_integral_alpha(const RadialProfile& u, double pexp, double r_lo,
                           double r_hi);
inline double grad_integral_alpha(const RadialProfile& u, double pexp) {
  return grad_integral_alpha(u, pexp, 0.0, u.grid().r_out());
}

// Cumulative integral of |u|^q dlambda_theta from 0 to each node.
std::vector<double> cumulative_power_theta(const RadialProfile& u, double q);

// Two-route check used by the rearrangement tests: integral of u^q dlambda_theta
// via the exact layer-cake over the level structure of the interpolant.
double layer_cake_power_theta(const RadialProfile& u, double q);

// --- import/export ---

void write_csv(const RadialProfile& u, const std::string& path);
RadialProfile read_csv(const MeasureParams& mp, const std::string& path);
std::string to_json_string(const RadialProfile& u);
RadialProfile profile_from_json_string(const MeasureParams& mp,
                                       const std::string& text);

}  // namespace adtm
