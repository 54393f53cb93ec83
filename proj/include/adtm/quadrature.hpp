#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>

// Adaptive 1-D quadrature for the closed-form identity checks and the
// fixed-point Green solver. Grid-based integration of sampled profiles lives
// in measure.hpp; this is for integrands given as functions.

namespace adtm::quad {

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  double rel_tol = 1e-11;
  double abs_tol = 1e-14;
  int max_depth = 60;
};

// Adaptive Gauss-Kronrod (G7/K15) on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opt = {});

// Integral over (a, inf) of an integrand decaying at least like s^{-2}:
// maps the tail (cut, inf) to a finite interval via s -> 1/s.
double integrate_to_infinity(const std::function<double(double)>& f, double a,
                             const Options& opt = {});

}  // namespace adtm::quad
