#pragma once

// Special functions used by the blow-up analysis: Gamma, log-Gamma, digamma,
// the Beta integral, the angular constant omega_theta and the technical
// integral identities tying them together.

namespace adtm {

// Euler-Mascheroni constant, gamma = -digamma(1).
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

enum class OmegaConvention {
  sphere,   // 2 pi^{(theta+1)/2} / Gamma((theta+1)/2), measure of S^theta
  literal,  // 2 pi^{theta/2} / Gamma(theta/2)
};

namespace special {

// Gamma(x) for x > 0. Throws std::domain_error for x <= 0 and
// std::overflow_error once the result is not representable (x > ~171.6).
double gamma_fn(double x);

// ln Gamma(x) for x > 0.
double log_gamma(double x);

// digamma Psi(x) = d/dx ln Gamma(x), x > 0.
double digamma(double x);

// Lower incomplete gamma integral(0,x) t^{a-1} e^{-t} dt (not regularized).
double lower_incomplete_gamma(double a, double x);

// Gamma(x)Gamma(y)/Gamma(x+y); equals the integral of s^{x-1}(1+s)^{-x-y}
// over (0,inf).
double beta_integral(double x, double y);

struct SpecialConstants {
  double gamma_euler;  // -digamma(1)
  double psi_p;        // digamma(p)
  static SpecialConstants for_p(double p);
};

// Residuals of the three closed-form identities behind the Carleson-Chang
// comparison step, all evaluated by independent routes:
//   eq1: integral(0,z) s^{p-1}/(1+s)^p ds
//          = ln(1+z) - [gamma + Psi(p)] + integral(z/(1+z),1) (1-s^{p-1})/(1-s) ds
//   eq2: integral(0,z) s^{p-2}/(1+s)^p ds
//          = Gamma(p-1)Gamma(1)/Gamma(p) - integral(z,inf) s^{p-2}/(1+s)^p ds
//   eq3: first-order coefficient of Gamma(p)Gamma(1+x)/Gamma(p+x) at x=0
//        equals -[gamma + Psi(p)]; checked with a fourth-order difference
//        quotient at step x = 1e-3.
struct LtResiduals {
  double eq1;
  double eq2;
  double eq3;
};
LtResiduals lt_identity_residuals(double z, double p);

}  // namespace special

// Angular factor of the fractional measure. theta >= 0; the literal
// convention additionally requires theta > 0.
double omega(double theta, OmegaConvention conv = OmegaConvention::sphere);

}  // namespace adtm
