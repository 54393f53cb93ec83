#include "adtm/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "adtm/quadrature.hpp"
#include "adtm/special.hpp"
#include "gauss16.hpp"

namespace adtm {

// ---------------------------------------------------------------------------
// Blow-up profile.

BlowupProfile BlowupProfile::make(const MeasureParams& mp) {
  BlowupProfile b;
  b.params = mp;
  b.c_at = std::pow(mp.omega_theta / (mp.theta + 1.0), 1.0 / (mp.p - 1.0));
  return b;
}

double w_profile(const BlowupProfile& b, double r) {
  if (r < 0.0) throw std::domain_error("w_profile: r must be >= 0");
  const auto& mp = b.params;
  const double m = (mp.theta + 1.0) / (mp.p - 1.0);
  return -(mp.p - 1.0) / mp.mu_crit * std::log1p(b.c_at * std::pow(r, m));
}

double w_derivative(const BlowupProfile& b, double r) {
  const auto& mp = b.params;
  const double m = (mp.theta + 1.0) / (mp.p - 1.0);
  const double rm = std::pow(r, m);
  return -(mp.p - 1.0) / mp.mu_crit * b.c_at * m * std::pow(r, m - 1.0) /
         (1.0 + b.c_at * rm);
}

double w_normal_check(const BlowupProfile& b, double r_out) {
  const auto& mp = b.params;
  const double m = (mp.theta + 1.0) / (mp.p - 1.0);
  auto integrand = [&](double r) {
    return mp.omega_theta * std::pow(r, mp.theta) *
           std::pow(1.0 + b.c_at * std::pow(r, m), -mp.p);
  };
  const double head = quad::integrate(integrand, 0.0, r_out);
  // exact tail: the substitution s = c r^m turns the integral into the
  // normalized Beta tail, 1 - (s/(1+s))^{p-1} at s = c r_out^m
  const double s_r = b.c_at * std::pow(r_out, m);
  const double tail = 1.0 - std::pow(s_r / (1.0 + s_r), mp.p - 1.0);
  return head + tail;
}

double w_ode_residual(const BlowupProfile& b, const RadialGrid& grid) {
  const auto& mp = b.params;
  const auto& r = grid.nodes();
  const double m = (mp.theta + 1.0) / (mp.p - 1.0);
  std::vector<double> G(r.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    G[i] = std::pow(r[i], mp.alpha) *
           std::pow(std::abs(w_derivative(b, r[i])), mp.p - 1.0);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < r.size(); ++i) {
    const double hm = r[i] - r[i - 1];
    const double hp = r[i + 1] - r[i];
    const double dG = (hm * hm * G[i + 1] + (hp * hp - hm * hm) * G[i] -
                       hp * hp * G[i - 1]) /
                      (hp * hm * (hp + hm));
    const double rhs = mp.omega_theta * std::pow(r[i], mp.theta) *
                       std::pow(1.0 + b.c_at * std::pow(r[i], m), -mp.p);
    worst = std::max(worst, std::abs(mp.omega_alpha * dG - rhs));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Moser sequence.

MoserNorms moser_closed_form(int n, double rho, const MeasureParams& mp) {
  if (n < 1) throw std::invalid_argument("moser: n must be >= 1");
  if (!(rho > 0.0)) throw std::invalid_argument("moser: rho must be > 0");
  const double th1 = mp.theta + 1.0;
  MoserNorms out;
  out.plateau_radius = rho * std::exp(-double(n) / th1);
  out.plateau_value = std::pow(mp.omega_alpha, -1.0 / mp.p) *
                      std::pow(double(n) / th1, (mp.p - 1.0) / mp.p);
  const double gamma_part =
      special::lower_incomplete_gamma(mp.p + 1.0, double(n)) / double(n);
  const double plateau_part =
      std::pow(double(n), mp.p - 1.0) * std::exp(-double(n));
  out.lp_theta_p = std::pow(rho, th1) * (mp.omega_theta / mp.omega_alpha) *
                   std::pow(th1, -mp.p) * (plateau_part + gamma_part);
  out.grad_p = 1.0;
  return out;
}

RadialProfile moser_profile(int n, double rho,
                            const std::shared_ptr<const RadialGrid>& grid) {
  const auto& mp = grid->params();
  const MoserNorms cf = moser_closed_form(n, rho, mp);
  const auto& r = grid->nodes();
  std::size_t inside = 0;
  for (double x : r)
    if (x < cf.plateau_radius) ++inside;
  if (inside < 32)
    throw GridTooCoarse("moser_profile: fewer than 32 nodes inside the plateau");
  const double ramp_coef = std::pow(mp.omega_alpha, -1.0 / mp.p) *
                           std::pow(double(n) / (mp.theta + 1.0), -1.0 / mp.p);
  std::vector<double> v(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] <= cf.plateau_radius)
      v[i] = cf.plateau_value;
    else if (r[i] < rho)
      v[i] = ramp_coef * std::log(rho / r[i]);
    else
      v[i] = 0.0;
  }
  return RadialProfile(grid, std::move(v));
}

double sharpness_certificate(int n, double rho, const MeasureParams& mp) {
  const MoserNorms cf = moser_closed_form(n, rho, mp);
  const double s = cf.lp_theta_p;
  const double rn = s * s / ((1.0 + s) * (1.0 + s));
  const int k0 = k0_of(mp.p);
  // sum_{j < p-1} ((1-R)n)^j / j! * e^{-n}, assembled in log space
  double head = 0.0;
  const double lg_arg = std::log((1.0 - rn) * double(n));
  double lfact = 0.0;
  for (int j = 0; j < k0; ++j) {
    if (j > 0) lfact += std::log(double(j));
    head += std::exp(double(j) * lg_arg - lfact - double(n));
  }
  const double th1 = mp.theta + 1.0;
  return mp.omega_theta * std::pow(rho, th1) / th1 *
         (std::exp(-double(n) * rn) - head);
}

// ---------------------------------------------------------------------------
// Green-type function.

namespace {

// integral over (a, b) of PWL(phi)(t)/t dt, exact: the 1/t factor integrates
// against the linear interpolant in closed form.
double log_cell(double a, double b, double phi_a, double phi_b) {
  const double s = (phi_b - phi_a) / (b - a);
  return (phi_a - s * a) * std::log(b / a) + s * (b - a);
}

// One outward march of the first-order relation
//   omega_alpha r^alpha |g'|^{p-1} = 1 + (eta-1) * cumulative |g|^{p-1} mass,
// launched from the logarithmic behaviour -((theta+1)/mu) ln r + A at the
// first node. Reports where g crosses zero (if it does) and the state.
struct MarchResult {
  std::vector<double> g;
  std::vector<double> cum;
  bool crossed = false;       // g hit zero before r_out
  double end_value = 0.0;     // g at r_out when not crossed
  double min_bracket = 1.0;
};

MarchResult march_outward(const RadialGrid& grid, double eta, double a_shoot) {
  const auto& r = grid.nodes();
  const auto& mp = grid.params();
  const std::size_t n = r.size();
  const double pm1 = mp.p - 1.0;
  const double coef = std::pow(mp.omega_alpha, -1.0 / pm1);
  const double log_coef = (mp.theta + 1.0) / mp.mu_crit;
  const auto& rule = grid.theta_rule();

  MarchResult out;
  out.g.assign(n, 0.0);
  out.cum.assign(n, 0.0);
  out.g[0] = -log_coef * std::log(r[0]) + a_shoot;

  // mass of the logarithmic head on (0, r0]
  {
    const double r0 = r[0];
    double head = 0.0;
    for (int q = 0; q < CellRule::order; ++q) {
      const double s = r0 * detail::kG16x[q];
      const double gh = -log_coef * std::log(s) + a_shoot;
      head += detail::kG16w[q] * r0 * mp.omega_theta *
              std::pow(s, mp.theta) * std::pow(std::max(gh, 0.0), pm1);
    }
    out.cum[0] = head;
  }

  auto phi_of = [&](double mass) {
    const double b = 1.0 + (eta - 1.0) * mass;
    return std::pow(std::max(b, 0.0), 1.0 / pm1);
  };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = r[i], b = r[i + 1];
    const double phi_lo = phi_of(out.cum[i]);
    double g_hi = out.g[i];
    double m_hi = out.cum[i];
    for (int pass = 0; pass < 2; ++pass) {
      const double phi_hi = phi_of(m_hi);
      g_hi = out.g[i] - coef * log_cell(a, b, phi_lo, phi_hi);
      double cell = 0.0;
      const double slope = (g_hi - out.g[i]) / (b - a);
      for (int q = 0; q < CellRule::order; ++q) {
        const std::size_t e = CellRule::order * i + q;
        const double gv = out.g[i] + slope * (rule.x[e] - a);
        cell += rule.w[e] * std::pow(std::max(gv, 0.0), pm1);
      }
      m_hi = out.cum[i] + cell;
    }
    out.g[i + 1] = g_hi;
    out.cum[i + 1] = m_hi;
    out.min_bracket =
        std::min(out.min_bracket, 1.0 + (eta - 1.0) * m_hi);
    if (g_hi < 0.0) {
      out.crossed = true;
      return out;
    }
  }
  out.end_value = out.g[n - 1];
  return out;
}

}  // namespace

GreenFunction solve_green(double eta,
                          const std::shared_ptr<const RadialGrid>& grid,
                          double tol, int max_sweeps) {
  if (!(eta >= 0.0 && eta < 1.0))
    throw std::invalid_argument("solve_green: eta must be in [0, 1)");
  const auto& mp = grid->params();
  const auto& r = grid->nodes();
  const std::size_t n = r.size();
  const double pm1 = mp.p - 1.0;
  const double log_coef = (mp.theta + 1.0) / mp.mu_crit;

  // Damped Picard on the integral map is violently unstable in the tail-mass
  // mode, so the equation is shot outward instead: the additive constant of
  // the logarithmic head is the shooting parameter, monotone in where g
  // crosses zero, and is bisected until the crossing lands on r_out.
  double lo = -1.0, hi = 1.0;
  for (int expand = 0; expand < 60 && !march_outward(*grid, eta, lo).crossed;
       ++expand)
    lo = lo * 2.0 - 1.0;
  for (int expand = 0; expand < 60 && march_outward(*grid, eta, hi).crossed;
       ++expand)
    hi = hi * 2.0 + 1.0;
  if (!march_outward(*grid, eta, lo).crossed ||
      march_outward(*grid, eta, hi).crossed)
    throw std::runtime_error("solve_green: shooting bracket not found");

  MarchResult sol;
  int sweeps = 0;
  for (; sweeps < max_sweeps; ++sweeps) {
    const double mid = 0.5 * (lo + hi);
    MarchResult m = march_outward(*grid, eta, mid);
    if (m.crossed)
      lo = mid;
    else {
      hi = mid;
      sol = std::move(m);
    }
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(hi))) break;
  }
  if (sol.g.empty())
    throw std::runtime_error("solve_green: shooting did not converge");
  if (sol.min_bracket < -100.0 * tol)
    throw std::runtime_error(
        "solve_green: mass bracket went negative; r_out too small");
  std::vector<double> g = std::move(sol.g);
  g[n - 1] = 0.0;
  for (double& x : g) x = std::max(x, 0.0);

  GreenFunction out{RadialProfile(grid, g), eta, 0.0, 0.0, 0.0, 0.0};
  const std::vector<double> cum = cumulative_power_theta(out.profile, pm1);

  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hm = r[i] - r[i - 1];
    const double hp = r[i + 1] - r[i];
    const double dg = (hm * hm * g[i + 1] + (hp * hp - hm * hm) * g[i] -
                       hp * hp * g[i - 1]) /
                      (hp * hm * (hp + hm));
    const double lhs = mp.omega_alpha * std::pow(r[i], mp.alpha) *
                       std::pow(std::abs(dg), pm1);
    worst = std::max(worst, std::abs(lhs + (1.0 - eta) * cum[i] - 1.0));
  }
  out.residual = worst;

  // A_eta by constant fit of g + ((theta+1)/mu) ln r on a fixed log window;
  // the correction z(r) is O(r^{theta+1} |ln r|^{p-1}) there.
  double win_lo = 1e-6, win_hi = 1e-4;
  std::vector<double> xs, ys;
  for (int widen = 0; widen < 3 && xs.size() < 5; ++widen) {
    xs.clear();
    ys.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (r[i] < win_lo || r[i] > win_hi) continue;
      xs.push_back(std::log(r[i]));
      ys.push_back(g[i] + log_coef * std::log(r[i]));
    }
    if (xs.size() < 5) win_hi *= 10.0;
  }
  if (xs.size() < 2)
    throw std::runtime_error("solve_green: no nodes in the A_eta fit window");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(xs.size());
  my /= double(xs.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  out.a_eta = my;
  out.fit_slope = (sxx > 0.0) ? sxy / sxx : 0.0;
  out.lp_theta_norm_p = power_integral_theta(out.profile, mp.p);
  return out;
}

double cc_threshold(const GreenFunction& gf) {
  const auto& mp = gf.profile.grid().params();
  const double psi_gamma = kEulerGamma + special::digamma(mp.p);
  return mp.omega_theta / (mp.theta + 1.0) *
         std::exp(mp.mu_crit * gf.a_eta + psi_gamma);
}

// ---------------------------------------------------------------------------
// Critical test function and the sign certificate.

namespace {

struct Matching {
  double x;     // c^{p/(p-1)}
  double b;
  double z_l;   // c_at L^{(theta+1)/(p-1)}
  double y;     // Y_{p,eta}
  double l;     // -ln eps
  double g_at;  // g_eta(eps L)
  double remainder;
};

Matching matching_constants(double epsilon, double eta,
                            const GreenFunction& gf) {
  if (!(epsilon > 0.0 && epsilon <= 0.1))
    throw std::invalid_argument("epsilon must be in (0, 0.1]");
  const auto& mp = gf.profile.grid().params();
  const double pm1 = mp.p - 1.0;
  Matching m;
  m.l = -std::log(epsilon);
  const double c_at = std::pow(mp.omega_theta / (mp.theta + 1.0), 1.0 / pm1);
  m.z_l = c_at * std::pow(m.l, (mp.theta + 1.0) / pm1);
  const double psi_gamma = kEulerGamma + special::digamma(mp.p);
  m.b = -eta * gf.lp_theta_norm_p + pm1 / mp.mu_crit * psi_gamma;
  m.g_at = gf.profile.interpolate(epsilon * m.l);
  // continuity at the glue radius pins c^{p/(p-1)} once b is fixed
  m.x = m.g_at + pm1 / mp.mu_crit * std::log1p(m.z_l) - m.b;
  if (!(m.x > 0.0))
    throw std::runtime_error("critical_test_function: negative c^{p/(p-1)}");
  m.y = mp.p * eta / pm1 * gf.lp_theta_norm_p / m.x;
  const double z_meas = std::abs(m.g_at +
                                 (mp.theta + 1.0) / mp.mu_crit *
                                     std::log(epsilon * m.l) -
                                 gf.a_eta);
  m.remainder = pm1 / mp.mu_crit * std::log1p(1.0 / m.z_l) + z_meas;
  return m;
}

}  // namespace

TestFunctionResult critical_test_function(double epsilon, double eta,
                                          const GreenFunction& gf) {
  const auto& grid = gf.profile.grid_ptr();
  const auto& mp = grid->params();
  const Matching m = matching_constants(epsilon, eta, gf);
  const double pm1 = mp.p - 1.0;
  const double c = std::pow(m.x, pm1 / mp.p);
  const double cinv = std::pow(m.x, -1.0 / mp.p);  // c^{-1/(p-1)}
  const BlowupProfile bubble = BlowupProfile::make(mp);
  const double glue_r = epsilon * m.l;

  const auto& r = grid->nodes();
  std::vector<double> v(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] <= glue_r)
      v[i] = std::max(
          0.0, c + cinv * (w_profile(bubble, r[i] / epsilon) + m.b));
    else
      v[i] = std::max(0.0, cinv * gf.profile.value(i));
  }

  TestFunctionResult out{RadialProfile(grid, std::move(v)),
                         0.0,
                         {},
                         m.x,
                         m.b,
                         m.y,
                         0.0,
                         m.remainder};
  const double inner_at_glue =
      c + cinv * (w_profile(bubble, glue_r / epsilon) + m.b);
  out.glue_defect = std::abs(inner_at_glue - cinv * m.g_at);
  if (out.glue_defect > 1e-3)
    throw std::runtime_error("critical_test_function: glue mismatch");
  out.norm = full_norm(out.profile);
  const FunctionalParams fp = FunctionalParams::make(mp.mu_crit, eta, mp);
  out.ad = ad_value(out.profile, fp);
  return out;
}

HPartial h_epsilon_eta(double epsilon, double eta, const GreenFunction& gf) {
  const auto& mp = gf.profile.grid().params();
  const double pm1 = mp.p - 1.0;
  const int k0 = k0_of(mp.p);
  const double q_star = k0 * mp.p / pm1;
  const double nk = power_integral_theta(gf.profile, q_star);
  const double gp = gf.lp_theta_norm_p;
  const double psi_gamma = kEulerGamma + special::digamma(mp.p);

  HPartial out;
  double mu_fact = 1.0;
  for (int k = 1; k <= k0; ++k) mu_fact *= mp.mu_crit / double(k);
  out.leading = mu_fact * nk / gp;

  const Matching m = matching_constants(epsilon, eta, gf);
  const double ct = cc_threshold(gf);
  const double poly = (mp.p * mp.p - mp.p + 2.0) / (2.0 * pm1 * pm1);
  out.correction = eta * mp.mu_crit * ct *
                   std::pow(m.x, double(k0) / pm1 - 1.0) *
                   (psi_gamma * m.y - 1.0) * poly * eta * gp;
  out.partial_sum = out.leading + out.correction;

  const double el = epsilon * m.l;
  out.remainder_bound =
      std::pow(m.x, double(k0) / pm1 - 2.0) +
      std::pow(m.x, double(k0) / pm1) *
          std::pow(m.l, -(mp.theta + 1.0) / pm1) +
      (m.x * std::pow(el, mp.theta + 1.0) *
           std::pow(std::abs(std::log(el)), q_star) +
       1.0) /
          (m.x * gp);
  return out;
}

}  // namespace adtm
