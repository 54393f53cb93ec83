#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "adtm/asymptotics.hpp"
#include "adtm/special.hpp"
#include "oracles.hpp"

using namespace adtm;

TEST_CASE("blow-up bubble: values and normalization") {
  const auto mp = MeasureParams::make(2.0, 1.0);
  const auto b = BlowupProfile::make(mp);
  CHECK(std::pow(b.c_at, mp.p - 1.0) ==
        doctest::Approx(mp.omega_theta / (mp.theta + 1.0)).epsilon(1e-12));
  CHECK(b.c_at == doctest::Approx(M_PI).epsilon(1e-13));
  CHECK(w_profile(b, 0.0) == 0.0);
  CHECK(w_profile(b, 1.0) ==
        doctest::Approx(-std::log1p(M_PI) / (4.0 * M_PI)).epsilon(1e-12));
  double prev = 0.0;
  for (double r = 0.1; r < 20.0; r += 0.3) {
    CHECK(w_profile(b, r) <= prev);
    prev = w_profile(b, r);
  }
}

TEST_CASE("bubble normalization across parameter pairs") {
  for (auto [p, theta] : std::vector<std::pair<double, double>>{
           {2.0, 1.0}, {2.0, 3.0}, {3.0, 2.0}, {2.5, 2.0}}) {
    const auto mp = MeasureParams::make(p, theta);
    const auto b = BlowupProfile::make(mp);
    CHECK(w_normal_check(b, 50.0) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("bubble satisfies its radial equation") {
  const auto mp = MeasureParams::make(2.0, 1.0);
  const auto b = BlowupProfile::make(mp);
  // w(0) = 0 and w'(0) = 0: the derivative exponent is positive
  CHECK(w_profile(b, 0.0) == 0.0);
  CHECK(std::abs(w_derivative(b, 1e-12)) <= 1e-10);

  auto nodes = [](std::size_t n) {
    std::vector<double> r(n);
    const double ratio = std::pow(10.0 / 1e-3, 1.0 / double(n - 1));
    r[0] = 1e-3;
    for (std::size_t i = 1; i < n; ++i) r[i] = r[i - 1] * ratio;
    return r;
  };
  auto g1 = RadialGrid::from_nodes(mp, nodes(4096));
  auto g2 = RadialGrid::from_nodes(mp, nodes(8192));
  const double res1 = w_ode_residual(b, *g1);
  const double res2 = w_ode_residual(b, *g2);
  CHECK(res1 <= 1e-4);
  CHECK(res2 * 2.0 <= res1);
}

TEST_CASE("moser closed forms") {
  const auto mp = MeasureParams::make(2.0, 1.0);
  const auto cf4 = moser_closed_form(4, 1.0, mp);
  CHECK(cf4.grad_p == 1.0);
  CHECK(cf4.plateau_value ==
        doctest::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-12));

  // ||v_n'||_p^p by independent quadrature of the analytic derivative
  const int n = 10;
  const auto cf = moser_closed_form(n, 1.0, mp);
  auto integrand = [&](double r) {
    // |v'|^p omega_alpha r^alpha with v' = -coef / r on the ramp
    const double coef = std::pow(mp.omega_alpha, -1.0 / mp.p) *
                        std::pow(n / (mp.theta + 1.0), -1.0 / mp.p);
    return std::pow(coef / r, mp.p) * mp.omega_alpha * std::pow(r, mp.alpha);
  };
  const double quad =
      oracle::integrate(integrand, cf.plateau_radius, 1.0, 1e-13);
  CHECK(quad == doctest::Approx(1.0).epsilon(1e-8));

  // n ||v_n||_p^p approaches the limit constant
  const double limit = (mp.omega_theta / mp.omega_alpha) *
                       special::gamma_fn(mp.p + 1.0) /
                       std::pow(mp.theta + 1.0, mp.p);
  const auto cf50 = moser_closed_form(50, 1.0, mp);
  CHECK(50.0 * cf50.lp_theta_p == doctest::Approx(limit).epsilon(0.05));

  // rho-scaling of the mass
  const auto cfr = moser_closed_form(8, 2.0, mp);
  const auto cf1 = moser_closed_form(8, 1.0, mp);
  CHECK(cfr.lp_theta_p ==
        doctest::Approx(std::pow(2.0, mp.theta + 1.0) * cf1.lp_theta_p)
            .epsilon(1e-12));
}

TEST_CASE("moser closed form against direct mass quadrature") {
  const auto mp = MeasureParams::make(2.5, 2.0);
  const int n = 7;
  const auto cf = moser_closed_form(n, 1.0, mp);
  const double th1 = mp.theta + 1.0;
  const double oa = std::pow(mp.omega_alpha, -1.0 / mp.p);
  auto vn = [&](double r) {
    if (r <= cf.plateau_radius) return cf.plateau_value;
    if (r < 1.0) return oa * std::pow(n / th1, -1.0 / mp.p) * std::log(1.0 / r);
    return 0.0;
  };
  auto integrand = [&](double r) {
    return std::pow(vn(r), mp.p) * mp.omega_theta * std::pow(r, mp.theta);
  };
  const double quad = oracle::integrate(integrand, 0.0, 1.0, 1e-13);
  CHECK(cf.lp_theta_p == doctest::Approx(quad).epsilon(1e-9));
}

TEST_CASE("moser profile sampling and the coarse-grid guard") {
  const auto mp = MeasureParams::make(2.0, 1.0);
  auto g = RadialGrid::make(mp, 10.0, 2048, Grading::geometric);
  auto v10 = moser_profile(10, 1.0, g);
  CHECK(std::pow(norm_grad(v10), mp.p) == doctest::Approx(1.0).epsilon(2e-3));
  CHECK(std::pow(norm_lq(v10, mp.p), mp.p) ==
        doctest::Approx(moser_closed_form(10, 1.0, mp).lp_theta_p)
            .epsilon(1e-3));
  CHECK_THROWS_AS(moser_profile(50, 1.0, g), GridTooCoarse);
}

TEST_CASE("sharpness certificate approaches the inner-ball limit") {
  // the finite-n defect is exp(-n R_n) with n R_n ~ rho^{2(theta+1)} K^2 / n;
  // these parameters keep it inside 2 percent at n = 60 for rho up to 2
  const auto mp = MeasureParams::make(6.0, 5.0);
  const double th1 = mp.theta + 1.0;
  for (double rho : {1.0, 2.0}) {
    const double limit = mp.omega_theta * std::pow(rho, th1) / th1;
    const double cert = sharpness_certificate(60, rho, mp);
    CHECK(cert <= limit);
    CHECK(cert == doctest::Approx(limit).epsilon(0.02));
  }
  const double ratio =
      sharpness_certificate(60, 2.0, mp) / sharpness_certificate(60, 1.0, mp);
  CHECK(ratio == doctest::Approx(std::pow(2.0, th1)).epsilon(0.02));
}

TEST_CASE("sharpness certificate against the inner integral oracle") {
  const auto mp = MeasureParams::make(2.0, 1.0);
  const int n = 1;
  const auto cf = moser_closed_form(n, 1.0, mp);
  const double s = cf.lp_theta_p;
  const double rn = s * s / ((1.0 + s) * (1.0 + s));
  auto integrand = [&](double r) {
    const double arg = (1.0 - rn) * double(n);  // mu |v|^{p'} is n on the plateau
    return (std::exp(arg) - 1.0) * mp.omega_theta * r;
  };
  const double quad = oracle::integrate(integrand, 0.0, cf.plateau_radius);
  CHECK(sharpness_certificate(n, 1.0, mp) ==
        doctest::Approx(quad).epsilon(1e-6));
}

TEST_CASE("green function: equation residual and shape") {
  const auto mp = MeasureParams::make(2.0, 1.0);
  auto g = RadialGrid::make(mp, 20.0, 8192, Grading::geometric);
  const auto gf = solve_green(0.0, g, 1e-6);
  CHECK(gf.residual <= 1e-5);
  CHECK(gf.fit_slope <= 1e-2);
  // non-increasing, positive near 0, vanishing at r_out
  const auto v = gf.profile.values();
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    CHECK(v[i + 1] <= v[i] + 1e-12);
  CHECK(v.front() > 0.0);
  CHECK(v.back() == 0.0);
  CHECK_THROWS_AS(solve_green(1.0, g, 1e-6), std::invalid_argument);
}

TEST_CASE("green function: scaling law in eta") {
  const auto mp = MeasureParams::make(2.0, 1.0);
  auto g = RadialGrid::make(mp, 20.0, 8192, Grading::geometric);
  const auto g0 = solve_green(0.0, g, 1e-6);
  const double eta = 0.5;
  const auto ge = solve_green(eta, g, 1e-6);
  const double sigma = std::pow(1.0 - eta, 1.0 / (mp.theta + 1.0));
  for (double r : {1e-5, 1e-3, 0.1, 0.5, 1.0, 2.0, 5.0}) {
    CHECK(ge.profile.interpolate(r) ==
          doctest::Approx(g0.profile.interpolate(sigma * r)).epsilon(1e-3));
  }
  CHECK(std::abs(ge.a_eta - g0.a_eta + std::log(1.0 - eta) / mp.mu_crit) <=
        1e-4);
}

TEST_CASE("green function for p = 3") {
  const auto mp = MeasureParams::make(3.0, 2.0);
  auto g = RadialGrid::make(mp, 12.0, 8192, Grading::geometric);
  const auto gf = solve_green(0.25, g, 1e-6);
  CHECK(gf.residual <= 1e-4);
  CHECK(gf.profile.values().front() > 0.0);
}

TEST_CASE("threshold coherence in eta") {
  const auto mp = MeasureParams::make(2.0, 1.0);
  auto g = RadialGrid::make(mp, 20.0, 8192, Grading::geometric);
  const auto g0 = solve_green(0.0, g, 1e-6);
  const double base = cc_threshold(g0);
  for (double eta : {0.25, 0.5}) {
    const auto ge = solve_green(eta, g, 1e-6);
    CHECK(cc_threshold(ge) * (1.0 - eta) ==
          doctest::Approx(base).epsilon(1e-3));
  }
  // p = 2, theta = 1: gamma + Psi(2) = 1
  CHECK(cc_threshold(g0) ==
        doctest::Approx(M_PI * std::exp(4.0 * M_PI * g0.a_eta + 1.0))
            .epsilon(1e-12));
  CHECK(cc_threshold(g0) > 0.0);
}

TEST_CASE("critical test function: norm, glue and trend") {
  const auto mp = MeasureParams::make(2.0, 1.0);
  auto g = RadialGrid::make(mp, 20.0, 8192, Grading::geometric);
  const double eta = 0.1;
  const auto gf = solve_green(eta, g, 1e-6);

  const auto t3 = critical_test_function(1e-3, eta, gf);
  CHECK(t3.glue_defect <= 1e-10);
  CHECK(t3.norm == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(!t3.ad.divergent);
  CHECK(t3.ad.value > 0.0);

  double prev_defect = 1e300;
  double prev_y = 1e300;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    const auto tf = critical_test_function(eps, eta, gf);
    const double defect = std::abs(tf.norm - 1.0);
    CHECK(defect < prev_defect);
    CHECK(tf.y_p_eta < prev_y);
    prev_defect = defect;
    prev_y = tf.y_p_eta;
  }
  CHECK_THROWS_AS(critical_test_function(0.5, eta, gf), std::invalid_argument);
}

TEST_CASE("test function approaches the threshold from the eta = 0 baseline") {
  const auto mp = MeasureParams::make(2.0, 1.0);
  auto g = RadialGrid::make(mp, 20.0, 8192, Grading::geometric);
  const auto gf = solve_green(0.0, g, 1e-6);
  const double ct = cc_threshold(gf);
  double prev_gap = 1e300;
  for (double eps : {1e-2, 1e-3}) {
    const auto tf = critical_test_function(eps, 0.0, gf);
    const double gap = std::abs(tf.ad.value - ct) / ct;
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 0.25);
}

TEST_CASE("sign certificate partial sums") {
  const auto mp = MeasureParams::make(2.0, 1.0);
  auto g = RadialGrid::make(mp, 20.0, 8192, Grading::geometric);

  // eta = 0, integer p: the leading term is exactly mu^{p-1}/(p-1)!
  const auto g0 = solve_green(0.0, g, 1e-6);
  const auto h0 = h_epsilon_eta(1e-3, 0.0, g0);
  CHECK(h0.leading == doctest::Approx(mp.mu_crit).epsilon(1e-9));
  CHECK(h0.correction == 0.0);
  CHECK(h0.partial_sum > 0.0);

  // small eta: partial sum stays positive, correction negative for small Y
  const double eta = 0.05;
  const auto ge = solve_green(eta, g, 1e-6);
  const auto he = h_epsilon_eta(1e-3, eta, ge);
  CHECK(he.partial_sum > 0.0);
  const double psi_gamma = kEulerGamma + special::digamma(mp.p);
  const auto tf = critical_test_function(1e-3, eta, ge);
  CHECK(psi_gamma * tf.y_p_eta - 1.0 < 0.0);
  CHECK(he.correction < 0.0);
}
