#include "adtm/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gauss16.hpp"

namespace adtm {

namespace {

constexpr int kG = CellRule::order;
static_assert(kG == detail::kG16);
constexpr const double* kGx = detail::kG16x;
constexpr const double* kGw = detail::kG16w;

void check_samples(std::span<const double> f, const RadialGrid& g) {
  if (f.size() != g.size())
    throw std::invalid_argument("sample count does not match grid");
  for (double v : f)
    if (!std::isfinite(v))
      throw std::invalid_argument("non-finite sample value");
}

CellRule build_rule(const std::vector<double>& nodes, double omega, double e) {
  CellRule rule;
  const std::size_t n = nodes.size();
  rule.x.resize(kG * (n - 1));
  rule.w.resize(kG * (n - 1));
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const double a = nodes[c], b = nodes[c + 1], h = b - a;
    for (int g = 0; g < kG; ++g) {
      const double x = a + h * kGx[g];
      rule.x[kG * c + g] = x;
      rule.w[kG * c + g] = omega * std::pow(x, e) * h * kGw[g];
    }
  }
  rule.origin_mass = RadialGrid::segment_mass(omega, e, 0.0, nodes.front());
  return rule;
}

}  // namespace

MeasureParams MeasureParams::make(double p, double theta,
                                  OmegaConvention conv) {
  if (!(p >= 2.0)) throw std::invalid_argument("MeasureParams: p must be >= 2");
  const double alpha = p - 1.0;
  if (!(theta >= alpha))
    throw std::invalid_argument("MeasureParams: theta must be >= p - 1");
  MeasureParams mp;
  mp.p = p;
  mp.alpha = alpha;
  mp.theta = theta;
  mp.convention = conv;
  mp.omega_alpha = omega(alpha, conv);
  mp.omega_theta = omega(theta, conv);
  mp.mu_crit = (theta + 1.0) * std::pow(mp.omega_alpha, 1.0 / alpha);
  return mp;
}

const char* to_string(Grading g) {
  switch (g) {
    case Grading::uniform: return "uniform";
    case Grading::geometric: return "geometric";
    case Grading::hybrid: return "hybrid";
    case Grading::custom: return "custom";
  }
  return "custom";
}

Grading grading_from_string(const std::string& s) {
  if (s == "uniform") return Grading::uniform;
  if (s == "geometric") return Grading::geometric;
  if (s == "hybrid") return Grading::hybrid;
  if (s == "custom") return Grading::custom;
  throw std::invalid_argument("unknown grading: " + s);
}

RadialGrid::RadialGrid(const MeasureParams& mp, std::vector<double> nodes,
                       Grading g)
    : mp_(mp), nodes_(std::move(nodes)), grading_(g) {
  if (nodes_.size() < 2)
    throw std::invalid_argument("grid needs at least 2 nodes");
  if (!(nodes_.front() > 0.0))
    throw std::invalid_argument("first node must be > 0");
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
    if (!(nodes_[i] < nodes_[i + 1]))
      throw std::invalid_argument("nodes must be strictly increasing");

  theta_rule_ = build_rule(nodes_, mp_.omega_theta, mp_.theta);
  alpha_rule_ = build_rule(nodes_, mp_.omega_alpha, mp_.alpha);

  const std::size_t n = nodes_.size();
  node_mass_theta_.resize(n);
  double lo = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double hi =
        (i + 1 < n) ? 0.5 * (nodes_[i] + nodes_[i + 1]) : nodes_.back();
    node_mass_theta_[i] = segment_mass(mp_.omega_theta, mp_.theta, lo, hi);
    lo = hi;
  }
}

std::shared_ptr<const RadialGrid> RadialGrid::make(const MeasureParams& mp,
                                                   double r_out,
                                                   std::size_t n_nodes,
                                                   Grading grading) {
  if (!(r_out > 0.0)) throw std::invalid_argument("make_grid: r_out must be > 0");
  if (n_nodes < 16) throw std::invalid_argument("make_grid: need n_nodes >= 16");

  std::vector<double> nodes(n_nodes);
  switch (grading) {
    case Grading::uniform: {
      for (std::size_t i = 0; i < n_nodes; ++i)
        nodes[i] = r_out * double(i + 1) / double(n_nodes);
      break;
    }
    case Grading::geometric: {
      // First node well below any feature scale; blow-up profiles diverge
      // logarithmically at 0, never placed at 0 itself.
      const double r0 = 1e-8 * r_out;
      const double ratio = std::pow(r_out / r0, 1.0 / double(n_nodes - 1));
      nodes[0] = r0;
      for (std::size_t i = 1; i < n_nodes; ++i) nodes[i] = nodes[i - 1] * ratio;
      break;
    }
    case Grading::hybrid: {
      const std::size_t n_in = n_nodes / 2;
      const std::size_t n_out = n_nodes - n_in;
      const double split = r_out / 100.0;
      const double r0 = 1e-8 * r_out;
      const double ratio = std::pow(split / r0, 1.0 / double(n_in - 1));
      nodes[0] = r0;
      for (std::size_t i = 1; i < n_in; ++i) nodes[i] = nodes[i - 1] * ratio;
      for (std::size_t j = 1; j <= n_out; ++j)
        nodes[n_in + j - 1] = split + (r_out - split) * double(j) / double(n_out);
      break;
    }
    case Grading::custom:
      throw std::invalid_argument("make_grid: use from_nodes for custom grids");
  }
  nodes.back() = r_out;
  return std::shared_ptr<const RadialGrid>(new RadialGrid(mp, std::move(nodes), grading));
}

std::shared_ptr<const RadialGrid> RadialGrid::from_nodes(
    const MeasureParams& mp, std::vector<double> nodes) {
  return std::shared_ptr<const RadialGrid>(
      new RadialGrid(mp, std::move(nodes), Grading::custom));
}

double RadialGrid::segment_mass(double omega, double e, double a, double b) {
  const double e1 = e + 1.0;
  return omega * (std::pow(b, e1) - std::pow(a, e1)) / e1;
}

double RadialGrid::monomial_residual(double omega, double weight_exp,
                                     double k) const {
  const double e = weight_exp + k;
  double sum = segment_mass(omega, e, 0.0, nodes_.front());
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
    sum += segment_mass(omega, e, nodes_[i], nodes_[i + 1]);
  const double exact = segment_mass(omega, e, 0.0, r_out());
  return std::abs(sum - exact) / std::abs(exact);
}

double RadialGrid::monomial_residual_theta(double k) const {
  return monomial_residual(mp_.omega_theta, mp_.theta, k);
}

double RadialGrid::monomial_residual_alpha(double k) const {
  return monomial_residual(mp_.omega_alpha, mp_.alpha, k);
}

namespace {

// Exact integral of the linear interpolant against omega r^e dr.
double integrate_pwl(std::span<const double> f, const RadialGrid& g,
                     double omega, double e) {
  check_samples(f, g);
  const auto& r = g.nodes();
  double total = f[0] * RadialGrid::segment_mass(omega, e, 0.0, r[0]);
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    const double a = r[i], b = r[i + 1];
    const double s = (f[i + 1] - f[i]) / (b - a);
    const double m0 = RadialGrid::segment_mass(omega, e, a, b);
    const double m1 = RadialGrid::segment_mass(omega, e + 1.0, a, b);
    total += (f[i] - s * a) * m0 + s * m1;
  }
  return total;
}

}  // namespace

double integrate_theta(std::span<const double> f, const RadialGrid& g) {
  return integrate_pwl(f, g, g.params().omega_theta, g.params().theta);
}

double integrate_alpha(std::span<const double> f, const RadialGrid& g) {
  return integrate_pwl(f, g, g.params().omega_alpha, g.params().alpha);
}

double dilation_check(std::span<const double> f, double tau,
                      const RadialGrid& g) {
  if (!(tau > 0.0)) throw std::invalid_argument("dilation_check: tau must be > 0");
  check_samples(f, g);
  const double base = integrate_theta(f, g);
  const double expected = base / std::pow(tau, g.params().theta + 1.0);

  // r -> f(tau r) sampled exactly on the remapped nodes r_i / tau.
  std::vector<double> mapped(g.nodes());
  for (double& x : mapped) x /= tau;
  auto remap = RadialGrid::from_nodes(g.params(), std::move(mapped));
  const double lhs = integrate_theta(f, *remap);

  const double denom = std::max(std::abs(expected), 1e-300);
  return std::abs(lhs - expected) / denom;
}

}  // namespace adtm
