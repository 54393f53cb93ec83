#include "adtm/radial.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gauss16.hpp"

namespace adtm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_values(const std::vector<double>& v, std::size_t n) {
  if (v.size() != n)
    throw std::invalid_argument("profile: value count does not match grid");
  for (double x : v)
    if (!std::isfinite(x) || x < 0.0)
      throw std::invalid_argument("profile: values must be finite and >= 0");
}

}  // namespace

RadialProfile::RadialProfile(std::shared_ptr<const RadialGrid> grid,
                             std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("profile: null grid");
  check_values(values_, grid_->size());
  cache_grad_p_.store(kNaN, std::memory_order_relaxed);
  cache_full_.store(kNaN, std::memory_order_relaxed);
}

RadialProfile::RadialProfile(const RadialProfile& other)
    : grid_(other.grid_), values_(other.values_) {
  cache_grad_p_.store(other.cache_grad_p_.load(std::memory_order_relaxed),
                      std::memory_order_relaxed);
  cache_full_.store(other.cache_full_.load(std::memory_order_relaxed),
                    std::memory_order_relaxed);
}

RadialProfile& RadialProfile::operator=(const RadialProfile& other) {
  if (this != &other) {
    grid_ = other.grid_;
    values_ = other.values_;
    cache_grad_p_.store(other.cache_grad_p_.load(std::memory_order_relaxed),
                        std::memory_order_relaxed);
    cache_full_.store(other.cache_full_.load(std::memory_order_relaxed),
                      std::memory_order_relaxed);
  }
  return *this;
}

double RadialProfile::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

double RadialProfile::interpolate(double r) const {
  const auto& x = grid_->nodes();
  if (r <= x.front()) return values_.front();
  if (r >= x.back()) return (r > x.back()) ? 0.0 : values_.back();
  const auto it = std::upper_bound(x.begin(), x.end(), r);
  const std::size_t i = it - x.begin() - 1;
  const double lam = (r - x[i]) / (x[i + 1] - x[i]);
  return values_[i] * (1.0 - lam) + values_[i + 1] * lam;
}

bool RadialProfile::decays_at_outer() const {
  return values_.back() <= 1e-6 * max_value();
}

double norm_grad(const RadialProfile& u) {
  const double cached = u.cache_grad_p_.load(std::memory_order_relaxed);
  if (!std::isnan(cached)) return cached;
  const double v = std::pow(
      grad_integral_alpha(u, u.grid().params().p), 1.0 / u.grid().params().p);
  u.cache_grad_p_.store(v, std::memory_order_relaxed);
  return v;
}

double norm_lq(const RadialProfile& u, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("norm_lq: q must be >= 1");
  return std::pow(power_integral_theta(u, q), 1.0 / q);
}

double full_norm(const RadialProfile& u) {
  const double cached = u.cache_full_.load(std::memory_order_relaxed);
  if (!std::isnan(cached)) return cached;
  const double p = u.grid().params().p;
  const double gp = std::pow(norm_grad(u), p);
  const double lp = power_integral_theta(u, p);
  const double v = std::pow(gp + lp, 1.0 / p);
  u.cache_full_.store(v, std::memory_order_relaxed);
  return v;
}

RadialProfile normalize(const RadialProfile& u) {
  const double n = full_norm(u);
  if (!(n > 0.0)) throw std::invalid_argument("normalize: zero profile");
  std::vector<double> v(u.values().begin(), u.values().end());
  for (double& x : v) x /= n;
  return RadialProfile(u.grid_ptr(), std::move(v));
}

RadialProfile scale(const RadialProfile& u, double zeta, double tau) {
  if (!(zeta > 0.0) || !(tau > 0.0))
    throw std::invalid_argument("scale: zeta and tau must be > 0");
  std::vector<double> nodes(u.grid().nodes());
  for (double& r : nodes) r /= tau;
  auto grid = RadialGrid::from_nodes(u.grid().params(), std::move(nodes));
  std::vector<double> v(u.values().begin(), u.values().end());
  for (double& x : v) x *= zeta;
  return RadialProfile(std::move(grid), std::move(v));
}

// ---------------------------------------------------------------------------
// Windowed integrals.

namespace {

constexpr int kG = CellRule::order;
constexpr const double* kGx = detail::kG16x;
constexpr const double* kGw = detail::kG16w;

double pow_q(double base, double q) {
  if (base <= 0.0) return 0.0;
  if (q == 1.0) return base;
  if (q == 2.0) return base * base;
  if (q == 3.0) return base * base * base;
  if (q == 4.0) {
    const double b2 = base * base;
    return b2 * b2;
  }
  return std::pow(base, q);
}

// integral over (max(a,lo), min(b,hi)) of (va + s(r-a))^q omega r^e dr.
double cell_power(double a, double b, double va, double vb, double q,
                  double omega, double e, double lo, double hi) {
  const double x0 = std::max(a, lo), x1 = std::min(b, hi);
  if (!(x1 > x0)) return 0.0;
  const double s = (vb - va) / (b - a);
  double acc = 0.0;
  const double h = x1 - x0;
  for (int g = 0; g < kG; ++g) {
    const double x = x0 + h * kGx[g];
    const double ux = va + s * (x - a);
    acc += kGw[g] * pow_q(ux, q) * omega * std::pow(x, e) * h;
  }
  return acc;
}

}  // namespace

double power_integral_theta(const RadialProfile& u, double q, double r_lo,
                            double r_hi) {
  const auto& g = u.grid();
  const auto& r = g.nodes();
  const auto& mp = g.params();
  const auto v = u.values();
  double total = 0.0;
  // origin segment, constant value
  const double o_hi = std::min(r_hi, r.front());
  if (o_hi > r_lo)
    total += pow_q(v[0], q) * RadialGrid::segment_mass(mp.omega_theta, mp.theta,
                                                       std::max(r_lo, 0.0), o_hi);
  const auto& rule = g.theta_rule();
  for (std::size_t c = 0; c + 1 < r.size(); ++c) {
    if (r[c + 1] <= r_lo || r[c] >= r_hi) continue;
    if (r[c] >= r_lo && r[c + 1] <= r_hi) {
      // full cell: reuse the cached rule
      const double s = (v[c + 1] - v[c]) / (r[c + 1] - r[c]);
      for (int gq = 0; gq < kG; ++gq) {
        const std::size_t e = kG * c + gq;
        const double ux = v[c] + s * (rule.x[e] - r[c]);
        total += rule.w[e] * pow_q(ux, q);
      }
    } else {
      total += cell_power(r[c], r[c + 1], v[c], v[c + 1], q, mp.omega_theta,
                          mp.theta, r_lo, r_hi);
    }
  }
  return total;
}

double grad_integral_alpha(const RadialProfile& u, double pexp, double r_lo,
                           double r_hi) {
  const auto& g = u.grid();
  const auto& r = g.nodes();
  const auto& mp = g.params();
  const auto v = u.values();
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < r.size(); ++c) {
    const double x0 = std::max(r[c], r_lo), x1 = std::min(r[c + 1], r_hi);
    if (!(x1 > x0)) continue;
    const double slope = (v[c + 1] - v[c]) / (r[c + 1] - r[c]);
    total += std::pow(std::abs(slope), pexp) *
             RadialGrid::segment_mass(mp.omega_alpha, mp.alpha, x0, x1);
  }
  return total;
}

std::vector<double> cumulative_power_theta(const RadialProfile& u, double q) {
  const auto& g = u.grid();
  const auto& r = g.nodes();
  const auto v = u.values();
  const auto& rule = g.theta_rule();
  std::vector<double> cum(r.size());
  cum[0] = pow_q(v[0], q) * rule.origin_mass;
  for (std::size_t c = 0; c + 1 < r.size(); ++c) {
    double cell = 0.0;
    const double s = (v[c + 1] - v[c]) / (r[c + 1] - r[c]);
    for (int gq = 0; gq < kG; ++gq) {
      const std::size_t e = kG * c + gq;
      cell += rule.w[e] * pow_q(v[c] + s * (rule.x[e] - r[c]), q);
    }
    cum[c + 1] = cum[c] + cell;
  }
  return cum;
}

// ---------------------------------------------------------------------------
// Decreasing rearrangement.

namespace {

// lambda_theta{ u > t } for the PWL interpolant, exact per segment.
double level_mass(const RadialProfile& u, double t) {
  const auto& r = u.grid().nodes();
  const auto v = u.values();
  const auto& mp = u.grid().params();
  const double om = mp.omega_theta, th = mp.theta;
  double mass = 0.0;
  if (v[0] > t) mass += RadialGrid::segment_mass(om, th, 0.0, r[0]);
  for (std::size_t c = 0; c + 1 < r.size(); ++c) {
    const double va = v[c], vb = v[c + 1];
    const double lo = std::min(va, vb), hi = std::max(va, vb);
    if (t >= hi) continue;
    if (t < lo) {
      mass += RadialGrid::segment_mass(om, th, r[c], r[c + 1]);
      continue;
    }
    const double x = r[c] + (t - va) / (vb - va) * (r[c + 1] - r[c]);
    if (vb < va)  // decreasing: {u>t} is the left part
      mass += RadialGrid::segment_mass(om, th, r[c], x);
    else
      mass += RadialGrid::segment_mass(om, th, x, r[c + 1]);
  }
  return mass;
}

// Exact inverse of the level-mass function, organized around the sorted node
// values so each query touches only the cells whose range straddles the
// active value bracket.
struct LevelStructure {
  const RadialProfile& u;
  std::vector<double> levels;         // node values, descending, unique
  std::vector<double> lambda;         // level_mass at each level
  std::vector<std::vector<int>> active;  // cells straddling (levels[k+1], levels[k])

  explicit LevelStructure(const RadialProfile& prof) : u(prof) {
    levels.assign(prof.values().begin(), prof.values().end());
    levels.push_back(0.0);
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    lambda.resize(levels.size());
    for (std::size_t k = 0; k < levels.size(); ++k)
      lambda[k] = level_mass(prof, levels[k]);
    active.resize(levels.size());
    const auto v = prof.values();
    for (int c = 0; c + 1 < int(v.size()); ++c) {
      const double lo = std::min(v[c], v[c + 1]);
      const double hi = std::max(v[c], v[c + 1]);
      if (lo == hi) continue;
      // brackets k with (levels[k+1], levels[k]) intersecting (lo, hi)
      const auto first = std::lower_bound(levels.begin(), levels.end(), hi,
                                          std::greater<>());
      for (std::size_t k = first - levels.begin();
           k + 1 < levels.size() && levels[k] > lo; ++k)
        active[k].push_back(c);
    }
  }

  // mass{u > t} for t inside bracket k, reusing lambda at the bracket top
  double mass_at(std::size_t k, double t) const {
    const auto& r = u.grid().nodes();
    const auto v = u.values();
    const auto& mp = u.grid().params();
    double m = lambda[k];
    for (int c : active[k]) {
      const double va = v[c], vb = v[c + 1];
      auto cross = [&](double lev) {
        return r[c] + (lev - va) / (vb - va) * (r[c + 1] - r[c]);
      };
      const double hi_lev = levels[k];
      const double lo_cell = std::min(va, vb), hi_cell = std::max(va, vb);
      const double x_top = (hi_lev >= hi_cell) ? (va > vb ? r[c] : r[c + 1])
                                               : cross(hi_lev);
      const double x_t = (t <= lo_cell) ? (va > vb ? r[c + 1] : r[c])
                                        : cross(t);
      // lowering the level from levels[k] to t grows {u > t} by the sweep
      // between the two crossings
      const double a = std::min(x_top, x_t), b = std::max(x_top, x_t);
      m += RadialGrid::segment_mass(mp.omega_theta, mp.theta, a, b);
    }
    // origin segment enters when t drops below v[0]
    if (levels[k] >= v[0] && t < v[0])
      m += RadialGrid::segment_mass(mp.omega_theta, mp.theta, 0.0,
                                    r.front());
    return m;
  }

  // smallest t with mass{u > t} <= target
  double invert(double target) const {
    if (lambda.front() > target) return levels.front();
    std::size_t lo = 0, hi = lambda.size() - 1;
    if (lambda[hi] <= target) return levels[hi];  // all positive mass fits
    // bracket with lambda[lo] <= target < lambda[lo+1]
    while (lo + 1 < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (lambda[mid] <= target)
        lo = mid;
      else
        hi = mid;
    }
    // t lives in (levels[hi], levels[lo]]
    double t_lo = levels[hi], t_hi = levels[lo];
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (t_lo + t_hi);
      if (mass_at(lo, mid) > target)
        t_lo = mid;
      else
        t_hi = mid;
    }
    return t_hi;
  }
};

}  // namespace

RadialProfile decreasing_rearrange(const RadialProfile& u) {
  const auto v = u.values();
  bool sorted = true;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i + 1] > v[i]) {
      sorted = false;
      break;
    }
  if (sorted) return u;

  const auto& mp = u.grid().params();
  const auto& r = u.grid().nodes();
  const LevelStructure ls(u);
  std::vector<double> w(v.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double target =
        RadialGrid::segment_mass(mp.omega_theta, mp.theta, 0.0, r[i]);
    w[i] = ls.invert(target);
  }
  for (std::size_t i = 1; i < w.size(); ++i) w[i] = std::min(w[i], w[i - 1]);
  return RadialProfile(u.grid_ptr(), std::move(w));
}

double layer_cake_power_theta(const RadialProfile& u, double q) {
  // integral u^q dlambda = integral_0^inf q t^{q-1} lambda(t) dt, integrated
  // bracket by bracket between the sorted node values.
  std::vector<double> levels(u.values().begin(), u.values().end());
  levels.push_back(0.0);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    const double a = levels[k], b = levels[k + 1];
    const double h = b - a;
    for (int g = 0; g < kG; ++g) {
      const double t = a + h * kGx[g];
      total += kGw[g] * h * q * std::pow(t, q - 1.0) * level_mass(u, t);
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// Radial pointwise bound.

namespace {

std::vector<double> moser_values(const std::vector<double>& r, int n, double p,
                                 double theta, double omega_alpha) {
  const double re = std::exp(-double(n) / (theta + 1.0));
  const double oa = std::pow(omega_alpha, -1.0 / p);
  const double plateau = oa * std::pow(n / (theta + 1.0), (p - 1.0) / p);
  const double ramp = oa * std::pow(n / (theta + 1.0), -1.0 / p);
  std::vector<double> v(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] <= re)
      v[i] = plateau;
    else if (r[i] < 1.0)
      v[i] = ramp * std::log(1.0 / r[i]);
    else
      v[i] = 0.0;
  }
  return v;
}

}  // namespace

double radial_bound_constant(const MeasureParams& mp) {
  static std::mutex mu;
  static std::map<std::tuple<double, double, int>, double> cache;
  const auto key =
      std::make_tuple(mp.p, mp.theta, static_cast<int>(mp.convention));
  {
    std::scoped_lock lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }

  auto grid = RadialGrid::make(mp, 20.0, 2048, Grading::geometric);
  const auto& r = grid->nodes();
  const double d = (mp.alpha + mp.theta * (mp.p - 1.0)) / mp.p;

  double worst = 0.0;
  auto consider = [&](std::vector<double> vals) {
    RadialProfile u(grid, std::move(vals));
    const double np = std::pow(full_norm(u), mp.p);
    if (!(np > 0.0)) return;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double ratio =
          std::pow(u.value(i), mp.p) * std::pow(r[i], d) / np;
      worst = std::max(worst, ratio);
    }
  };

  for (double a : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    std::vector<double> ramp(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      ramp[i] = std::max(0.0, 1.0 - r[i] / a);
    consider(std::move(ramp));
  }
  for (double a : {0.5, 1.0, 2.0}) {
    std::vector<double> e(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) e[i] = std::exp(-r[i] / a);
    consider(std::move(e));
  }
  for (int n : {1, 2, 5, 10, 20})
    consider(moser_values(r, n, mp.p, mp.theta, mp.omega_alpha));

  const double c = 2.0 * worst;
  std::scoped_lock lock(mu);
  cache[key] = c;
  return c;
}

double pointwise_bound_margin(const RadialProfile& u) {
  const auto& mp = u.grid().params();
  const double c = radial_bound_constant(mp);
  const double np = std::pow(full_norm(u), mp.p);
  const double d = (mp.alpha + mp.theta * (mp.p - 1.0)) / mp.p;
  const auto& r = u.grid().nodes();
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double bound = c * np * std::pow(r[i], -d);
    margin = std::min(margin, bound - std::pow(u.value(i), mp.p));
  }
  return margin;
}

// ---------------------------------------------------------------------------
// Import/export.

void write_csv(const RadialProfile& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  out.precision(17);
  out << "r,value\n";
  const auto& r = u.grid().nodes();
  for (std::size_t i = 0; i < r.size(); ++i)
    out << r[i] << "," << u.value(i) << "\n";
}

RadialProfile read_csv(const MeasureParams& mp, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  std::string line;
  std::vector<double> r, v;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'r' || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("read_csv: malformed line: " + line);
    r.push_back(std::stod(line.substr(0, comma)));
    v.push_back(std::stod(line.substr(comma + 1)));
  }
  auto grid = RadialGrid::from_nodes(mp, std::move(r));
  return RadialProfile(std::move(grid), std::move(v));
}

std::string to_json_string(const RadialProfile& u) {
  nlohmann::json j;
  j["r"] = u.grid().nodes();
  j["v"] = std::vector<double>(u.values().begin(), u.values().end());
  return j.dump();
}

RadialProfile profile_from_json_string(const MeasureParams& mp,
                                       const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  auto grid = RadialGrid::from_nodes(mp, j.at("r").get<std::vector<double>>());
  return RadialProfile(std::move(grid), j.at("v").get<std::vector<double>>());
}

}  // namespace adtm
