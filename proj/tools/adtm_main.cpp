// Command-line driver: every computation as a subcommand with
// machine-readable JSON/CSV reports.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "adtm/asymptotics.hpp"
#include "adtm/functional.hpp"
#include "adtm/special.hpp"

using nlohmann::json;
using namespace adtm;

namespace {

constexpr const char* kVersion = "adtm 0.1.0";

struct RunConfig {
  double p = 2.0;
  double theta = 1.0;
  double eta = 0.0;
  double mu = 0.0;       // absolute exponent, or
  double mu_frac = 0.0;  // fraction of mu_crit (mutually exclusive)
  double epsilon = 1e-3;
  int n = 10;
  double rho = 1.0;
  double z = 1.0;
  std::size_t grid_nodes = 4096;
  double r_out = 20.0;
  std::string grading = "geometric";
  double tol = 1e-7;
  long max_iter = 50000;
  std::uint64_t seed = 0;
  int jobs = 1;
  double mu_max = 0.25;
  int mu_points = 8;
  std::string out_path;
  std::string format = "json";
  std::string convention = "sphere";
};

OmegaConvention convention_of(const std::string& s) {
  if (s == "sphere") return OmegaConvention::sphere;
  if (s == "literal") return OmegaConvention::literal;
  throw std::invalid_argument("unknown omega convention: " + s);
}

json config_json(const RunConfig& c) {
  json grid{{"r_out", c.r_out},
            {"n_nodes", c.grid_nodes},
            {"grading", c.grading}};
  json solver{{"tol", c.tol}, {"max_iter", c.max_iter}, {"seed", c.seed}};
  json output{{"path", c.out_path}, {"format", c.format}};
  json j{{"p", c.p},           {"theta", c.theta},
         {"eta", c.eta},       {"epsilon", c.epsilon},
         {"n", c.n},           {"rho", c.rho},
         {"z", c.z},           {"grid", grid},
         {"solver", solver},   {"output", output},
         {"jobs", c.jobs},     {"mu_max", c.mu_max},
         {"mu_points", c.mu_points}};
  if (c.mu > 0.0) j["mu"] = c.mu;
  if (c.mu_frac > 0.0) j["mu_frac"] = c.mu_frac;
  return j;
}

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
  return buf;
}

json envelope(const char* command, const RunConfig& c) {
  json j;
  j["command"] = command;
  j["config"] = config_json(c);
  j["omega_convention"] = c.convention;
  j["version"] = kVersion;
  j["timestamp"] = timestamp_now();
  return j;
}

void emit(const json& j, const RunConfig& c) {
  if (c.out_path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(c.out_path);
  if (!out) throw std::runtime_error("cannot open " + c.out_path);
  out << j.dump(2) << "\n";
}

void emit_profile_csv(const RadialProfile& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  out << "r,value\n";
  for (std::size_t i = 0; i < u.size(); ++i)
    out << u.grid().nodes()[i] << "," << u.value(i) << "\n";
}

json profile_json(const RadialProfile& u) {
  return json{{"r", u.grid().nodes()},
              {"v", std::vector<double>(u.values().begin(), u.values().end())}};
}

MeasureParams params_of(const RunConfig& c) {
  return MeasureParams::make(c.p, c.theta, convention_of(c.convention));
}

std::shared_ptr<const RadialGrid> grid_of(const RunConfig& c,
                                          const MeasureParams& mp) {
  return RadialGrid::make(mp, c.r_out, c.grid_nodes,
                          grading_from_string(c.grading));
}

double resolve_mu(const RunConfig& c, const MeasureParams& mp) {
  if (c.mu > 0.0 && c.mu_frac > 0.0)
    throw std::invalid_argument("--mu and --mu-frac are mutually exclusive");
  if (c.mu > 0.0) return c.mu;
  if (c.mu_frac > 0.0) return c.mu_frac * mp.mu_crit;
  throw std::invalid_argument("one of --mu or --mu-frac is required");
}

json solve_report_json(const SolveReport& rep) {
  json j;
  j["value"] = std::isfinite(rep.value) ? json(rep.value) : json();
  j["iterations"] = rep.iterations;
  j["grad_residual"] = rep.grad_residual;
  j["concentration_fraction"] = rep.concentration_fraction;
  j["vanishing_indicator"] = rep.vanishing_indicator;
  j["converged"] = rep.converged;
  j["status"] = rep.status;
  j["value_trace"] = rep.value_trace;
  if (rep.maximizer) j["maximizer"] = profile_json(*rep.maximizer);
  return j;
}

// deterministic trial family for the vanishing scan
std::vector<RadialProfile> trial_family(
    const std::shared_ptr<const RadialGrid>& grid) {
  std::vector<RadialProfile> fam;
  const auto& r = grid->nodes();
  for (int k = 0; k < 8; ++k) {
    const double w = 0.4 * std::pow(10.0, k / 7.0);  // widths 0.4 .. 4
    std::vector<double> v(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      v[i] = std::exp(-(r[i] / w) * (r[i] / w));
    fam.push_back(normalize(RadialProfile(grid, std::move(v))));
  }
  for (double w : {1.0, 3.0}) {
    std::vector<double> v(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      v[i] = std::max(0.0, 1.0 - r[i] / w);
    fam.push_back(normalize(RadialProfile(grid, std::move(v))));
  }
  return fam;
}

int cmd_sup(const RunConfig& c) {
  const auto mp = params_of(c);
  auto grid = grid_of(c, mp);
  const double mu = resolve_mu(c, mp);
  const auto fp = FunctionalParams::make(mu, c.eta, mp);
  SolveOptions opts;
  opts.tol = c.tol;
  opts.max_iter = c.max_iter;
  opts.seed = c.seed;
  opts.rho = c.rho;
  opts.allow_supercritical = true;
  const SolveReport rep = maximize_ad(fp, grid, opts);

  json j = envelope("sup", c);
  j["mu"] = mu;
  j["mu_crit"] = mp.mu_crit;
  j["report"] = solve_report_json(rep);
  emit(j, c);
  if (c.format == "csv" && !c.out_path.empty() && rep.maximizer)
    emit_profile_csv(*rep.maximizer, c.out_path + ".profile.csv");
  return rep.converged ? 0 : 2;
}

int cmd_moser(const RunConfig& c) {
  const auto mp = params_of(c);
  const auto cf = moser_closed_form(c.n, c.rho, mp);
  const double cert = sharpness_certificate(c.n, c.rho, mp);
  json j = envelope("moser", c);
  j["grad_p_norm"] = cf.grad_p;
  j["lp_theta_norm_p"] = cf.lp_theta_p;
  j["plateau_radius"] = cf.plateau_radius;
  j["plateau_value"] = cf.plateau_value;
  j["certificate"] = cert;
  j["certificate_limit"] =
      mp.omega_theta * std::pow(c.rho, mp.theta + 1.0) / (mp.theta + 1.0);
  if (c.format == "csv" && !c.out_path.empty()) {
    auto grid = grid_of(c, mp);
    emit_profile_csv(moser_profile(c.n, c.rho, grid),
                     c.out_path + ".profile.csv");
  }
  emit(j, c);
  return 0;
}

int cmd_profile(const RunConfig& c) {
  const auto mp = params_of(c);
  const auto b = BlowupProfile::make(mp);
  auto grid = grid_of(c, mp);
  json j = envelope("profile", c);
  j["c_at"] = b.c_at;
  j["normalization"] = w_normal_check(b, c.r_out);
  j["ode_residual"] = w_ode_residual(b, *grid);
  if (c.format == "csv" && !c.out_path.empty()) {
    std::ofstream out(c.out_path + ".profile.csv");
    out.precision(17);
    out << "r,w\n";
    for (double r : grid->nodes()) out << r << "," << w_profile(b, r) << "\n";
  }
  emit(j, c);
  return 0;
}

int cmd_green(const RunConfig& c) {
  const auto mp = params_of(c);
  auto grid = grid_of(c, mp);
  const auto gf = solve_green(c.eta, grid, c.tol);
  json j = envelope("green", c);
  j["a_eta"] = gf.a_eta;
  j["residual"] = gf.residual;
  j["fit_slope"] = gf.fit_slope;
  j["lp_theta_norm_p"] = gf.lp_theta_norm_p;
  if (c.format == "csv" && !c.out_path.empty())
    emit_profile_csv(gf.profile, c.out_path + ".profile.csv");
  else
    j["profile"] = profile_json(gf.profile);
  emit(j, c);
  return 0;
}

int cmd_threshold(const RunConfig& c) {
  const auto mp = params_of(c);
  auto grid = grid_of(c, mp);
  const auto gf = solve_green(c.eta, grid, c.tol);
  json j = envelope("threshold", c);
  j["a_eta"] = gf.a_eta;
  j["cc_threshold"] = cc_threshold(gf);

  // the non-integer exponent case couples the two small parameters
  const bool integer_p = std::abs(mp.p - std::round(mp.p)) < 1e-12;
  const double eps_h = (!integer_p && c.eta > 0.0) ? c.eta : c.epsilon;
  const auto tf = critical_test_function(c.epsilon, c.eta, gf);
  j["test_function"] = json{{"norm", tf.norm},
                            {"value", tf.ad.value},
                            {"tail_bound", tf.ad.tail_bound},
                            {"c_pow", tf.c_pow},
                            {"b", tf.b},
                            {"y_p_eta", tf.y_p_eta},
                            {"glue_defect", tf.glue_defect},
                            {"remainder_bound", tf.remainder_bound}};
  const auto hp = h_epsilon_eta(eps_h, c.eta, gf);
  j["h_partial"] = json{{"leading", hp.leading},
                        {"correction", hp.correction},
                        {"partial_sum", hp.partial_sum},
                        {"remainder_bound", hp.remainder_bound},
                        {"epsilon_used", eps_h}};
  emit(j, c);
  return 0;
}

int cmd_b2(const RunConfig& c) {
  RunConfig cc = c;
  cc.p = 2.0;
  const auto mp = params_of(cc);
  auto grid = grid_of(cc, mp);
  const auto res = b2_solve(cc.theta, grid);
  json j = envelope("b2", cc);
  j["b2"] = res.b2;
  j["quotient"] = res.quotient;
  j["converged"] = res.converged;
  j["iterations"] = res.iterations;
  j["attainment_threshold"] =
      2.0 * (1.0 + 2.0 * cc.eta) / ((1.0 + cc.eta) * (1.0 + cc.eta) * res.b2);
  j["mu_crit"] = mp.mu_crit;
  emit(j, cc);
  return res.converged ? 0 : 2;
}

int cmd_nonexist(const RunConfig& c) {
  RunConfig cc = c;
  cc.p = 2.0;
  const auto mp = params_of(cc);
  auto grid = grid_of(cc, mp);
  const auto fam = trial_family(grid);

  std::vector<double> mus(cc.mu_points);
  for (int i = 0; i < cc.mu_points; ++i)
    mus[i] = cc.mu_max * mp.mu_crit * double(i + 1) / double(cc.mu_points);

  std::vector<json> rows(mus.size());
  std::mutex io;
  auto work = [&](int idx) {
    const double mu = mus[idx];
    json signs = json::array();
    bool all_negative = true;
    for (const auto& u : fam) {
      const double d = ishiwata_derivative(u, mu, cc.eta);
      signs.push_back(d);
      all_negative = all_negative && (d < 0.0);
    }
    json row{{"mu", mu}, {"derivatives", signs}, {"all_negative", all_negative}};
    std::scoped_lock lock(io);
    rows[idx] = std::move(row);
  };
  if (cc.jobs > 1) {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < cc.jobs; ++t)
      pool.emplace_back([&] {
        for (int i = next++; i < int(mus.size()); i = next++) work(i);
      });
    for (auto& th : pool) th.join();
  } else {
    for (int i = 0; i < int(mus.size()); ++i) work(i);
  }

  // paper-style smallness bound with the series constant estimated from the
  // trial family; reported as an estimate only
  const double gamma_bar = 0.75 * mp.mu_crit;
  double c_est = 0.0;
  for (const auto& u : fam) {
    const double k = grad_integral_alpha(u, 2.0);
    const double n2 = power_integral_theta(u, 2.0);
    const double j_val = ishiwata_j(u, gamma_bar * k, 0.0, 1.0);
    c_est = std::max(c_est, k / n2 * j_val);
  }
  c_est *= 1.5;
  const double series = 12.0;  // sum_j (j+2)(2/3)^j
  const double c_paper = 4.0 / (gamma_bar * gamma_bar) * c_est * series;
  const double bound = std::min(mp.mu_crit / 4.0, 1.0 / c_paper);

  json j = envelope("nonexist", cc);
  j["mu_crit"] = mp.mu_crit;
  j["scan"] = rows;
  j["estimated_bound"] = bound;
  bool all = true;
  for (const auto& row : rows) all = all && row.at("all_negative").get<bool>();
  j["all_negative"] = all;
  emit(j, cc);
  return 0;
}

int cmd_identities(const RunConfig& c) {
  json j = envelope("identities", c);
  const auto res = special::lt_identity_residuals(c.z, c.p);
  j["lt_eq1"] = res.eq1;
  j["lt_eq2"] = res.eq2;
  j["lt_eq3"] = res.eq3;
  j["gamma_half"] = special::gamma_fn(0.5);
  j["digamma_p"] = special::digamma(c.p);
  j["beta_p_minus_1_1"] = special::beta_integral(c.p - 1.0, 1.0);
  j["omega_theta"] = omega(c.theta, convention_of(c.convention));
  emit(j, c);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharp exponential-class functionals on fractional-dimension "
               "radial measures"};
  app.require_subcommand(1);

  RunConfig c;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--p", c.p, "growth exponent p >= 2");
    sub->add_option("--theta", c.theta, "measure dimension parameter");
    sub->add_option("--eta", c.eta, "enhancement strength in [0,1]");
    sub->add_option("--mu", c.mu, "absolute exponent mu");
    sub->add_option("--mu-frac", c.mu_frac, "mu as a fraction of mu_crit");
    sub->add_option("--epsilon", c.epsilon, "test-function scale");
    sub->add_option("--n", c.n, "sequence index");
    sub->add_option("--rho", c.rho, "dilation scale");
    sub->add_option("--z", c.z, "identity evaluation point");
    sub->add_option("--grid-nodes", c.grid_nodes, "node count");
    sub->add_option("--r-out", c.r_out, "outer radius");
    sub->add_option("--grading", c.grading, "uniform|geometric|hybrid");
    sub->add_option("--tol", c.tol, "solver tolerance");
    sub->add_option("--max-iter", c.max_iter, "iteration cap");
    sub->add_option("--seed", c.seed, "deterministic seed");
    sub->add_option("--jobs", c.jobs, "parallel parameter points");
    sub->add_option("--mu-max", c.mu_max, "scan upper end (fraction of mu_crit)");
    sub->add_option("--mu-points", c.mu_points, "scan resolution");
    sub->add_option("--out", c.out_path, "report path (stdout otherwise)");
    sub->add_option("--format", c.format, "json|csv");
    sub->add_option("--omega-convention", c.convention, "sphere|literal");
    sub->set_config("--config", "", "key=value defaults, flags win");
  };

  auto* sup = app.add_subcommand("sup", "maximize the constrained functional");
  auto* moser = app.add_subcommand("moser", "Moser sequence norms and certificate");
  auto* profile = app.add_subcommand("profile", "blow-up bubble diagnostics");
  auto* green = app.add_subcommand("green", "Green-type function");
  auto* threshold =
      app.add_subcommand("threshold", "concentration threshold and test function");
  auto* b2 = app.add_subcommand("b2", "quadratic interpolation constant");
  auto* nonexist =
      app.add_subcommand("nonexist", "vanishing-derivative scan over mu");
  auto* identities =
      app.add_subcommand("identities", "special-function identity residuals");
  for (auto* sub :
       {sup, moser, profile, green, threshold, b2, nonexist, identities})
    add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // uniform error contract
  }

  try {
    if (sup->parsed()) return cmd_sup(c);
    if (moser->parsed()) return cmd_moser(c);
    if (profile->parsed()) return cmd_profile(c);
    if (green->parsed()) return cmd_green(c);
    if (threshold->parsed()) return cmd_threshold(c);
    if (b2->parsed()) return cmd_b2(c);
    if (nonexist->parsed()) return cmd_nonexist(c);
    if (identities->parsed()) return cmd_identities(c);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
