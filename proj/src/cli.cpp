#include "retrial/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "retrial/fixed_point.hpp"
#include "retrial/lyapunov.hpp"
#include "retrial/mean_field.hpp"
#include "retrial/report.hpp"
#include "retrial/reproduce.hpp"
#include "retrial/simulator.hpp"
#include "retrial/sojourn.hpp"

namespace retrial {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Common {
  double lambda = 1.0;
  double mu = 5.0;
  double theta = 2.0;
  int d1 = 2;
  int d2 = 1;
  std::string format = "csv";
  std::string out_path;

  ModelParams params() const {
    return ModelParams(lambda, mu, theta, d1, d2);
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--lambda", c.lambda, "primary arrival rate per server")
      ->capture_default_str();
  cmd->add_option("--mu", c.mu, "service rate")->capture_default_str();
  cmd->add_option("--theta", c.theta, "retrial rate per orbit customer")
      ->capture_default_str();
  cmd->add_option("--d1", c.d1, "servers probed by a primary arrival")
      ->capture_default_str();
  cmd->add_option("--d2", c.d2, "servers probed by a retrial")
      ->capture_default_str();
  cmd->add_option("--format", c.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--out", c.out_path, "write to FILE instead of stdout");
  // Consumed by expand_config before parsing; declared for --help.
  cmd->add_option("--config", "key = value file mirroring these flags");
}

nlohmann::ordered_json params_meta(const Common& c) {
  return {{"lambda", c.lambda}, {"mu", c.mu},  {"theta", c.theta},
          {"d1", c.d1},         {"d2", c.d2}};
}

void emit(const Common& c, const Table& table, nlohmann::ordered_json meta,
          std::ostream& out) {
  const OutputFormat fmt = parse_format(c.format);
  if (c.out_path.empty()) {
    write_table(table, meta, fmt, out);
  } else {
    write_atomically(c.out_path, [&](std::ostream& file) {
      write_table(table, meta, fmt, file);
    });
  }
}

nlohmann::ordered_json base_meta(const Common& c, const char* command) {
  nlohmann::ordered_json meta;
  meta["command"] = command;
  meta["version"] = kVersion;
  meta["params"] = params_meta(c);
  return meta;
}

struct OdeOptions {
  int k_max = 64;
  double t_max = 200.0;
  double dt = 1e-3;
  int sample_every = 1000;
  std::string closure = "zero";
  std::string init = "empty";
};

void add_ode(CLI::App* cmd, OdeOptions& o) {
  cmd->add_option("--k-max", o.k_max, "highest orbit level tracked")
      ->check(CLI::Range(1, 1 << 20))
      ->capture_default_str();
  cmd->add_option("--t-max", o.t_max, "integration horizon")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--dt", o.dt, "RK4 step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--sample-every", o.sample_every, "steps between samples")
      ->check(CLI::Range(1, 1 << 30))
      ->capture_default_str();
  cmd->add_option("--closure", o.closure, "zero or fixed-point-tail")
      ->check(CLI::IsMember({"zero", "fixed-point-tail"}))
      ->capture_default_str();
  cmd->add_option("--init", o.init, "empty or fixed-point")
      ->check(CLI::IsMember({"empty", "fixed-point"}))
      ->capture_default_str();
}

OdeConfig ode_config(const OdeOptions& o) {
  OdeConfig cfg;
  cfg.k_max = o.k_max;
  cfg.t_max = o.t_max;
  cfg.dt = o.dt;
  cfg.sample_every = o.sample_every;
  cfg.closure = o.closure == "zero" ? ClosureRule::kZeroInflow
                                    : ClosureRule::kFixedPointTail;
  return cfg;
}

Trajectory run_ode(const Common& c, const OdeOptions& o, FixedPoint& fp) {
  const ModelParams params = c.params();
  fp = fixed_point(params, o.k_max);
  const StateVector init = o.init == "empty" ? StateVector::empty(o.k_max)
                                             : StateVector::from_fixed_point(fp);
  return integrate(init, params, ode_config(o));
}

int cmd_fixed_point(const Common& c, int k_max, std::ostream& out) {
  const FixedPoint fp = fixed_point(c.params(), k_max);
  Table table({"k", "pi_W", "pi_I"});
  for (int k = 0; k <= fp.k_max; ++k) {
    table.add({std::int64_t{k}, fp.pi_W[k], fp.pi_I[k]});
  }
  auto meta = base_meta(c, "fixed-point");
  meta["eta_star"] = fp.eta_star;
  meta["k_max"] = fp.k_max;
  if (auto k = joint_monotone_threshold(fp.pi_W, fp.pi_I)) {
    meta["threshold_K"] = *k;
  } else {
    meta["threshold_K"] = nullptr;
  }
  emit(c, table, std::move(meta), out);
  return 0;
}

int cmd_ode(const Common& c, const OdeOptions& o, std::ostream& out) {
  FixedPoint fp;
  const Trajectory traj = run_ode(c, o, fp);
  Table table({"t", "k", "s_I", "s_W"});
  for (const auto& s : traj.samples) {
    for (int k = 0; k <= s.k_max(); ++k) {
      table.add({s.t, std::int64_t{k}, s.s_I[k], s.s_W[k]});
    }
  }
  auto meta = base_meta(c, "ode");
  meta["k_max"] = o.k_max;
  meta["dt"] = o.dt;
  meta["t_max"] = o.t_max;
  meta["closure"] = o.closure;
  meta["steps"] = traj.steps;
  meta["clamp_count"] = traj.clamp_count;
  meta["max_level0_defect"] = traj.max_level0_defect;
  meta["final_sup_distance"] =
      sup_distance(traj.final_state(), StateVector::from_fixed_point(fp));
  emit(c, table, std::move(meta), out);
  return 0;
}

int cmd_sojourn(const Common& c, int k_sum, double tol, std::ostream& out) {
  const ModelParams params = c.params();
  const FixedPoint fp = fixed_point(params, k_sum + 2);
  const SojournTable t = expected_sojourn(fp, params, k_sum, tol);
  Table table({"k", "t_primary", "t_retrial", "summand"});
  for (int k = 0; k < static_cast<int>(t.summands.size()); ++k) {
    table.add({std::int64_t{k}, t.t_primary[k],
               k >= 1 ? t.retrial(k) : std::nan(""), t.summands[k]});
  }
  auto meta = base_meta(c, "sojourn");
  meta["expected_sojourn"] = t.total;
  meta["terms"] = t.k_sum;
  meta["tail_bound"] = t.tail_bound;
  meta["converged"] = t.converged;
  meta["negative_increments"] = t.negative_increments;
  emit(c, table, std::move(meta), out);
  return t.converged ? 0 : 1;
}

int cmd_convergence(const Common& c, const OdeOptions& o,
                    std::optional<double> fit_start,
                    std::optional<double> fit_end, double delta_fraction,
                    std::ostream& out) {
  FixedPoint fp;
  const Trajectory traj = run_ode(c, o, fp);
  std::optional<std::array<double, 2>> window;
  if (fit_start || fit_end) {
    window = std::array<double, 2>{fit_start.value_or(o.t_max / 2),
                                   fit_end.value_or(o.t_max)};
  }
  const DecayFit fit = fit_decay(traj, fp, window);
  // Weights are built from the sample nearest the middle of the fit window.
  const double t_mid = 0.5 * (fit.window[0] + fit.window[1]);
  const StateVector* at = &traj.samples.front();
  for (const auto& s : traj.samples) {
    if (std::abs(s.t - t_mid) < std::abs(at->t - t_mid)) at = &s;
  }
  const double delta = delta_fraction * fit.delta_hat;
  PotentialWeights weights = PotentialWeights::unit(0);
  std::string weight_error;
  try {
    weights = compute_weights(*at, fp, c.params(), delta);
  } catch (const NumericError& e) {
    weight_error = e.what();
    weights.feasible = false;
  }
  bool dominated = false;
  try {
    dominated = check_domination(traj, fp);
  } catch (const std::invalid_argument&) {
    dominated = false;
  }
  Table table({"metric", "value"});
  table.add({std::string("c0_hat"), fit.c0_hat});
  table.add({std::string("delta_hat"), fit.delta_hat});
  table.add({std::string("r_squared"), fit.r_squared});
  table.add({std::string("fit_points"), static_cast<std::int64_t>(fit.points)});
  table.add({std::string("weights_delta"), delta});
  table.add({std::string("weights_at_t"), at->t});
  table.add({std::string("weights_feasible"), weights.feasible});
  table.add({std::string("domination_preserved"), dominated});
  auto meta = base_meta(c, "convergence");
  meta["fit_window"] = {fit.window[0], fit.window[1]};
  meta["closure"] = o.closure;
  meta["w"] = weights.w;
  meta["v"] = weights.v;
  if (!weight_error.empty()) meta["weights_error"] = weight_error;
  emit(c, table, std::move(meta), out);
  return 0;
}

struct SimOptions {
  int n = 1000;
  std::uint64_t seed = 1;
  int replications = 16;
  std::string policy = "migrate_min";
  std::uint64_t events = 1'250'000;
  std::optional<std::uint64_t> warmup;
  int k_max = 32;
  int threads = 0;
  bool without_replacement = false;
};

SimConfig sim_config(const Common& c, const SimOptions& s) {
  SimConfig cfg{c.params()};
  cfg.n = s.n;
  cfg.seed = s.seed;
  cfg.replications = s.replications;
  cfg.policy = parse_policy(s.policy);
  cfg.horizon_events = s.events;
  cfg.warmup_events = s.warmup.value_or(s.events / 5);
  cfg.k_max = s.k_max;
  cfg.threads = s.threads;
  cfg.probe_without_replacement = s.without_replacement;
  cfg.validate();
  return cfg;
}

int cmd_simulate(const Common& c, const SimOptions& s, std::ostream& out) {
  const SimConfig cfg = sim_config(c, s);
  const SimResult res = run(cfg);
  const FixedPoint fp = fixed_point(cfg.params, cfg.k_max);
  Table table({"k", "x_W", "x_W_se", "x_I", "x_I_se", "pi_W", "pi_I"});
  for (int k = 0; k <= cfg.k_max; ++k) {
    table.add({std::int64_t{k}, res.mean.x_W[k], res.std_error.x_W[k],
               res.mean.x_I[k], res.std_error.x_I[k], fp.pi_W[k], fp.pi_I[k]});
  }
  auto meta = base_meta(c, "simulate");
  meta["seed"] = cfg.seed;
  meta["n"] = cfg.n;
  meta["policy"] = std::string(to_string(cfg.policy));
  meta["replications"] = cfg.replications;
  meta["events"] = cfg.horizon_events;
  meta["warmup_events"] = cfg.warmup_events;
  meta["busy_fraction"] = res.busy_fraction;
  meta["busy_fraction_se"] = res.busy_fraction_se;
  meta["mean_orbit"] = res.mean_orbit;
  meta["mean_orbit_se"] = res.mean_orbit_se;
  meta["sup_gap"] = snapshot_gap(res.mean, fp);
  emit(c, table, std::move(meta), out);
  return 0;
}

int cmd_reproduce(const Common& c, const std::string& target,
                  std::ostream& out, std::ostream& err) {
  ReproduceResult r = reproduce(target);
  auto meta = base_meta(c, "reproduce");
  meta["params"] = {{"lambda", 1.0}, {"mu", 5.0}, {"theta", 2.0}};
  for (auto& [key, value] : r.meta.items()) meta[key] = value;
  emit(c, r.table, std::move(meta), out);
  if (r.cells > 0) {
    err << target << ": " << (r.cells - r.failures) << "/" << r.cells
        << " cells within tolerance\n";
  }
  for (const auto& t : r.trends) {
    err << target << ": series " << t.series << " decreasing in " << t.axis
        << ": " << (t.decreasing ? "yes" : "no") << '\n';
  }
  return r.pass() ? 0 : 1;
}

}  // namespace

std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::vector<std::string> result;
  result.reserve(args.size());
  std::vector<std::string> from_file;
  std::size_t insert_at = std::string::npos;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      result.push_back(args[i]);
      continue;
    }
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    if (insert_at == std::string::npos) insert_at = result.size();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) {
        line.erase(hash);
      }
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw UsageError(path + ":" + std::to_string(lineno) +
                         ": expected key = value");
      }
      std::string key = trim(line.substr(0, eq));
      if (key.rfind("--", 0) != 0) key = "--" + key;
      from_file.push_back(key);
      from_file.push_back(trim(line.substr(eq + 1)));
    }
  }
  if (insert_at != std::string::npos) {
    // Right after the subcommand name, so explicit flags override.
    result.insert(result.begin() + static_cast<std::ptrdiff_t>(insert_at),
                  from_file.begin(), from_file.end());
  }
  return result;
}

int run_cli(std::vector<std::string> args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Mean-field analysis and simulation of retrial supermarket "
               "models with power-of-d probing"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common common;
  OdeOptions ode;
  SimOptions sim;
  int fp_k_max = kDefaultKMax;
  int k_sum = kDefaultSojournTerms;
  double term_tol = kDefaultTermTol;
  std::optional<double> fit_start, fit_end;
  double delta_fraction = 0.5;
  std::string target;

  auto* fp_cmd = app.add_subcommand("fixed-point", "stationary fixed point");
  add_common(fp_cmd, common);
  fp_cmd->add_option("--k-max", fp_k_max, "highest level reported")
      ->check(CLI::Range(1, 1 << 24))
      ->capture_default_str();

  auto* ode_cmd = app.add_subcommand("ode", "integrate the mean-field ODE");
  add_common(ode_cmd, common);
  add_ode(ode_cmd, ode);

  auto* soj_cmd = app.add_subcommand("sojourn", "expected sojourn time");
  add_common(soj_cmd, common);
  soj_cmd->add_option("--terms", k_sum, "maximum series terms")
      ->check(CLI::Range(1, 1 << 24))
      ->capture_default_str();
  soj_cmd->add_option("--term-tol", term_tol, "stop once a summand is below")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* conv_cmd =
      app.add_subcommand("convergence", "decay fit and Lyapunov weights");
  add_common(conv_cmd, common);
  add_ode(conv_cmd, ode);
  conv_cmd->add_option("--fit-start", fit_start, "fit window start time");
  conv_cmd->add_option("--fit-end", fit_end, "fit window end time");
  conv_cmd
      ->add_option("--delta-fraction", delta_fraction,
                   "weights use this fraction of the fitted rate")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  auto* sim_cmd = app.add_subcommand("simulate", "finite-n simulation");
  add_common(sim_cmd, common);
  sim_cmd->add_option("--n", sim.n, "servers")
      ->check(CLI::Range(1, 1 << 26))
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "base seed")->capture_default_str();
  sim_cmd->add_option("--replications", sim.replications)
      ->check(CLI::Range(1, 1 << 16))
      ->capture_default_str();
  sim_cmd->add_option("--policy", sim.policy, "migrate_min or home_server")
      ->check(CLI::IsMember({"migrate_min", "home_server"}))
      ->capture_default_str();
  sim_cmd->add_option("--events", sim.events, "events per replication")
      ->capture_default_str();
  sim_cmd->add_option("--warmup", sim.warmup,
                      "events discarded first (default: a fifth of --events)");
  sim_cmd->add_option("--k-max", sim.k_max, "highest level reported")
      ->check(CLI::Range(1, 1 << 20))
      ->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads, "0 = all cores")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sim_cmd->add_flag("--without-replacement", sim.without_replacement,
                    "probe distinct servers");

  auto* rep_cmd = app.add_subcommand("reproduce", "recompute a published table "
                                                  "or figure");
  rep_cmd->add_option("target", target)
      ->required()
      ->check(CLI::IsMember(reproduce_targets()));
  rep_cmd->add_option("--format", common.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  rep_cmd->add_option("--out", common.out_path, "write to FILE");

  try {
    args = expand_config(std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (fp_cmd->parsed()) return cmd_fixed_point(common, fp_k_max, out);
    if (ode_cmd->parsed()) return cmd_ode(common, ode, out);
    if (soj_cmd->parsed()) return cmd_sojourn(common, k_sum, term_tol, out);
    if (conv_cmd->parsed()) {
      return cmd_convergence(common, ode, fit_start, fit_end, delta_fraction,
                             out);
    }
    if (sim_cmd->parsed()) return cmd_simulate(common, sim, out);
    if (rep_cmd->parsed()) return cmd_reproduce(common, target, out, err);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace retrial
