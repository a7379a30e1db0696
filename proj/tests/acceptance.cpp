// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failing criteria (0 when everything passes).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "retrial/cli.hpp"
#include "retrial/fixed_point.hpp"
#include "retrial/lyapunov.hpp"
#include "retrial/mean_field.hpp"
#include "retrial/published_values.hpp"
#include "retrial/reproduce.hpp"
#include "retrial/simulator.hpp"
#include "retrial/sojourn.hpp"

using namespace retrial;

namespace {

// Measured once from the d1 = 1, d2 = 2 empty-start run; see test_lyapunov.
constexpr double kDeltaHatFixture = 0.0034290564;
// Base seed for the single-server oracle.
constexpr std::uint64_t kOracleSeed = 1000;

ModelParams model(int d1, int d2) { return ModelParams(1.0, 5.0, 2.0, d1, d2); }

std::vector<std::pair<int, int>> table_configs() {
  std::vector<std::pair<int, int>> out;
  for (const auto* rows :
       {&published::kTable1, &published::kTable2, &published::kTable3}) {
    for (const auto& row : *rows) out.emplace_back(row.d1, row.d2);
  }
  return out;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Verdict {
  bool pass;
  std::string detail;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

Verdict eta_grid() {
  Timer timer;
  const ReproduceResult r = reproduce("eta-table");
  const double secs = timer.seconds();
  double worst = 0.0;
  int truncated = 0;
  for (const auto& row : r.table.rows) {
    worst = std::max(worst, std::get<double>(row[4]));
    truncated += std::get<bool>(row[6]);
  }
  const bool ok = r.pass() && secs < 1.0;
  return {ok, fmt("%d/%d within 5e-6, max |diff| %.2e, %d/45 equal the root "
                  "truncated to 5 decimals, %.3fs",
                  r.cells - r.failures, r.cells, worst, truncated, secs)};
}

Verdict table1() {
  Timer timer;
  const ReproduceResult r = reproduce("table1");
  const double secs = timer.seconds();
  return {r.pass() && r.cells == 18 && secs < 1.0,
          fmt("%d/%d cells within 5e-5, %.3fs", r.cells - r.failures, r.cells,
              secs)};
}

Verdict tables23() {
  const ReproduceResult t2 = reproduce("table2");
  const ReproduceResult t3 = reproduce("table3");
  int k_ok = 0;
  std::string bad;
  for (const auto& claim : published::kThresholds) {
    const int k = detect_K(fixed_point(model(claim.d1, claim.d2), 32));
    if (k == claim.k) {
      ++k_ok;
    } else {
      bad += fmt(" K_{%d,%d}=%d", claim.d1, claim.d2, k);
    }
  }
  const int thresholds = static_cast<int>(published::kThresholds.size());
  return {t2.pass() && t3.pass() && k_ok == thresholds,
          fmt("table2 %d/%d, table3 %d/%d cells, thresholds %d/%d%s",
              t2.cells - t2.failures, t2.cells, t3.cells - t3.failures,
              t3.cells, k_ok, thresholds, bad.c_str())};
}

Verdict corollary() {
  double worst = 0.0;
  for (auto [d1, d2] : table_configs()) {
    const ModelParams p = model(d1, d2);
    worst = std::max(worst, verify_corollary_identity(fixed_point(p, 32), p));
  }
  return {worst <= 1e-12, fmt("max relative residual %.2e", worst)};
}

Verdict equal_d() {
  double worst = 0.0;
  for (int d : {1, 2, 3}) {
    const ModelParams p = model(d, d);
    const FixedPoint a = fixed_point(p, 64);
    const FixedPoint b = fixed_point_equal_d(p, 64);
    for (int k = 0; k <= 64; ++k) {
      for (auto [x, y] : {std::pair{a.pi_W[k], b.pi_W[k]},
                          std::pair{a.pi_I[k], b.pi_I[k]}}) {
        if (std::max(x, y) <= 1e-200) continue;
        worst = std::max(worst, std::abs(x - y) / std::max(x, y));
      }
    }
  }
  return {worst <= 1e-10, fmt("max relative difference %.2e", worst)};
}

Verdict stationarity() {
  double worst = 0.0;
  for (auto [d1, d2] : table_configs()) {
    const ModelParams p = model(d1, d2);
    const FixedPoint fp = fixed_point(p, 64);
    const double boundary =
        closure_boundary(ClosureRule::kFixedPointTail, p, fp.k_max);
    worst = std::max(
        worst, drift(StateVector::from_fixed_point(fp), p, boundary).max_abs());
  }
  return {worst <= 1e-12, fmt("max |F(pi)| %.2e", worst)};
}

struct OdeRun {
  Trajectory traj{model(1, 2), {}, 0, 0, 0.0};
  FixedPoint fp;
  double seconds = 0.0;
};

const OdeRun& ode_run() {
  static const OdeRun run = [] {
    OdeRun r;
    Timer timer;
    const ModelParams p = model(1, 2);
    OdeConfig cfg;  // dt 1e-3, T 200
    r.traj = integrate(StateVector::empty(cfg.k_max), p, cfg);
    r.seconds = timer.seconds();
    r.fp = fixed_point(p, cfg.k_max);
    return r;
  }();
  return run;
}

Verdict ode_convergence() {
  const OdeRun& r = ode_run();
  const double gap = sup_distance(r.traj.final_state(),
                                  StateVector::from_fixed_point(r.fp));
  const bool dominated = check_domination(r.traj, r.fp, 1e-8);
  return {gap <= 1e-6 && dominated && r.seconds < 30.0,
          fmt("||S(200) - pi||_inf = %.3e (need 1e-6), dominated %s, %.2fs",
              gap, dominated ? "yes" : "no", r.seconds)};
}

Verdict exponential() {
  const OdeRun& r = ode_run();
  const DecayFit fit = fit_decay(r.traj, r.fp, std::array{100.0, 200.0});
  const double rel = std::abs(fit.delta_hat / kDeltaHatFixture - 1.0);
  return {fit.delta_hat > 0.0 && fit.r_squared >= 0.99 && rel <= 0.02,
          fmt("delta_hat %.6g (fixture %.6g, off %.2f%%), R^2 %.5f",
              fit.delta_hat, kDeltaHatFixture, 100.0 * rel, fit.r_squared)};
}

Verdict sojourn_trends() {
  std::string broken;
  auto series = [&](const char* name, std::vector<std::pair<int, int>> pts) {
    double prev = INFINITY;
    int prev_d1 = 0, prev_d2 = 0;
    for (auto [d1, d2] : pts) {
      const double t = converged_sojourn(model(d1, d2)).total;
      if (!(t < prev)) {
        broken += fmt(" %s: E[T](%d,%d)=%.5f not below E[T](%d,%d)=%.5f;",
                      name, d1, d2, t, prev_d1, prev_d2, prev);
      }
      prev = t;
      prev_d1 = d1;
      prev_d2 = d2;
    }
  };
  for (int d2 : {1, 2}) {
    std::vector<std::pair<int, int>> pts;
    for (int d1 = 1; d1 <= 10; ++d1) pts.emplace_back(d1, d2);
    series(d2 == 1 ? "over d1 at d2=1" : "over d1 at d2=2", pts);
  }
  for (int d1 : {1, 2}) {
    std::vector<std::pair<int, int>> pts;
    for (int d2 : {1, 2, 3, 5, 10, 20, 50, 100}) pts.emplace_back(d1, d2);
    series(d1 == 1 ? "over d2 at d1=1" : "over d2 at d1=2", pts);
  }
  series("over d=d1=d2", {{1, 1}, {2, 2}, {3, 3}, {4, 4}});

  double worst = 0.0;
  for (int d = 1; d <= 4; ++d) {
    const ModelParams p = model(d, d);
    const double general = converged_sojourn(p).total;
    const double delta_form = expected_sojourn_equal_d(p, 4096);
    worst = std::max(worst, std::abs(general - delta_form) / general);
  }
  const bool ok = broken.empty() && worst <= 1e-10;
  return {ok, fmt("equal-d series rel diff %.2e; trend violations:%s", worst,
                  broken.empty() ? " none" : broken.c_str())};
}

Verdict single_server() {
  Timer timer;
  SimConfig c{ModelParams(1.0, 5.0, 2.0, 1, 1)};
  c.n = 1;
  c.policy = RetrialPolicy::kHomeServer;
  c.warmup_events = 250'000;
  c.horizon_events = c.warmup_events + 1'000'000;
  c.replications = 16;
  c.seed = kOracleSeed;
  const SimResult r = run(c);
  const double secs = timer.seconds();
  const double z = (r.busy_fraction - 0.2) / r.busy_fraction_se;
  return {std::abs(z) <= 3.0 && secs < 60.0,
          fmt("busy %.5f +- %.5f (z = %.2f), %.2fs", r.busy_fraction,
              r.busy_fraction_se, z, secs)};
}

Verdict kurtz() {
  Timer timer;
  SimConfig c{model(2, 1)};
  c.policy = RetrialPolicy::kMigrateMin;
  const FixedPoint fp = fixed_point(c.params, c.k_max);
  const std::vector<int> ns{10, 100, 1000};
  const KurtzStudy study = kurtz_convergence_study(c, ns, fp);
  const double secs = timer.seconds();
  const KurtzPoint& big = study.points.back();
  const double zw = (big.result.mean.x_W[0] - 0.1459) / big.result.std_error.x_W[0];
  const double zi = (big.result.mean.x_I[0] - 0.8541) / big.result.std_error.x_I[0];
  std::string gaps;
  for (const auto& p : study.points) {
    gaps += fmt(" n=%d:%.5f", p.n, p.gap);
  }
  const bool ok = study.points.back().gap < study.points.front().gap &&
                  std::abs(zw) <= 3.0 && std::abs(zi) <= 3.0 && secs < 300.0;
  return {ok, fmt("gaps%s; n=1000 x_W[0] %.5f (z %.1f), x_I[0] %.5f (z %.1f), "
                  "%.1fs",
                  gaps.c_str(), big.result.mean.x_W[0], zw,
                  big.result.mean.x_I[0], zi, secs)};
}

Verdict properties() {
  // Determinism, compared on the emitted bytes.
  const std::vector<std::string> args{"simulate", "--n", "300", "--seed", "7",
                                      "--replications", "4", "--events",
                                      "60000", "--format", "json"};
  std::ostringstream a, b, err;
  const bool same_bytes = run_cli(args, a, err) == 0 &&
                          run_cli(args, b, err) == 0 && a.str() == b.str();

  // Conservation and snapshot monotonicity at every event.
  SimConfig c{model(2, 2)};
  c.n = 100;
  c.k_max = 12;
  Simulator sim(c, 17);
  std::int64_t customers = 0;
  bool conserved = true, monotone = true;
  for (int i = 0; i < 100'000; ++i) {
    const EventRecord e = sim.step();
    if (e.cls == EventClass::kArrivalToIdle ||
        e.cls == EventClass::kArrivalBlocked) {
      ++customers;
    } else if (e.cls == EventClass::kServiceCompletion) {
      --customers;
    }
    conserved = conserved &&
                static_cast<std::int64_t>(sim.customers()) == customers;
    const FractionSnapshot f = measure_fractions(sim.state(), c.k_max);
    for (int k = 0; k < c.k_max; ++k) {
      monotone = monotone && f.x_W[k + 1] <= f.x_W[k] && f.x_I[k + 1] <= f.x_I[k];
    }
  }

  // RK4 order.
  auto final_at = [](double dt) {
    OdeConfig cfg;
    cfg.k_max = 32;
    cfg.t_max = 1.0;
    cfg.dt = dt;
    cfg.renormalize = false;
    return integrate(StateVector::empty(32), model(1, 2), cfg).final_state();
  };
  const StateVector s1 = final_at(0.05), s2 = final_at(0.025), s3 = final_at(0.0125);
  const double ratio = sup_distance(s1, s2) / sup_distance(s2, s3);
  const bool order = ratio >= 12.0 && ratio <= 20.0;

  return {same_bytes && conserved && monotone && order,
          fmt("identical bytes %s, conservation %s, monotone snapshots %s, "
              "step-halving ratio %.2f",
              same_bytes ? "yes" : "no", conserved ? "yes" : "no",
              monotone ? "yes" : "no", ratio)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"eta* grid", eta_grid},
      {"fixed-point table, d2 = 1", table1},
      {"fixed-point tables, d1 = 1 and 5; thresholds", tables23},
      {"corollary identity", corollary},
      {"equal-d closed form", equal_d},
      {"stationarity", stationarity},
      {"ODE convergence", ode_convergence},
      {"exponential convergence", exponential},
      {"sojourn properties", sojourn_trends},
      {"single-server simulator oracle", single_server},
      {"Kurtz trend", kurtz},
      {"property suites", properties},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v{false, ""};
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria pass\n", criteria.size() - failures,
              criteria.size());
  return failures;
}
