#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "retrial/fixed_point.hpp"
#include "retrial/simulator.hpp"

using namespace retrial;

namespace {

SimConfig small_config(int d1, int d2) {
  SimConfig c{ModelParams(1.0, 5.0, 2.0, d1, d2)};
  c.n = 50;
  c.horizon_events = 60'000;
  c.warmup_events = 10'000;
  c.replications = 4;
  c.k_max = 8;
  c.seed = 11;
  return c;
}

// Independent recount: loop over levels, then over servers.
FractionSnapshot recount(const SystemState& s, int k_max) {
  FractionSnapshot f;
  const double n = static_cast<double>(s.phase.size());
  for (int k = 0; k <= k_max; ++k) {
    int busy = 0, idle = 0;
    for (std::size_t i = 0; i < s.phase.size(); ++i) {
      if (s.orbit[i] < static_cast<std::uint32_t>(k)) continue;
      (s.phase[i] == ServerPhase::kBusy ? busy : idle)++;
    }
    f.x_W.push_back(busy / n);
    f.x_I.push_back(idle / n);
  }
  return f;
}

bool same(const FractionSnapshot& a, const FractionSnapshot& b) {
  return a.x_W == b.x_W && a.x_I == b.x_I;
}

}  // namespace

TEST_CASE("fractions of simple states") {
  const SystemState idle = SystemState::empty(10);
  const FractionSnapshot f = measure_fractions(idle, 4);
  CHECK(f.x_I[0] == 1.0);
  CHECK(f.x_W[0] == 0.0);
  for (int k = 1; k <= 4; ++k) {
    CHECK(f.x_I[k] == 0.0);
    CHECK(f.x_W[k] == 0.0);
  }

  SystemState busy = SystemState::empty(10);
  for (int i = 0; i < 10; ++i) {
    busy.phase[i] = ServerPhase::kBusy;
    busy.orbit[i] = 2;
  }
  const FractionSnapshot g = measure_fractions(busy, 4);
  CHECK(g.x_W[0] == 1.0);
  CHECK(g.x_W[1] == 1.0);
  CHECK(g.x_W[2] == 1.0);
  CHECK(g.x_W[3] == 0.0);
  for (int k = 0; k <= 4; ++k) CHECK(g.x_I[k] == 0.0);
}

TEST_CASE("fractions match a brute-force recount") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    SystemState s = SystemState::empty(1 + static_cast<int>(rng() % 200));
    for (std::size_t i = 0; i < s.phase.size(); ++i) {
      s.phase[i] = rng() % 2 ? ServerPhase::kBusy : ServerPhase::kIdle;
      s.orbit[i] = static_cast<std::uint32_t>(rng() % 12);
    }
    CHECK(same(measure_fractions(s, 15), recount(s, 15)));
  }
}

TEST_CASE("first event from empty is an arrival") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Simulator sim(small_config(2, 1), seed);
    CHECK(sim.step().cls == EventClass::kArrivalToIdle);
  }
}

TEST_CASE("every event conserves customers and servers") {
  for (auto policy : {RetrialPolicy::kMigrateMin, RetrialPolicy::kHomeServer}) {
    SimConfig c = small_config(2, 2);
    c.policy = policy;
    Simulator sim(c, 3);
    std::int64_t customers = 0;
    for (int i = 0; i < 20'000; ++i) {
      const EventRecord e = sim.step();
      switch (e.cls) {
        case EventClass::kArrivalToIdle:
        case EventClass::kArrivalBlocked:
          ++customers;
          break;
        case EventClass::kServiceCompletion:
          --customers;
          break;
        default:
          break;
      }
      REQUIRE(static_cast<std::int64_t>(sim.customers()) == customers);
      std::uint64_t busy = 0, orbit = 0;
      for (int s = 0; s < c.n; ++s) {
        busy += sim.state().phase[s] == ServerPhase::kBusy;
        orbit += sim.state().orbit[s];
      }
      REQUIRE(busy == sim.busy_servers());
      REQUIRE(orbit == sim.orbit_customers());
    }
  }
}

TEST_CASE("snapshot fractions are monotone in the level") {
  Simulator sim(small_config(2, 1), 9);
  for (int i = 0; i < 5000; ++i) {
    sim.step();
    const FractionSnapshot f = measure_fractions(sim.state(), 8);
    for (int k = 0; k < 8; ++k) {
      REQUIRE(f.x_W[k + 1] <= f.x_W[k]);
      REQUIRE(f.x_I[k + 1] <= f.x_I[k]);
    }
    REQUIRE(f.x_W[0] + f.x_I[0] == doctest::Approx(1.0));
  }
}

TEST_CASE("identical seeds give identical results") {
  for (bool distinct : {false, true}) {
    SimConfig c = small_config(2, 2);
    c.probe_without_replacement = distinct;
    const SimResult a = run(c);
    c.threads = 1;
    const SimResult b = run(c);
    CHECK(same(a.mean, b.mean));
    CHECK(same(a.std_error, b.std_error));
    CHECK(a.busy_fraction == b.busy_fraction);
    CHECK(a.mean_orbit == b.mean_orbit);
    CHECK(a.counts.total() == b.counts.total());
  }
  SimConfig c = small_config(2, 2);
  const SimResult a = run(c);
  c.seed += 1;
  CHECK_FALSE(same(a.mean, run(c).mean));
}

TEST_CASE("replication bookkeeping") {
  const SimConfig c = small_config(3, 1);
  const SimResult r = run(c);
  REQUIRE(r.replications.size() == 4);
  for (const auto& rep : r.replications) {
    CHECK(rep.counts.total() == c.horizon_events - c.warmup_events);
    CHECK(rep.duration > 0.0);
    CHECK(rep.window_mean_orbit.size() == static_cast<std::size_t>(c.windows));
  }
  CHECK(r.counts.total() == 4 * (c.horizon_events - c.warmup_events));
  CHECK(r.mean.x_W.size() == 9);
}

TEST_CASE("single-server retrial queue keeps the server busy a fraction rho") {
  SimConfig c{ModelParams(1.0, 5.0, 2.0, 1, 1)};
  c.n = 1;
  c.policy = RetrialPolicy::kHomeServer;
  c.horizon_events = 1'250'000;
  c.warmup_events = 250'000;
  c.replications = 16;
  c.seed = 1000;
  const SimResult r = run(c);
  CHECK(r.busy_fraction_se > 0.0);
  CHECK(std::abs(r.busy_fraction - 0.2) <= 3.0 * r.busy_fraction_se);
}

TEST_CASE("busy fraction tracks rho for larger systems too") {
  SimConfig c = small_config(2, 1);
  c.n = 100;
  c.horizon_events = 300'000;
  c.warmup_events = 50'000;
  const SimResult r = run(c);
  CHECK(std::abs(r.busy_fraction - 0.2) <= 4.0 * r.busy_fraction_se + 1e-3);
}

TEST_CASE("mean orbit stays bounded under stability") {
  SimConfig c = small_config(2, 1);
  c.horizon_events = 200'000;
  const SimResult r = run(c);
  for (const auto& rep : r.replications) {
    for (double w : rep.window_mean_orbit) CHECK(w < 1.0);
  }
}

TEST_CASE("repeated n gives identical gaps") {
  SimConfig c = small_config(2, 1);
  const FixedPoint fp = fixed_point(c.params, c.k_max);
  const std::vector<int> ns{30, 30};
  const KurtzStudy study = kurtz_convergence_study(c, ns, fp);
  REQUIRE(study.points.size() == 2);
  CHECK(study.points[0].gap == study.points[1].gap);
  CHECK(study.points[0].gap_level0 <= study.points[0].gap);

  const std::vector<int> unsorted{100, 10};
  CHECK_THROWS_AS(kurtz_convergence_study(c, unsorted, fp),
                  std::invalid_argument);
}

TEST_CASE("config validation") {
  SimConfig c = small_config(2, 1);
  c.warmup_events = c.horizon_events;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = small_config(2, 1);
  c.replications = 0;
  CHECK_THROWS_AS(run(c), std::invalid_argument);
  c = small_config(2, 1);
  c.n = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK(parse_policy("home_server") == RetrialPolicy::kHomeServer);
  CHECK(to_string(RetrialPolicy::kMigrateMin) == "migrate_min");
  CHECK_THROWS_AS(parse_policy("nearest"), std::invalid_argument);
}
