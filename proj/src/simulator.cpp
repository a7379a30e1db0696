#include "retrial/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

namespace retrial {

std::string_view to_string(RetrialPolicy policy) {
  switch (policy) {
    case RetrialPolicy::kMigrateMin:
      return "migrate_min";
    case RetrialPolicy::kHomeServer:
      return "home_server";
  }
  return "unknown";
}

RetrialPolicy parse_policy(std::string_view text) {
  if (text == "migrate_min") return RetrialPolicy::kMigrateMin;
  if (text == "home_server") return RetrialPolicy::kHomeServer;
  throw std::invalid_argument("unknown retrial policy '" + std::string(text) +
                              "' (expected migrate_min or home_server)");
}

SystemState SystemState::empty(int n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  SystemState s;
  s.phase.assign(static_cast<std::size_t>(n), ServerPhase::kIdle);
  s.orbit.assign(static_cast<std::size_t>(n), 0);
  return s;
}

FractionSnapshot measure_fractions(const SystemState& state, int k_max) {
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  const std::size_t levels = static_cast<std::size_t>(k_max) + 1;
  std::vector<double> busy(levels, 0.0), idle(levels, 0.0);
  for (std::size_t s = 0; s < state.phase.size(); ++s) {
    const std::size_t bin = std::min<std::size_t>(state.orbit[s], k_max);
    (state.phase[s] == ServerPhase::kBusy ? busy : idle)[bin] += 1.0;
  }
  const double n = static_cast<double>(state.phase.size());
  FractionSnapshot snap{std::vector<double>(levels), std::vector<double>(levels)};
  double acc_w = 0.0, acc_i = 0.0;
  for (std::size_t k = levels; k-- > 0;) {
    acc_w += busy[k];
    acc_i += idle[k];
    snap.x_W[k] = acc_w / n;
    snap.x_I[k] = acc_i / n;
  }
  return snap;
}

void SimConfig::validate() const {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (horizon_events <= warmup_events) {
    throw std::invalid_argument("horizon_events must exceed warmup_events");
  }
  if (horizon_events >
      static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    throw std::invalid_argument("horizon_events overflows the event counter");
  }
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  if (windows < 1) throw std::invalid_argument("windows must be >= 1");
  if (threads < 0) throw std::invalid_argument("threads must be >= 0");
  if (probe_without_replacement &&
      (params.d1() > n ||
       (policy == RetrialPolicy::kMigrateMin && params.d2() > n))) {
    throw std::invalid_argument(
        "probing without replacement needs d1, d2 <= n");
  }
}

void EventCounts::add(EventClass cls) {
  switch (cls) {
    case EventClass::kArrivalToIdle:
      ++arrival_to_idle;
      break;
    case EventClass::kArrivalBlocked:
      ++arrival_blocked;
      break;
    case EventClass::kServiceCompletion:
      ++service_completion;
      break;
    case EventClass::kRetrialSuccess:
      ++retrial_success;
      break;
    case EventClass::kRetrialFailed:
      ++retrial_failed;
      break;
  }
}

std::uint64_t EventCounts::total() const {
  return arrival_to_idle + arrival_blocked + service_completion +
         retrial_success + retrial_failed;
}

EventCounts& EventCounts::operator+=(const EventCounts& other) {
  arrival_to_idle += other.arrival_to_idle;
  arrival_blocked += other.arrival_blocked;
  service_completion += other.service_completion;
  retrial_success += other.retrial_success;
  retrial_failed += other.retrial_failed;
  return *this;
}

Simulator::Simulator(const SimConfig& config, std::uint64_t seed)
    : config_(config), rng_(seed), state_(SystemState::empty(config.n)) {
  config_.validate();
  const std::size_t n = static_cast<std::size_t>(config_.n);
  busy_pos_.assign(n, -1);
  busy_.reserve(n);
  const std::size_t levels = static_cast<std::size_t>(config_.k_max) + 1;
  busy_levels_.assign(levels, Level{});
  idle_levels_.assign(levels, Level{});
  idle_levels_[0].count = config_.n;
}

void Simulator::touch(Level& level, std::int64_t delta) {
  level.area += static_cast<double>(level.count) * (state_.clock - level.last);
  level.last = state_.clock;
  level.count += delta;
}

Simulator::Level& Simulator::level_for(int server) {
  const std::size_t bin =
      std::min<std::size_t>(state_.orbit[server], config_.k_max);
  return state_.phase[server] == ServerPhase::kBusy ? busy_levels_[bin]
                                                    : idle_levels_[bin];
}

double Simulator::area_of(const Level& level) const {
  return level.area + static_cast<double>(level.count) *
                          (state_.clock - level.last);
}

void Simulator::set_phase(int server, ServerPhase phase) {
  touch(level_for(server), -1);
  state_.phase[server] = phase;
  touch(level_for(server), +1);
  if (phase == ServerPhase::kBusy) {
    busy_pos_[server] = static_cast<int>(busy_.size());
    busy_.push_back(server);
    touch(busy_total_, +1);
  } else {
    const int pos = busy_pos_[server];
    const int last = busy_.back();
    busy_[pos] = last;
    busy_pos_[last] = pos;
    busy_.pop_back();
    busy_pos_[server] = -1;
    touch(busy_total_, -1);
  }
}

void Simulator::change_orbit(int server, int delta) {
  if (delta > 0 &&
      state_.orbit[server] == std::numeric_limits<std::uint32_t>::max()) {
    throw NumericError("orbit counter overflow at server " +
                       std::to_string(server));
  }
  touch(level_for(server), -1);
  state_.orbit[server] = static_cast<std::uint32_t>(
      static_cast<std::int64_t>(state_.orbit[server]) + delta);
  touch(level_for(server), +1);
  touch(orbit_total_, delta);
}

void Simulator::probe(int d, std::vector<int>& out) {
  out.clear();
  std::uniform_int_distribution<int> any(0, config_.n - 1);
  if (!config_.probe_without_replacement) {
    for (int j = 0; j < d; ++j) out.push_back(any(rng_));
    return;
  }
  // Floyd's algorithm: d distinct servers out of n.
  for (int j = config_.n - d; j < config_.n; ++j) {
    const int t = std::uniform_int_distribution<int>(0, j)(rng_);
    if (std::find(out.begin(), out.end(), t) == out.end()) {
      out.push_back(t);
    } else {
      out.push_back(j);
    }
  }
}

int Simulator::pick_min_orbit(const std::vector<int>& probes,
                              ServerPhase phase) {
  int chosen = -1;
  std::uint32_t best = 0;
  int ties = 0;
  for (int s : probes) {
    if (state_.phase[s] != phase) continue;
    const std::uint32_t o = state_.orbit[s];
    if (chosen < 0 || o < best) {
      chosen = s;
      best = o;
      ties = 1;
    } else if (o == best) {
      ++ties;
      if (std::uniform_int_distribution<int>(1, ties)(rng_) == 1) chosen = s;
    }
  }
  return chosen;
}

EventRecord Simulator::step() {
  const auto& p = config_.params;
  const double arrival_rate = config_.n * p.lambda();
  const double service_rate = p.mu() * static_cast<double>(busy_.size());
  const double retrial_rate = p.theta() * static_cast<double>(members_.size());
  const double total = arrival_rate + service_rate + retrial_rate;

  state_.clock += std::exponential_distribution<double>(total)(rng_);
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng_);

  if (u < arrival_rate) {
    probe(p.d1(), probes_);
    const int idle = pick_min_orbit(probes_, ServerPhase::kIdle);
    if (idle >= 0) {
      set_phase(idle, ServerPhase::kBusy);
      return {EventClass::kArrivalToIdle, state_.clock, idle};
    }
    const int busy = pick_min_orbit(probes_, ServerPhase::kBusy);
    change_orbit(busy, +1);
    members_.push_back(busy);
    return {EventClass::kArrivalBlocked, state_.clock, busy};
  }

  if (u < arrival_rate + service_rate || members_.empty()) {
    const auto idx = std::uniform_int_distribution<std::size_t>(
        0, busy_.size() - 1)(rng_);
    const int server = busy_[idx];
    set_phase(server, ServerPhase::kIdle);
    return {EventClass::kServiceCompletion, state_.clock, server};
  }

  const auto m =
      std::uniform_int_distribution<std::size_t>(0, members_.size() - 1)(rng_);
  const int origin = members_[m];
  int target = -1;
  if (config_.policy == RetrialPolicy::kMigrateMin) {
    probe(p.d2(), probes_);
    target = pick_min_orbit(probes_, ServerPhase::kIdle);
  } else if (state_.phase[origin] == ServerPhase::kIdle) {
    target = origin;
  }
  if (target < 0) {
    return {EventClass::kRetrialFailed, state_.clock, origin};
  }
  set_phase(target, ServerPhase::kBusy);
  change_orbit(origin, -1);
  members_[m] = members_.back();
  members_.pop_back();
  return {EventClass::kRetrialSuccess, state_.clock, target};
}

void Simulator::reset_statistics() {
  for (auto* levels : {&busy_levels_, &idle_levels_}) {
    for (auto& l : *levels) {
      l.area = 0.0;
      l.last = state_.clock;
    }
  }
  for (Level* l : {&busy_total_, &orbit_total_}) {
    l->area = 0.0;
    l->last = state_.clock;
  }
  stats_start_ = state_.clock;
}

FractionSnapshot Simulator::averaged_fractions() const {
  const std::size_t levels = busy_levels_.size();
  FractionSnapshot snap{std::vector<double>(levels, 0.0),
                        std::vector<double>(levels, 0.0)};
  const double duration = statistics_duration();
  if (!(duration > 0.0)) return measure_fractions(state_, config_.k_max);
  const double scale = duration * config_.n;
  double acc_w = 0.0, acc_i = 0.0;
  for (std::size_t k = levels; k-- > 0;) {
    acc_w += area_of(busy_levels_[k]);
    acc_i += area_of(idle_levels_[k]);
    snap.x_W[k] = acc_w / scale;
    snap.x_I[k] = acc_i / scale;
  }
  return snap;
}

double Simulator::averaged_busy_fraction() const {
  const double duration = statistics_duration();
  if (!(duration > 0.0)) {
    return static_cast<double>(busy_.size()) / config_.n;
  }
  return area_of(busy_total_) / (duration * config_.n);
}

double Simulator::averaged_mean_orbit() const {
  const double duration = statistics_duration();
  if (!(duration > 0.0)) {
    return static_cast<double>(members_.size()) / config_.n;
  }
  return area_of(orbit_total_) / (duration * config_.n);
}

double Simulator::orbit_area() const { return area_of(orbit_total_); }

ReplicationResult run_replication(const SimConfig& config, int index) {
  config.validate();
  Simulator sim(config, config.seed + static_cast<std::uint64_t>(index));
  for (std::uint64_t e = 0; e < config.warmup_events; ++e) sim.step();
  sim.reset_statistics();

  ReplicationResult out;
  const std::uint64_t measured = config.horizon_events - config.warmup_events;
  const auto windows = static_cast<std::uint64_t>(config.windows);
  double window_area = 0.0;
  double window_start = sim.state().clock;
  std::uint64_t next_boundary = measured / windows;
  std::uint64_t window_index = 1;
  for (std::uint64_t e = 1; e <= measured; ++e) {
    out.counts.add(sim.step().cls);
    if (e == next_boundary || e == measured) {
      const double area = sim.orbit_area();
      const double span = sim.state().clock - window_start;
      if (span > 0.0) {
        out.window_mean_orbit.push_back((area - window_area) /
                                        (span * config.n));
      }
      window_area = area;
      window_start = sim.state().clock;
      ++window_index;
      next_boundary = window_index < windows ? measured * window_index / windows
                                             : measured;
    }
  }
  out.fractions = sim.averaged_fractions();
  out.busy_fraction = sim.averaged_busy_fraction();
  out.mean_orbit = sim.averaged_mean_orbit();
  out.duration = sim.statistics_duration();
  return out;
}

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

template <class Get>
MeanSe summarize(const std::vector<ReplicationResult>& reps, Get get) {
  const double r = static_cast<double>(reps.size());
  double sum = 0.0;
  for (const auto& rep : reps) sum += get(rep);
  const double mean = sum / r;
  if (reps.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (const auto& rep : reps) ss += (get(rep) - mean) * (get(rep) - mean);
  return {mean, std::sqrt(ss / (r - 1.0) / r)};
}

}  // namespace

SimResult run(const SimConfig& config) {
  config.validate();
  const int reps = config.replications;
  std::vector<ReplicationResult> results(static_cast<std::size_t>(reps));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));

  int threads = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, reps);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < reps; i = next++) {
      try {
        results[i] = run_replication(config, i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SimResult out;
  const std::size_t levels = static_cast<std::size_t>(config.k_max) + 1;
  out.mean = {std::vector<double>(levels), std::vector<double>(levels)};
  out.std_error = out.mean;
  for (std::size_t k = 0; k < levels; ++k) {
    const auto w = summarize(results, [k](const ReplicationResult& r) {
      return r.fractions.x_W[k];
    });
    const auto i = summarize(results, [k](const ReplicationResult& r) {
      return r.fractions.x_I[k];
    });
    out.mean.x_W[k] = w.mean;
    out.std_error.x_W[k] = w.se;
    out.mean.x_I[k] = i.mean;
    out.std_error.x_I[k] = i.se;
  }
  const auto busy = summarize(
      results, [](const ReplicationResult& r) { return r.busy_fraction; });
  const auto orbit = summarize(
      results, [](const ReplicationResult& r) { return r.mean_orbit; });
  out.busy_fraction = busy.mean;
  out.busy_fraction_se = busy.se;
  out.mean_orbit = orbit.mean;
  out.mean_orbit_se = orbit.se;
  for (const auto& r : results) out.counts += r.counts;
  out.replications = std::move(results);
  return out;
}

double snapshot_gap(const FractionSnapshot& snap, const FixedPoint& fp) {
  const std::size_t n = std::min(snap.x_W.size(), fp.levels());
  double gap = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    gap = std::max(gap, std::abs(snap.x_W[k] - fp.pi_W[k]));
    gap = std::max(gap, std::abs(snap.x_I[k] - fp.pi_I[k]));
  }
  return gap;
}

KurtzStudy kurtz_convergence_study(const SimConfig& base,
                                   std::span<const int> n_values,
                                   const FixedPoint& fp) {
  if (n_values.empty()) throw std::invalid_argument("n_values is empty");
  if (!std::is_sorted(n_values.begin(), n_values.end())) {
    throw std::invalid_argument("n_values must be increasing");
  }
  KurtzStudy study;
  for (int n : n_values) {
    SimConfig cfg = base;
    cfg.n = n;
    KurtzPoint point;
    point.n = n;
    point.result = run(cfg);
    point.gap = snapshot_gap(point.result.mean, fp);
    point.gap_level0 =
        std::max(std::abs(point.result.mean.x_W[0] - fp.pi_W[0]),
                 std::abs(point.result.mean.x_I[0] - fp.pi_I[0]));
    study.points.push_back(std::move(point));
  }
  study.decreasing = study.points.back().gap < study.points.front().gap;
  return study;
}

}  // namespace retrial
