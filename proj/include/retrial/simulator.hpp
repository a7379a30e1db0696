#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "retrial/fixed_point.hpp"
#include "retrial/model_params.hpp"

namespace retrial {

/// How a customer in some server's orbit re-attempts service.
enum class RetrialPolicy {
  /// Probe d2 servers; start service at the probed idle server with the
  /// smallest orbit, leaving the origin orbit.
  kMigrateMin,
  /// Re-enter the customer's own server iff it is idle; d2 unused.
  kHomeServer,
};

std::string_view to_string(RetrialPolicy policy);
RetrialPolicy parse_policy(std::string_view text);

enum class ServerPhase : std::uint8_t { kIdle, kBusy };

/// Finite-n system: per-server phase and orbit size.
struct SystemState {
  std::vector<ServerPhase> phase;
  std::vector<std::uint32_t> orbit;
  double clock = 0.0;

  static SystemState empty(int n);
};

/// x_W[k] (x_I[k]): fraction of busy (idle) servers with orbit >= k.
struct FractionSnapshot {
  std::vector<double> x_W;
  std::vector<double> x_I;
};

FractionSnapshot measure_fractions(const SystemState& state, int k_max);

struct SimConfig {
  ModelParams params;
  int n = 1000;
  RetrialPolicy policy = RetrialPolicy::kMigrateMin;
  std::uint64_t horizon_events = 1'250'000;
  std::uint64_t warmup_events = 250'000;
  std::uint64_t seed = 1;
  int replications = 16;
  int k_max = 32;
  bool probe_without_replacement = false;
  /// Post-warmup events are split into this many windows for the
  /// mean-orbit trend.
  int windows = 10;
  /// 0 picks std::thread::hardware_concurrency().
  int threads = 0;

  void validate() const;
};

enum class EventClass : std::uint8_t {
  kArrivalToIdle,      // (I,i) -> (W,i)
  kArrivalBlocked,     // (W,i) -> (W,i+1)
  kServiceCompletion,  // (W,i) -> (I,i)
  kRetrialSuccess,     // orbit customer starts service
  kRetrialFailed,      // no idle server found, nothing changes
};

struct EventCounts {
  std::uint64_t arrival_to_idle = 0;
  std::uint64_t arrival_blocked = 0;
  std::uint64_t service_completion = 0;
  std::uint64_t retrial_success = 0;
  std::uint64_t retrial_failed = 0;

  void add(EventClass cls);
  std::uint64_t total() const;
  EventCounts& operator+=(const EventCounts& other);
};

struct EventRecord {
  EventClass cls;
  double time;
  int server;  // server whose phase or orbit changed
};

struct ReplicationResult {
  FractionSnapshot fractions;  // time averages over the post-warmup window
  double busy_fraction = 0.0;
  double mean_orbit = 0.0;     // orbit customers per server
  double duration = 0.0;       // simulated time after warmup
  EventCounts counts;
  std::vector<double> window_mean_orbit;
};

struct SimResult {
  FractionSnapshot mean;
  FractionSnapshot std_error;
  double busy_fraction = 0.0;
  double busy_fraction_se = 0.0;
  double mean_orbit = 0.0;
  double mean_orbit_se = 0.0;
  EventCounts counts;
  std::vector<ReplicationResult> replications;
};

/// Event-by-event engine for one replication. Holds the system state plus
/// the indices that make each event O(d).
class Simulator {
 public:
  Simulator(const SimConfig& config, std::uint64_t seed);

  EventRecord step();

  const SystemState& state() const noexcept { return state_; }
  std::uint64_t busy_servers() const noexcept { return busy_.size(); }
  std::uint64_t orbit_customers() const noexcept { return members_.size(); }
  /// In service plus in orbit.
  std::uint64_t customers() const noexcept {
    return busy_.size() + members_.size();
  }

  /// Starts (or restarts) time-averaging at the current clock.
  void reset_statistics();
  /// Time-averaged fractions since the last reset_statistics().
  FractionSnapshot averaged_fractions() const;
  double averaged_busy_fraction() const;
  double averaged_mean_orbit() const;
  double statistics_duration() const noexcept {
    return state_.clock - stats_start_;
  }
  /// Integral of the orbit total since the last reset.
  double orbit_area() const;

 private:
  struct Level {
    std::int64_t count = 0;
    double last = 0.0;
    double area = 0.0;
  };

  void probe(int d, std::vector<int>& out);
  int pick_min_orbit(const std::vector<int>& probes, ServerPhase phase);
  void set_phase(int server, ServerPhase phase);
  void change_orbit(int server, int delta);
  void touch(Level& level, std::int64_t delta);
  Level& level_for(int server);
  double area_of(const Level& level) const;

  SimConfig config_;
  std::mt19937_64 rng_;
  SystemState state_;
  std::vector<int> busy_;
  std::vector<int> busy_pos_;
  std::vector<int> members_;  // one server id per orbit customer
  std::vector<Level> busy_levels_;
  std::vector<Level> idle_levels_;
  Level busy_total_;
  Level orbit_total_;
  double stats_start_ = 0.0;
  std::vector<int> probes_;
  std::vector<int> pool_;
};

ReplicationResult run_replication(const SimConfig& config, int index);

/// Runs config.replications independent replications (seed + index) in
/// parallel and merges them in index order.
SimResult run(const SimConfig& config);

struct KurtzPoint {
  int n = 0;
  double gap = 0.0;         // sup over levels of |x - pi|
  double gap_level0 = 0.0;  // level 0 only
  SimResult result;
};

struct KurtzStudy {
  std::vector<KurtzPoint> points;
  /// gap at the largest n below gap at the smallest n.
  bool decreasing = false;
};

KurtzStudy kurtz_convergence_study(const SimConfig& base,
                                   std::span<const int> n_values,
                                   const FixedPoint& fp);

double snapshot_gap(const FractionSnapshot& snap, const FixedPoint& fp);

}  // namespace retrial
