#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "retrial/fixed_point.hpp"
#include "retrial/model_params.hpp"

namespace retrial {

/// Truncated fraction measure at time t. s_I[k] (s_W[k]) is the fraction
/// of idle (busy) servers whose orbit holds at least k customers.
struct StateVector {
  std::vector<double> s_I;
  std::vector<double> s_W;
  double t = 0.0;

  int k_max() const noexcept { return static_cast<int>(s_I.size()) - 1; }

  /// All servers idle, every orbit empty.
  static StateVector empty(int k_max);
  /// The fixed point itself, as a state at time 0.
  static StateVector from_fixed_point(const FixedPoint& fp);
};

/// Time derivative of each StateVector component.
struct Derivative {
  std::vector<double> d_I;
  std::vector<double> d_W;

  double max_abs() const;
};

/// What to assume for s_I[k_max + 1], the only value the truncated drift
/// needs from beyond the horizon.
enum class ClosureRule {
  kZeroInflow,      ///< s_I[k_max + 1] = 0
  kFixedPointTail,  ///< s_I[k_max + 1] = pi_I[k_max + 1]
};

struct OdeConfig {
  int k_max = kDefaultKMax;
  double dt = 1e-3;
  double t_max = 200.0;
  int sample_every = 1000;
  ClosureRule closure = ClosureRule::kZeroInflow;
  /// Reset s_I[0] = 1 - s_W[0] after each step. Disable only to measure
  /// the raw level-0 defect of the drift.
  bool renormalize = true;
};

struct Trajectory {
  ModelParams params;
  std::vector<StateVector> samples;
  std::int64_t steps = 0;
  std::int64_t clamp_count = 0;
  /// Largest |s_I[0] + s_W[0] - 1| seen right after a step, before any
  /// renormalization.
  double max_level0_defect = 0.0;

  const StateVector& final_state() const { return samples.back(); }
};

/// Mean-field drift F(y). `idle_boundary` is s_I[k_max + 1].
Derivative drift(const StateVector& state, const ModelParams& params,
                 double idle_boundary = 0.0);

/// Boundary value s_I[k_max + 1] implied by a closure rule.
double closure_boundary(ClosureRule rule, const ModelParams& params,
                        int k_max);

/// Fixed-step classical RK4 from `initial` to config.t_max. Samples the
/// initial state, every `sample_every` steps, and exactly at t_max.
/// Throws NumericError naming the time if any component turns non-finite.
Trajectory integrate(const StateVector& initial, const ModelParams& params,
                     const OdeConfig& config);

struct MonotonicityReport {
  bool level_sums_ok = true;
  std::optional<int> k_observed;
};

MonotonicityReport check_monotonicity(const StateVector& state);

/// Max over random state pairs of |F(y) - F(z)|_inf / |y - z|_inf.
double lipschitz_probe(const ModelParams& params, int samples,
                       std::uint64_t seed, int k_max = 8);

/// Componentwise ordering a <= b + tol on every component except s_I[0],
/// which is pinned by the level-0 constraint s_I[0] = 1 - s_W[0].
bool dominated_by(const StateVector& a, const StateVector& b, double tol);

/// max_k max(|a_I[k] - b_I[k]|, |a_W[k] - b_W[k]|) over shared levels.
double sup_distance(const StateVector& a, const StateVector& b);

}  // namespace retrial
