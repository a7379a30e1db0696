#pragma once

#include <array>
#include <optional>
#include <vector>

#include "retrial/fixed_point.hpp"
#include "retrial/mean_field.hpp"

namespace retrial {

/// Weights of the potential Phi = sum w_k (pi_I[k] - S_I[k]) +
/// sum v_k (pi_W[k] - S_W[k]).
struct PotentialWeights {
  std::vector<double> w;  // w[0] == 1
  std::vector<double> v;
  double delta = 0.0;
  bool feasible = true;

  static PotentialWeights unit(std::size_t levels);
};

/// Ratios linking each power term to its distance from the fixed point:
/// S_I^d1 = c (pi_I - S_I), S_I^d2 = d (pi_I - S_I),
/// S_W^d1 = g (pi_W - S_W), S_W = h (pi_W - S_W).
struct WeightRatios {
  std::vector<double> c;
  std::vector<double> d;
  std::vector<double> g;
  std::vector<double> h;
};

struct DecayFit {
  double c0_hat = 0.0;
  double delta_hat = 0.0;
  double r_squared = 0.0;
  std::array<double, 2> window{0.0, 0.0};
  std::size_t points = 0;
};

double potential(const StateVector& state, const FixedPoint& fp,
                 const PotentialWeights& weights);

/// Ratios c, d, g, h at `state` on levels [0, levels). Throws NumericError
/// when |pi - S| < 1e-14 on a level the weight recursion needs.
WeightRatios weight_ratios(const StateVector& state, const FixedPoint& fp,
                           const ModelParams& params, std::size_t levels);

/// Runs the four-step weight recursion on explicit ratios and checks the
/// inequality system the decay argument relies on:
///   lambda (w0 - v0) c0 <= -delta v0,
///   lambda (w_k - v_k) c_k + k theta (w_k - v_{k-1}) d_k <= -delta v_k,
///   lambda (v_l - v_{l+1}) g_l + mu (v_l - w_l) h_l <= -delta w_l.
PotentialWeights weights_from_ratios(const WeightRatios& ratios,
                                     const ModelParams& params, double delta);

/// weight_ratios + weights_from_ratios. `levels` defaults to the state's.
PotentialWeights compute_weights(const StateVector& state,
                                 const FixedPoint& fp,
                                 const ModelParams& params, double delta,
                                 std::optional<std::size_t> levels = {});

/// Sum over levels of |pi_I - S_I| + |pi_W - S_W|.
double l1_distance(const StateVector& state, const FixedPoint& fp);

/// Least-squares line through log(l1_distance) vs t for samples in the
/// window (default: second half of the trajectory). Throws NumericError if
/// the distance is already numerically zero across the window, or if fewer
/// than 10 usable samples remain.
DecayFit fit_decay(const Trajectory& traj, const FixedPoint& fp,
                   std::optional<std::array<double, 2>> window = {});

/// True iff every sample stays below pi + 1e-8 (see dominated_by).
/// Throws std::invalid_argument when the initial state is not itself
/// dominated by pi, since the bound is only claimed from such starts.
bool check_domination(const Trajectory& traj, const FixedPoint& fp,
                      double tol = 1e-8);

}  // namespace retrial
