#pragma once

#include <optional>
#include <span>
#include <vector>

#include "retrial/model_params.hpp"

namespace retrial {

/// Values below this are treated as exact zero in every recursion.
inline constexpr double kUnderflowFloor = 1e-300;
inline constexpr int kDefaultKMax = 64;
inline constexpr double kDefaultEtaTol = 1e-12;

/// Fixed point of the mean-field fraction measure, truncated at level k_max.
///
/// pi_I[k] is the stationary fraction of idle servers whose orbit holds at
/// least k customers, pi_W[k] the same for busy servers. pi_I[0] is the
/// root eta* and pi_W[k] equals delta_k.
struct FixedPoint {
  double eta_star = 0.0;
  std::vector<double> pi_I;
  std::vector<double> pi_W;
  int k_max = 0;
  double underflow_floor = kUnderflowFloor;

  /// Complementary notation 1 - eta*.
  double eta_d1() const noexcept { return 1.0 - eta_star; }
  std::size_t levels() const noexcept { return pi_I.size(); }
};

/// Unique root in (0,1) of lambda x^d1 + mu x - mu = 0.
///
/// Bisection on [0,1] (the left side is strictly increasing) narrows the
/// bracket, then safeguarded Newton steps polish the root. The result
/// satisfies |lambda x^d1 + mu x - mu| <= tol * mu.
double solve_eta_star(const ModelParams& params, double tol = kDefaultEtaTol);

/// delta_0 .. delta_{k_max}. Entries that fall below kUnderflowFloor are
/// clamped to 0 and stay 0.
std::vector<double> delta_sequence(const ModelParams& params, double eta_star,
                                   int k_max);

FixedPoint fixed_point(const ModelParams& params, int k_max = kDefaultKMax,
                       double tol = kDefaultEtaTol);

/// Closed-form products for d1 == d2 == d, accumulated in log space.
/// Throws std::invalid_argument when d1 != d2.
FixedPoint fixed_point_equal_d(const ModelParams& params,
                               int k_max = kDefaultKMax,
                               double tol = kDefaultEtaTol);

/// Max relative residual of k theta pi_I[k]^d2 = lambda pi_W[k-1]^d1 over
/// levels whose right-hand side is above the underflow floor.
double verify_corollary_identity(const FixedPoint& fp,
                                 const ModelParams& params);

/// Smallest K such that for every k >= K inside the horizon both
/// sequences strictly decrease from k to k+1. Pairs tied at exact zero are
/// skipped. Returns nullopt when the last pair already violates it.
std::optional<int> joint_monotone_threshold(std::span<const double> w,
                                            std::span<const double> i);

/// joint_monotone_threshold on the fixed point; throws NumericError when no
/// threshold exists within the horizon.
int detect_K(const FixedPoint& fp);

}  // namespace retrial
