#pragma once

#include <span>
#include <vector>

#include "retrial/fixed_point.hpp"

namespace retrial {

inline constexpr int kDefaultSojournTerms = 512;
inline constexpr double kDefaultTermTol = 1e-12;

/// Per-orbit-level conditional sojourn times and their mixture.
struct SojournTable {
  std::vector<double> t_primary;  // k = 0 .. k_sum
  std::vector<double> t_retrial;  // k = 1 .. k_sum, stored at [k - 1]
  std::vector<double> summands;   // k = 0 .. k_sum
  double total = 0.0;
  int k_sum = 0;                  // last level included
  double tail_bound = 0.0;        // |last included summand|
  bool converged = false;         // false: the term cap was hit first
  bool negative_increments = false;

  double retrial(int k) const {
    return k == 0 ? 0.0 : t_retrial.at(static_cast<std::size_t>(k - 1));
  }
};

/// E[T^(R)(k)] for k >= 1; needs fp levels up to k + 1.
double sojourn_retrial(const FixedPoint& fp, const ModelParams& params, int k);

/// E[T^(P)(k)] for k >= 0; needs fp levels up to k + 2.
double sojourn_primary(const FixedPoint& fp, const ModelParams& params, int k);

/// Mixture over orbit levels with weights lambda/(lambda + k theta) and
/// k theta/(lambda + k theta). Summation stops after the first level whose
/// summand magnitude drops below term_tol, or at k_sum. Requires
/// fp.k_max >= k_sum + 2.
SojournTable expected_sojourn(const FixedPoint& fp, const ModelParams& params,
                              int k_sum = kDefaultSojournTerms,
                              double term_tol = kDefaultTermTol);

/// Same series written in terms of delta_k for d1 == d2 == d. `deltas` must
/// hold delta_0 .. delta_{k_sum + 2}.
double sojourn_series_from_deltas(const ModelParams& params, double eta_star,
                                  std::span<const double> deltas, int k_sum,
                                  double term_tol = kDefaultTermTol);

/// Throws std::invalid_argument when d1 != d2.
double expected_sojourn_equal_d(const ModelParams& params,
                                int k_sum = kDefaultSojournTerms,
                                double term_tol = kDefaultTermTol);

}  // namespace retrial
