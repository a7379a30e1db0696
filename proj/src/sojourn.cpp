#include "retrial/sojourn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace retrial {

namespace {

void require_levels(const FixedPoint& fp, int top) {
  if (top < 0 || static_cast<std::size_t>(top) >= fp.levels()) {
    throw std::invalid_argument("fixed point horizon " +
                                std::to_string(fp.k_max) +
                                " does not cover level " + std::to_string(top));
  }
}

// [a_k]^d - [a_{k+1}]^d
double power_step(const std::vector<double>& seq, int k, int d) {
  return std::pow(seq[k], d) - std::pow(seq[k + 1], d);
}

}  // namespace

double sojourn_retrial(const FixedPoint& fp, const ModelParams& params,
                       int k) {
  if (k < 1) throw std::invalid_argument("retrial sojourn needs k >= 1");
  require_levels(fp, k + 1);
  const int d2 = params.d2();
  return power_step(fp.pi_I, k, d2) / params.mu() /
         (1.0 - power_step(fp.pi_W, k, d2));
}

double sojourn_primary(const FixedPoint& fp, const ModelParams& params,
                       int k) {
  if (k < 0) throw std::invalid_argument("primary sojourn needs k >= 0");
  require_levels(fp, k + 2);
  const int d1 = params.d1();
  return power_step(fp.pi_I, k, d1) / params.mu() +
         power_step(fp.pi_W, k, d1) * sojourn_retrial(fp, params, k + 1);
}

SojournTable expected_sojourn(const FixedPoint& fp, const ModelParams& params,
                              int k_sum, double term_tol) {
  if (k_sum < 0) throw std::invalid_argument("k_sum must be >= 0");
  if (!(term_tol > 0.0)) throw std::invalid_argument("term_tol must be > 0");
  require_levels(fp, k_sum + 2);
  const double lambda = params.lambda();
  const double theta = params.theta();

  SojournTable table;
  for (int k = 0; k <= k_sum; ++k) {
    const double primary = sojourn_primary(fp, params, k);
    const double retrial = k == 0 ? 0.0 : sojourn_retrial(fp, params, k);
    table.t_primary.push_back(primary);
    if (k > 0) table.t_retrial.push_back(retrial);

    for (int d : {params.d1(), params.d2()}) {
      if (power_step(fp.pi_I, k, d) < 0.0 || power_step(fp.pi_W, k, d) < 0.0) {
        table.negative_increments = true;
      }
    }

    const double rate = lambda + k * theta;
    const double summand =
        lambda / rate * primary + (k * theta) / rate * retrial;
    table.summands.push_back(summand);
    table.total += summand;
    table.k_sum = k;
    table.tail_bound = std::abs(summand);
    if (std::abs(summand) < term_tol) {
      table.converged = true;
      break;
    }
  }
  return table;
}

double sojourn_series_from_deltas(const ModelParams& params, double eta_star,
                                  std::span<const double> deltas, int k_sum,
                                  double term_tol) {
  if (params.d1() != params.d2()) {
    throw std::invalid_argument("delta-form sojourn series requires d1 == d2");
  }
  if (k_sum < 0 || deltas.size() < static_cast<std::size_t>(k_sum) + 3) {
    throw std::invalid_argument("need delta_0 .. delta_{k_sum + 2}");
  }
  const int d = params.d1();
  const double lambda = params.lambda();
  const double mu = params.mu();
  const double theta = params.theta();
  const double rho = params.rho();
  auto dp = [&](int k) { return std::pow(deltas[k], d); };
  // [pi_I[k]]^d = lambda/(k theta) delta_{k-1}^d, so each idle-side bracket
  // carries a rho/theta factor once lambda/mu is pulled out.
  auto idle_step = [&](int k) {
    return dp(k - 1) / (k * theta) - dp(k) / ((k + 1) * theta);
  };

  double total = 0.0;
  for (int k = 0; k <= k_sum; ++k) {
    double summand = 0.0;
    if (k == 0) {
      summand = (std::pow(eta_star, d) - lambda / theta * dp(0)) / mu +
                rho * (dp(0) - dp(1)) * idle_step(1) / (1.0 - (dp(1) - dp(2)));
    } else {
      const double rate = lambda + k * theta;
      const double primary =
          rho * idle_step(k) + rho * (dp(k) - dp(k + 1)) * idle_step(k + 1) /
                                   (1.0 - (dp(k + 1) - dp(k + 2)));
      const double retrial =
          rho * idle_step(k) / (1.0 - (dp(k) - dp(k + 1)));
      summand = lambda / rate * primary + k * theta / rate * retrial;
    }
    total += summand;
    if (std::abs(summand) < term_tol) break;
  }
  return total;
}

double expected_sojourn_equal_d(const ModelParams& params, int k_sum,
                                double term_tol) {
  if (params.d1() != params.d2()) {
    throw std::invalid_argument("expected_sojourn_equal_d requires d1 == d2 (got " +
                                params.to_string() + ")");
  }
  const double eta = solve_eta_star(params);
  const auto deltas = delta_sequence(params, eta, k_sum + 2);
  return sojourn_series_from_deltas(params, eta, deltas, k_sum, term_tol);
}

}  // namespace retrial
