#include "retrial/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace retrial {

double solve_eta_star(const ModelParams& params, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("eta* tolerance must be > 0");
  const double rho = params.rho();
  const int d1 = params.d1();
  // G(x) = rho x^d1 + x - 1 has G(0) = -1, G(1) = rho > 0 and G' > 0.
  auto g = [&](double x) { return rho * std::pow(x, d1) + x - 1.0; };
  auto dg = [&](double x) { return rho * d1 * std::pow(x, d1 - 1) + 1.0; };

  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }

  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 100; ++iter) {
    const double gx = g(x);
    if (gx == 0.0) break;
    (gx < 0.0 ? lo : hi) = x;
    double next = x - gx / dg(x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) break;
    x = next;
  }

  // Residual in the original scaling: |lambda x^d1 + mu x - mu| = mu |G(x)|.
  if (!(std::abs(g(x)) <= tol)) {
    std::ostringstream os;
    os << "eta* solve did not reach tolerance " << tol << " for "
       << params.to_string();
    throw NumericError(os.str());
  }
  return x;
}

std::vector<double> delta_sequence(const ModelParams& params, double eta_star,
                                   int k_max) {
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  const double rho = params.rho();
  const double d1 = params.d1();
  const double d2 = params.d2();

  std::vector<double> delta(static_cast<std::size_t>(k_max) + 1, 0.0);
  delta[0] = rho * std::pow(eta_star, params.d1());
  if (delta[0] < kUnderflowFloor) delta[0] = 0.0;

  for (int k = 1; k <= k_max; ++k) {
    const double prev = delta[k - 1];
    if (prev == 0.0) break;
    const double log_prev = std::log(prev);
    // log of lambda/(k theta) delta_{k-1}^d1, kept in log space so that a
    // tiny base still yields a sensible fractional power.
    const double log_base =
        std::log(params.lambda() / (k * params.theta())) + d1 * log_prev;
    const double value = rho * std::exp(d1 * log_prev) +
                         rho * std::exp(log_base * d1 / d2);
    delta[k] = value < kUnderflowFloor ? 0.0 : value;
  }
  return delta;
}

FixedPoint fixed_point(const ModelParams& params, int k_max, double tol) {
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  FixedPoint fp;
  fp.k_max = k_max;
  fp.eta_star = solve_eta_star(params, tol);
  fp.pi_W = delta_sequence(params, fp.eta_star, k_max);
  fp.pi_I.assign(fp.pi_W.size(), 0.0);
  fp.pi_I[0] = fp.eta_star;

  const double d1 = params.d1();
  const double d2 = params.d2();
  for (int k = 1; k <= k_max; ++k) {
    const double prev = fp.pi_W[k - 1];
    if (prev == 0.0) break;
    const double log_base =
        std::log(params.lambda() / (k * params.theta())) + d1 * std::log(prev);
    const double value = std::exp(log_base / d2);
    fp.pi_I[k] = value < kUnderflowFloor ? 0.0 : value;
  }
  return fp;
}

FixedPoint fixed_point_equal_d(const ModelParams& params, int k_max,
                               double tol) {
  if (params.d1() != params.d2()) {
    throw std::invalid_argument(
        "fixed_point_equal_d requires d1 == d2 (got " + params.to_string() +
        ")");
  }
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  const int d = params.d1();
  const double dd = d;
  const double lambda = params.lambda();
  const double theta = params.theta();

  FixedPoint fp;
  fp.k_max = k_max;
  fp.eta_star = solve_eta_star(params, tol);
  const std::size_t n = static_cast<std::size_t>(k_max) + 1;
  fp.pi_I.assign(n, 0.0);
  fp.pi_W.assign(n, 0.0);
  fp.pi_I[0] = fp.eta_star;
  fp.pi_W[0] = params.rho() * std::pow(fp.eta_star, d);

  const double log_rho = std::log(params.rho());
  const double log_eta = std::log(fp.eta_star);

  // (d^{m+1} - 1)/(d - 1) = 1 + d + ... + d^m, which is m + 1 when d == 1.
  auto rho_exponent = [&](int m) {
    double sum = 0.0;
    double term = 1.0;
    for (int j = 0; j <= m; ++j) {
      sum += term;
      term *= dd;
    }
    return sum;
  };
  // sum_{j=1}^{m} d^{m-j} log((lambda + j theta)/(j theta))
  auto product_log = [&](int m) {
    double sum = 0.0;
    for (int j = 1; j <= m; ++j) {
      sum += std::pow(dd, m - j) * std::log1p(lambda / (j * theta));
    }
    return sum;
  };

  for (int k = 1; k <= k_max; ++k) {
    if (fp.pi_W[k - 1] == 0.0) break;
    const double log_w = product_log(k) + rho_exponent(k) * log_rho +
                         std::pow(dd, k + 1) * log_eta;
    const double log_i = std::log(lambda / (k * theta)) / dd +
                         product_log(k - 1) + rho_exponent(k - 1) * log_rho +
                         std::pow(dd, k) * log_eta;
    const double w = std::exp(log_w);
    const double i = std::exp(log_i);
    fp.pi_W[k] = w < kUnderflowFloor ? 0.0 : w;
    fp.pi_I[k] = i < kUnderflowFloor ? 0.0 : i;
  }
  return fp;
}

double verify_corollary_identity(const FixedPoint& fp,
                                 const ModelParams& params) {
  const double log_floor = std::log(fp.underflow_floor);
  const double log_lambda = std::log(params.lambda());
  double worst = 0.0;
  for (std::size_t k = 1; k < fp.levels(); ++k) {
    const double w_prev = fp.pi_W[k - 1];
    if (w_prev <= 0.0) continue;
    const double log_rhs = log_lambda + params.d1() * std::log(w_prev);
    if (log_rhs < log_floor) continue;
    const double i_k = fp.pi_I[k];
    if (i_k <= 0.0) {
      worst = std::max(worst, 1.0);
      continue;
    }
    const double log_lhs = std::log(static_cast<double>(k) * params.theta()) +
                           params.d2() * std::log(i_k);
    worst = std::max(worst, std::abs(std::expm1(log_lhs - log_rhs)));
  }
  return worst;
}

std::optional<int> joint_monotone_threshold(std::span<const double> w,
                                            std::span<const double> i) {
  const std::size_t n = std::min(w.size(), i.size());
  if (n < 2) return 0;
  auto decreasing = [](std::span<const double> s, std::size_t k) {
    return s[k + 1] < s[k] || (s[k] == 0.0 && s[k + 1] == 0.0);
  };
  std::optional<std::size_t> last_bad;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (!(decreasing(w, k) && decreasing(i, k))) last_bad = k;
  }
  if (!last_bad) return 0;
  if (*last_bad + 2 == n) return std::nullopt;
  return static_cast<int>(*last_bad + 1);
}

int detect_K(const FixedPoint& fp) {
  const auto k = joint_monotone_threshold(fp.pi_W, fp.pi_I);
  if (!k) {
    throw NumericError(
        "no joint monotone threshold within the truncation horizon");
  }
  return *k;
}

}  // namespace retrial
