#include "retrial/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace retrial {

namespace {

constexpr double kSingularGap = 1e-14;
constexpr double kSingularDenominator = 1e-12;

void require_fp_covers(const FixedPoint& fp, std::size_t levels) {
  if (fp.levels() < levels) {
    throw std::invalid_argument("fixed point horizon shorter than state");
  }
}

// lhs <= rhs up to rounding in the terms that produced them.
bool holds(double lhs, double rhs, double scale) {
  return std::isfinite(lhs) && std::isfinite(rhs) &&
         lhs <= rhs + 1e-9 * (1.0 + scale);
}

}  // namespace

PotentialWeights PotentialWeights::unit(std::size_t levels) {
  return PotentialWeights{std::vector<double>(levels, 1.0),
                          std::vector<double>(levels, 1.0), 0.0, true};
}

double potential(const StateVector& state, const FixedPoint& fp,
                 const PotentialWeights& weights) {
  const std::size_t n = state.s_I.size();
  require_fp_covers(fp, n);
  if (weights.w.size() < n || weights.v.size() < n) {
    throw std::invalid_argument("weights shorter than state");
  }
  double phi = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    phi += weights.w[k] * (fp.pi_I[k] - state.s_I[k]);
    phi += weights.v[k] * (fp.pi_W[k] - state.s_W[k]);
  }
  return phi;
}

WeightRatios weight_ratios(const StateVector& state, const FixedPoint& fp,
                           const ModelParams& params, std::size_t levels) {
  if (levels < 1 || levels > state.s_I.size()) {
    throw std::invalid_argument("levels must be in [1, state levels]");
  }
  require_fp_covers(fp, levels);
  auto gap = [](double pi, double s, const char* which, std::size_t k) {
    const double diff = pi - s;
    if (std::abs(diff) < kSingularGap) {
      std::ostringstream os;
      os << "singular ratio: |pi_" << which << "[" << k << "] - S_" << which
         << "[" << k << "]| = " << std::abs(diff) << " < " << kSingularGap;
      throw NumericError(os.str());
    }
    return diff;
  };

  WeightRatios r;
  for (std::size_t k = 0; k < levels; ++k) {
    const double s = state.s_I[k];
    const double diff = gap(fp.pi_I[k], s, "I", k);
    r.c.push_back(std::pow(s, params.d1()) / diff);
    r.d.push_back(std::pow(s, params.d2()) / diff);
  }
  for (std::size_t k = 0; k + 1 < levels; ++k) {
    const double s = state.s_W[k];
    const double diff = gap(fp.pi_W[k], s, "W", k);
    r.g.push_back(std::pow(s, params.d1()) / diff);
    r.h.push_back(s / diff);
  }
  return r;
}

PotentialWeights weights_from_ratios(const WeightRatios& ratios,
                                     const ModelParams& params, double delta) {
  const std::size_t levels = ratios.c.size();
  if (levels < 1 || ratios.d.size() < levels || ratios.g.size() + 1 < levels ||
      ratios.h.size() + 1 < levels) {
    throw std::invalid_argument("ratio sequences have inconsistent lengths");
  }
  const double lambda = params.lambda();
  const double mu = params.mu();
  const double theta = params.theta();
  const auto& c = ratios.c;
  const auto& d = ratios.d;
  const auto& g = ratios.g;
  const auto& h = ratios.h;

  PotentialWeights pw;
  pw.delta = delta;
  pw.w.assign(levels, 0.0);
  pw.v.assign(levels, 0.0);
  bool feasible = true;

  // Step one and two.
  pw.w[0] = 1.0;
  const double den0 = lambda * c[0] - delta;
  if (std::abs(den0) < kSingularDenominator) feasible = false;
  pw.v[0] = lambda / den0;

  // Steps three and four share one form once w[0] = 1.
  for (std::size_t k = 1; k < levels; ++k) {
    const double kd = static_cast<double>(k);
    const double den_v = lambda * g[k - 1];
    if (std::abs(den_v) < kSingularDenominator) feasible = false;
    pw.v[k] = (delta * pw.w[k - 1] + lambda * pw.v[k - 1] * g[k - 1] +
               mu * (pw.v[k - 1] - pw.w[k - 1]) * h[k - 1]) /
              den_v;
    const double den_w = lambda * c[k] + kd * theta * d[k];
    if (std::abs(den_w) < kSingularDenominator) feasible = false;
    pw.w[k] = (lambda * pw.v[k] * c[k] + kd * theta * pw.v[k - 1] * d[k] -
               delta * pw.v[k]) /
              den_w;
  }

  for (std::size_t k = 0; k < levels; ++k) {
    feasible = feasible && std::isfinite(pw.w[k]) && std::isfinite(pw.v[k]);
  }
  if (feasible) {
    {
      const double a = lambda * (pw.w[0] - pw.v[0]) * c[0];
      const double rhs = -delta * pw.v[0];
      feasible = holds(a, rhs, std::abs(a) + std::abs(rhs));
    }
    for (std::size_t k = 1; feasible && k < levels; ++k) {
      const double a = lambda * (pw.w[k] - pw.v[k]) * c[k];
      const double b = static_cast<double>(k) * theta *
                       (pw.w[k] - pw.v[k - 1]) * d[k];
      const double rhs = -delta * pw.v[k];
      feasible = holds(a + b, rhs, std::abs(a) + std::abs(b) + std::abs(rhs));
    }
    // The last level's inequality needs v[levels], which is past the horizon.
    for (std::size_t l = 0; feasible && l + 1 < levels; ++l) {
      const double a = lambda * (pw.v[l] - pw.v[l + 1]) * g[l];
      const double b = mu * (pw.v[l] - pw.w[l]) * h[l];
      const double rhs = -delta * pw.w[l];
      feasible = holds(a + b, rhs, std::abs(a) + std::abs(b) + std::abs(rhs));
    }
  }
  pw.feasible = feasible;
  return pw;
}

PotentialWeights compute_weights(const StateVector& state,
                                 const FixedPoint& fp,
                                 const ModelParams& params, double delta,
                                 std::optional<std::size_t> levels) {
  const std::size_t n = levels.value_or(state.s_I.size());
  return weights_from_ratios(weight_ratios(state, fp, params, n), params,
                             delta);
}

double l1_distance(const StateVector& state, const FixedPoint& fp) {
  const std::size_t n = state.s_I.size();
  require_fp_covers(fp, n);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sum += std::abs(fp.pi_I[k] - state.s_I[k]);
    sum += std::abs(fp.pi_W[k] - state.s_W[k]);
  }
  return sum;
}

DecayFit fit_decay(const Trajectory& traj, const FixedPoint& fp,
                   std::optional<std::array<double, 2>> window) {
  if (traj.samples.empty()) throw std::invalid_argument("empty trajectory");
  const double t_begin = traj.samples.front().t;
  const double t_end = traj.samples.back().t;
  const std::array<double, 2> win =
      window.value_or(std::array<double, 2>{0.5 * (t_begin + t_end), t_end});
  if (!(win[0] < win[1])) {
    throw std::invalid_argument("fit window must satisfy t_start < t_end");
  }

  std::vector<double> ts;
  std::vector<double> ys;
  std::size_t in_window = 0;
  for (const auto& s : traj.samples) {
    if (s.t < win[0] || s.t > win[1]) continue;
    ++in_window;
    const double dist = l1_distance(s, fp);
    if (dist > 1e-12) {
      ts.push_back(s.t);
      ys.push_back(std::log(dist));
    }
  }
  if (in_window > 0 && ts.empty()) {
    throw NumericError("already converged: distance to the fixed point is "
                       "numerically zero across the fit window");
  }
  if (ts.size() < 10) {
    throw NumericError("fit window holds fewer than 10 usable samples");
  }

  const double m = static_cast<double>(ts.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    my += ys[i];
  }
  mt /= m;
  my /= m;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - mt) * (ts[i] - mt);
    sty += (ts[i] - mt) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sty / stt;
  const double intercept = my - slope * mt;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ys[i] - (intercept + slope * ts[i]);
    ss_res += r * r;
  }
  const double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;

  DecayFit fit;
  fit.c0_hat = std::exp(intercept);
  fit.delta_hat = -slope;
  fit.r_squared = std::clamp(r2, 0.0, 1.0);
  fit.window = win;
  fit.points = ts.size();
  return fit;
}

bool check_domination(const Trajectory& traj, const FixedPoint& fp,
                      double tol) {
  if (traj.samples.empty()) throw std::invalid_argument("empty trajectory");
  require_fp_covers(fp, traj.samples.front().s_I.size());
  const StateVector bound = StateVector::from_fixed_point(fp);
  if (!dominated_by(traj.samples.front(), bound, tol)) {
    throw std::invalid_argument(
        "domination check requires an initial state below the fixed point");
  }
  return std::all_of(traj.samples.begin(), traj.samples.end(),
                     [&](const StateVector& s) {
                       return dominated_by(s, bound, tol);
                     });
}

}  // namespace retrial
