#include "retrial/mean_field.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace retrial {

namespace {

double ipow(double x, int n) {
  double result = 1.0;
  while (n > 0) {
    if (n & 1) result *= x;
    x *= x;
    n >>= 1;
  }
  return result;
}

void validate_config(const OdeConfig& config) {
  if (!(config.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(config.t_max > 0.0)) throw std::invalid_argument("t_max must be > 0");
  if (config.k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  if (config.sample_every < 1) {
    throw std::invalid_argument("sample_every must be >= 1");
  }
}

// Writes F(state) into out; out must already have the state's shape.
void drift_into(const std::vector<double>& s_I, const std::vector<double>& s_W,
                const ModelParams& params, double idle_boundary,
                Derivative& out) {
  const double lambda = params.lambda();
  const double mu = params.mu();
  const double theta = params.theta();
  const int d1 = params.d1();
  const int d2 = params.d2();
  const std::size_t top = s_I.size() - 1;

  auto idle_at = [&](std::size_t k) {
    return k <= top ? s_I[k] : idle_boundary;
  };

  const double arrive_idle0 = lambda * ipow(s_I[0], d1);
  out.d_I[0] = -arrive_idle0 + mu * s_W[0];
  out.d_W[0] = arrive_idle0 - lambda * ipow(s_W[0], d1) +
               theta * ipow(idle_at(1), d2) - mu * s_W[0];

  double blocked_prev = lambda * ipow(s_W[0], d1);
  for (std::size_t k = 1; k <= top; ++k) {
    const double kd = static_cast<double>(k);
    const double blocked = lambda * ipow(s_W[k], d1);
    const double arrive_idle = lambda * ipow(s_I[k], d1);
    out.d_W[k] = blocked_prev - blocked +
                 (kd + 1.0) * theta * ipow(idle_at(k + 1), d2) + arrive_idle -
                 mu * s_W[k];
    out.d_I[k] = -arrive_idle - kd * theta * ipow(s_I[k], d2) + mu * s_W[k];
    blocked_prev = blocked;
  }
}

}  // namespace

StateVector StateVector::empty(int k_max) {
  if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
  StateVector s;
  s.s_I.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  s.s_W.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  s.s_I[0] = 1.0;
  return s;
}

StateVector StateVector::from_fixed_point(const FixedPoint& fp) {
  StateVector s;
  s.s_I = fp.pi_I;
  s.s_W = fp.pi_W;
  return s;
}

double Derivative::max_abs() const {
  double m = 0.0;
  for (double v : d_I) m = std::max(m, std::abs(v));
  for (double v : d_W) m = std::max(m, std::abs(v));
  return m;
}

Derivative drift(const StateVector& state, const ModelParams& params,
                 double idle_boundary) {
  if (state.s_I.empty() || state.s_I.size() != state.s_W.size()) {
    throw std::invalid_argument("state vector sequences must be non-empty and "
                                "of equal length");
  }
  Derivative out;
  out.d_I.assign(state.s_I.size(), 0.0);
  out.d_W.assign(state.s_W.size(), 0.0);
  drift_into(state.s_I, state.s_W, params, idle_boundary, out);
  return out;
}

double closure_boundary(ClosureRule rule, const ModelParams& params,
                        int k_max) {
  switch (rule) {
    case ClosureRule::kZeroInflow:
      return 0.0;
    case ClosureRule::kFixedPointTail:
      return fixed_point(params, k_max + 1).pi_I.back();
  }
  return 0.0;
}

Trajectory integrate(const StateVector& initial, const ModelParams& params,
                     const OdeConfig& config) {
  validate_config(config);
  if (initial.k_max() != config.k_max ||
      initial.s_W.size() != initial.s_I.size()) {
    throw std::invalid_argument("initial state shape does not match k_max");
  }
  const double boundary = closure_boundary(config.closure, params, config.k_max);
  const std::size_t n = initial.s_I.size();

  Trajectory traj{params, {}, 0, 0, 0.0};
  traj.samples.push_back(initial);

  std::vector<double> y_I = initial.s_I;
  std::vector<double> y_W = initial.s_W;
  std::vector<double> tmp_I(n), tmp_W(n);
  Derivative k1{std::vector<double>(n), std::vector<double>(n)};
  Derivative k2 = k1, k3 = k1, k4 = k1;

  const double t0 = initial.t;
  const auto total_steps =
      static_cast<std::int64_t>(std::ceil(config.t_max / config.dt - 1e-9));

  for (std::int64_t step = 1; step <= total_steps; ++step) {
    const double t_prev = t0 + static_cast<double>(step - 1) * config.dt;
    const double t_next = step == total_steps
                              ? t0 + config.t_max
                              : t0 + static_cast<double>(step) * config.dt;
    const double h = t_next - t_prev;

    drift_into(y_I, y_W, params, boundary, k1);
    for (std::size_t k = 0; k < n; ++k) {
      tmp_I[k] = y_I[k] + 0.5 * h * k1.d_I[k];
      tmp_W[k] = y_W[k] + 0.5 * h * k1.d_W[k];
    }
    drift_into(tmp_I, tmp_W, params, boundary, k2);
    for (std::size_t k = 0; k < n; ++k) {
      tmp_I[k] = y_I[k] + 0.5 * h * k2.d_I[k];
      tmp_W[k] = y_W[k] + 0.5 * h * k2.d_W[k];
    }
    drift_into(tmp_I, tmp_W, params, boundary, k3);
    for (std::size_t k = 0; k < n; ++k) {
      tmp_I[k] = y_I[k] + h * k3.d_I[k];
      tmp_W[k] = y_W[k] + h * k3.d_W[k];
    }
    drift_into(tmp_I, tmp_W, params, boundary, k4);

    bool finite = true;
    for (std::size_t k = 0; k < n; ++k) {
      y_I[k] += h / 6.0 *
                (k1.d_I[k] + 2.0 * k2.d_I[k] + 2.0 * k3.d_I[k] + k4.d_I[k]);
      y_W[k] += h / 6.0 *
                (k1.d_W[k] + 2.0 * k2.d_W[k] + 2.0 * k3.d_W[k] + k4.d_W[k]);
      finite = finite && std::isfinite(y_I[k]) && std::isfinite(y_W[k]);
    }
    if (!finite) {
      std::ostringstream os;
      os << "integration became non-finite at t=" << t_next
         << " (dt=" << config.dt << ")";
      throw NumericError(os.str());
    }

    for (std::size_t k = 0; k < n; ++k) {
      for (double* v : {&y_I[k], &y_W[k]}) {
        const double c = std::clamp(*v, 0.0, 1.0);
        if (c != *v) {
          *v = c;
          ++traj.clamp_count;
        }
      }
    }
    traj.max_level0_defect =
        std::max(traj.max_level0_defect, std::abs(y_I[0] + y_W[0] - 1.0));
    if (config.renormalize) y_I[0] = 1.0 - y_W[0];

    traj.steps = step;
    if (step % config.sample_every == 0 || step == total_steps) {
      traj.samples.push_back(StateVector{y_I, y_W, t_next});
    }
  }
  return traj;
}

MonotonicityReport check_monotonicity(const StateVector& state) {
  MonotonicityReport report;
  const std::size_t n = std::min(state.s_I.size(), state.s_W.size());
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double here = state.s_W[k] + state.s_I[k];
    const double next = state.s_W[k + 1] + state.s_I[k + 1];
    if (here <= kUnderflowFloor && next <= kUnderflowFloor) continue;
    if (!(next < here)) report.level_sums_ok = false;
  }
  report.k_observed = joint_monotone_threshold(state.s_W, state.s_I);
  return report;
}

namespace {

StateVector random_state(int k_max, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  StateVector s = StateVector::empty(k_max);
  s.s_W[0] = unit(rng);
  s.s_I[0] = 1.0 - s.s_W[0];
  for (auto* seq : {&s.s_W, &s.s_I}) {
    const double cap = (*seq)[0];
    for (std::size_t k = 1; k < seq->size(); ++k) (*seq)[k] = cap * unit(rng);
    std::sort(seq->begin() + 1, seq->end(), std::greater<>());
  }
  return s;
}

}  // namespace

double lipschitz_probe(const ModelParams& params, int samples,
                       std::uint64_t seed, int k_max) {
  if (samples < 2) throw std::invalid_argument("samples must be >= 2");
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const StateVector y = random_state(k_max, rng);
    const StateVector z = random_state(k_max, rng);
    const double dist = sup_distance(y, z);
    if (dist == 0.0) continue;
    const Derivative fy = drift(y, params);
    const Derivative fz = drift(z, params);
    double diff = 0.0;
    for (std::size_t k = 0; k < fy.d_I.size(); ++k) {
      diff = std::max(diff, std::abs(fy.d_I[k] - fz.d_I[k]));
      diff = std::max(diff, std::abs(fy.d_W[k] - fz.d_W[k]));
    }
    worst = std::max(worst, diff / dist);
  }
  return worst;
}

bool dominated_by(const StateVector& a, const StateVector& b, double tol) {
  const std::size_t n = std::min(a.s_I.size(), b.s_I.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (a.s_W[k] > b.s_W[k] + tol) return false;
    if (k >= 1 && a.s_I[k] > b.s_I[k] + tol) return false;
  }
  return true;
}

double sup_distance(const StateVector& a, const StateVector& b) {
  const std::size_t n = std::min(a.s_I.size(), b.s_I.size());
  double m = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    m = std::max(m, std::abs(a.s_I[k] - b.s_I[k]));
    m = std::max(m, std::abs(a.s_W[k] - b.s_W[k]));
  }
  return m;
}

}  // namespace retrial
