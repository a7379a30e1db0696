#pragma once

#include <stdexcept>
#include <string>

namespace retrial {

/// Raised when a numeric kernel cannot produce a trustworthy result
/// (non-finite state, nothing left to fit, singular ratios, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rates and probe counts of the retrial supermarket model.
///
/// Construction validates everything: all rates finite and strictly
/// positive, both probe counts at least one, and offered load
/// rho = lambda / mu strictly below one.
class ModelParams {
 public:
  ModelParams(double lambda, double mu, double theta, int d1, int d2);

  double lambda() const noexcept { return lambda_; }
  double mu() const noexcept { return mu_; }
  double theta() const noexcept { return theta_; }
  int d1() const noexcept { return d1_; }
  int d2() const noexcept { return d2_; }
  double rho() const noexcept { return lambda_ / mu_; }

  /// Copy with different retrial parameters; level 0 of the fixed point
  /// does not depend on them.
  ModelParams with_retrial(double theta, int d2) const {
    return ModelParams(lambda_, mu_, theta, d1_, d2);
  }

  std::string to_string() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  double lambda_;
  double mu_;
  double theta_;
  int d1_;
  int d2_;
};

}  // namespace retrial
