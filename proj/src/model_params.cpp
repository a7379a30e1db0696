#include "retrial/model_params.hpp"

#include <cmath>
#include <sstream>

namespace retrial {

namespace {

void require_rate(double value, const char* name) {
  if (!std::isfinite(value) || value <= 0.0) {
    std::ostringstream os;
    os << name << " must be finite and > 0 (got " << value << ")";
    throw std::invalid_argument(os.str());
  }
}

}  // namespace

ModelParams::ModelParams(double lambda, double mu, double theta, int d1, int d2)
    : lambda_(lambda), mu_(mu), theta_(theta), d1_(d1), d2_(d2) {
  require_rate(lambda, "lambda");
  require_rate(mu, "mu");
  require_rate(theta, "theta");
  if (d1 < 1) throw std::invalid_argument("d1 must be >= 1");
  if (d2 < 1) throw std::invalid_argument("d2 must be >= 1");
  if (!(lambda / mu < 1.0)) {
    std::ostringstream os;
    os << "unstable system: rho = lambda/mu = " << lambda / mu << " must be < 1";
    throw std::invalid_argument(os.str());
  }
}

std::string ModelParams::to_string() const {
  std::ostringstream os;
  os << "lambda=" << lambda_ << " mu=" << mu_ << " theta=" << theta_
     << " d1=" << d1_ << " d2=" << d2_;
  return os.str();
}

}  // namespace retrial
