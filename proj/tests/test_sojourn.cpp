#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "retrial/fixed_point.hpp"
#include "retrial/reproduce.hpp"
#include "retrial/sojourn.hpp"

using namespace retrial;

namespace {

ModelParams model(int d1, int d2) { return ModelParams(1.0, 5.0, 2.0, d1, d2); }

double total(int d1, int d2) { return converged_sojourn(model(d1, d2)).total; }

}  // namespace

TEST_CASE("retrial sojourn by hand, d1 = 1, d2 = 2, k = 1") {
  // From pi_1^I = 0.28868, pi_2^I = 0.15092, pi_1^W = 0.09107,
  // pi_2^W = 0.04843 (five printed decimals).
  const FixedPoint fp = fixed_point(model(1, 2), 8);
  CHECK(std::abs(sojourn_retrial(fp, model(1, 2), 1) - 0.0121843350) < 2e-6);
}

TEST_CASE("primary sojourn by hand, d1 = 2, d2 = 1, k = 0") {
  // From the four-decimal published d2 = 1 row, level 2 printed as 0.
  const FixedPoint fp = fixed_point(model(2, 1), 8);
  CHECK(std::abs(sojourn_retrial(fp, model(2, 1), 1) - 0.0021291554) < 1.5e-5);
  CHECK(std::abs(sojourn_primary(fp, model(2, 1), 0) - 0.1459201736) < 3e-5);
}

TEST_CASE("levels past the underflow horizon contribute nothing") {
  const ModelParams p = model(10, 1);
  const FixedPoint fp = fixed_point(p, 40);
  CHECK(fp.pi_I[30] == 0.0);
  CHECK(sojourn_retrial(fp, p, 30) == 0.0);
  CHECK(sojourn_primary(fp, p, 30) == 0.0);
}

TEST_CASE("argument checks") {
  const FixedPoint fp = fixed_point(model(2, 1), 8);
  CHECK_THROWS_AS(sojourn_retrial(fp, model(2, 1), 0), std::invalid_argument);
  CHECK_THROWS_AS(sojourn_primary(fp, model(2, 1), 7), std::invalid_argument);
  CHECK_THROWS_AS(expected_sojourn(fp, model(2, 1), 7), std::invalid_argument);
  CHECK_THROWS_AS(expected_sojourn_equal_d(model(2, 1)),
                  std::invalid_argument);
}

TEST_CASE("series stops once a summand is negligible") {
  const ModelParams p = model(2, 1);
  const SojournTable t = expected_sojourn(fixed_point(p, 66), p, 64);
  CHECK(t.converged);
  CHECK(t.k_sum < 64);
  CHECK(t.tail_bound < kDefaultTermTol);
  CHECK(t.summands.size() == static_cast<std::size_t>(t.k_sum) + 1);
  double sum = 0.0;
  for (double s : t.summands) sum += s;
  CHECK(sum == t.total);
  CHECK_FALSE(t.negative_increments);
}

TEST_CASE("equal-d delta form equals the general series") {
  for (int d : {1, 2, 3, 4}) {
    const ModelParams p = model(d, d);
    const double general = converged_sojourn(p).total;
    const double delta_form = expected_sojourn_equal_d(p, 4096);
    CAPTURE(d);
    CHECK(std::abs(general - delta_form) <= 1e-10 * general);
  }
}

TEST_CASE("delta form with a single nonzero delta") {
  const ModelParams p = model(2, 2);
  const double eta = 0.8;
  const double a = 0.1;
  const std::vector<double> deltas{a, 0.0, 0.0, 0.0, 0.0, 0.0};
  const double ad = a * a;
  const double expected = (eta * eta - ad / 2.0) / 5.0 + 0.2 * ad * ad / 2.0 +
                          0.2 * ad / 2.0;
  CHECK(sojourn_series_from_deltas(p, eta, deltas, 3) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("more probes for primaries shorten the stay when d2 = 1") {
  double prev = INFINITY;
  for (int d1 : {1, 2, 3, 4, 5, 8, 10}) {
    const double t = total(d1, 1);
    CHECK(t < prev);
    prev = t;
  }
}

TEST_CASE("more probes for retrials shorten the stay") {
  for (int d1 : {1, 2}) {
    double prev = INFINITY;
    for (int d2 : {1, 2, 3, 5, 10, 20}) {
      const double t = total(d1, d2);
      CAPTURE(d1);
      CAPTURE(d2);
      CHECK(t < prev);
      prev = t;
    }
  }
}

TEST_CASE("equal probe counts shorten the stay as d grows") {
  double prev = INFINITY;
  for (int d = 1; d <= 6; ++d) {
    const double t = total(d, d);
    CHECK(t < prev);
    prev = t;
  }
}

TEST_CASE("heavy-tailed series still converges") {
  const SojournTable t = converged_sojourn(model(1, 3));
  CHECK(t.converged);
  CHECK(t.k_sum > 1000);
}
