#include "retrial/reproduce.hpp"

#include <cmath>
#include <stdexcept>

#include "retrial/fixed_point.hpp"
#include "retrial/published_values.hpp"

namespace retrial {

namespace {

ModelParams table_params(int d1, int d2) {
  return ModelParams(published::kLambda, published::kMu, published::kTheta, d1,
                     d2);
}

ReproduceResult eta_table() {
  ReproduceResult r;
  r.table = Table({"d1", "rho", "computed", "published", "abs_diff", "pass",
                   "truncated_match"});
  for (const auto& row : published::kEtaGrid) {
    for (std::size_t j = 0; j < row.eta.size(); ++j) {
      const double rho = 0.1 * static_cast<double>(j + 1);
      const double eta = solve_eta_star(ModelParams(rho, 1.0, 1.0, row.d1, 1));
      const double diff = std::abs(eta - row.eta[j]);
      const bool ok = diff <= published::kEtaTol;
      // Printed digits equal the computed root cut (not rounded) to 5 places.
      const bool truncated =
          std::abs(std::floor(eta * 1e5) - std::round(row.eta[j] * 1e5)) < 0.5;
      ++r.cells;
      if (!ok) ++r.failures;
      r.table.add({std::int64_t{row.d1}, rho, eta, row.eta[j], diff, ok,
                   truncated});
    }
  }
  r.meta["tolerance"] = published::kEtaTol;
  return r;
}

ReproduceResult fixed_point_table(
    const std::vector<published::FixedPointRow>& rows) {
  ReproduceResult r;
  r.table = Table({"d1", "d2", "quantity", "k", "computed", "published",
                   "abs_diff", "pass"});
  for (const auto& row : rows) {
    const auto params = table_params(row.d1, row.d2);
    const FixedPoint fp = fixed_point(params);
    for (std::size_t k = 0; k < row.w.size(); ++k) {
      for (const bool busy : {true, false}) {
        const double computed = busy ? fp.pi_W[k] : fp.pi_I[k];
        const double printed = busy ? row.w[k] : row.i[k];
        const bool ok = matches_printed(computed, printed, published::kTableTol);
        ++r.cells;
        if (!ok) ++r.failures;
        r.table.add({std::int64_t{row.d1}, std::int64_t{row.d2},
                     std::string(busy ? "pi_W" : "pi_I"),
                     static_cast<std::int64_t>(k), computed, printed,
                     std::abs(computed - printed), ok});
      }
    }
  }
  r.meta["tolerance"] = published::kTableTol;
  return r;
}

struct SeriesSpec {
  std::string series;
  std::string axis;
  std::vector<std::pair<int, int>> points;  // (d1, d2)
};

ReproduceResult sojourn_figure(const std::vector<SeriesSpec>& specs) {
  ReproduceResult r;
  r.table = Table({"series", "d1", "d2", "expected_sojourn", "terms",
                   "converged"});
  for (const auto& spec : specs) {
    double previous = INFINITY;
    bool decreasing = true;
    for (const auto& [d1, d2] : spec.points) {
      const SojournTable t = converged_sojourn(table_params(d1, d2));
      r.table.add({spec.series, std::int64_t{d1}, std::int64_t{d2}, t.total,
                   std::int64_t{t.k_sum}, t.converged});
      decreasing = decreasing && t.total < previous;
      previous = t.total;
    }
    r.trends.push_back({spec.series, spec.axis, decreasing});
  }
  auto& verdicts = r.meta["trends"] = nlohmann::ordered_json::array();
  for (const auto& v : r.trends) {
    verdicts.push_back(
        {{"series", v.series}, {"axis", v.axis}, {"decreasing", v.decreasing}});
  }
  return r;
}

std::vector<SeriesSpec> fig4() {
  std::vector<SeriesSpec> specs;
  for (int d2 : {1, 2, 3}) {
    SeriesSpec s{"d2=" + std::to_string(d2), "d1", {}};
    for (int d1 = 1; d1 <= 10; ++d1) s.points.emplace_back(d1, d2);
    specs.push_back(std::move(s));
  }
  return specs;
}

std::vector<SeriesSpec> fig5() {
  std::vector<SeriesSpec> specs;
  for (int d1 : {1, 2, 3}) {
    SeriesSpec s{"d1=" + std::to_string(d1), "d2", {}};
    for (int d2 : {1, 2, 3, 5, 10, 20, 50, 100, 200, 500, 1000}) {
      s.points.emplace_back(d1, d2);
    }
    specs.push_back(std::move(s));
  }
  return specs;
}

std::vector<SeriesSpec> fig6() {
  SeriesSpec s{"d1=d2", "d", {}};
  for (int d = 1; d <= 10; ++d) s.points.emplace_back(d, d);
  return {s};
}

std::vector<SeriesSpec> fig7() {
  std::vector<SeriesSpec> specs;
  for (int d1 = 1; d1 <= 5; ++d1) {
    SeriesSpec s{"d1=" + std::to_string(d1), "d2", {}};
    for (int d2 = 1; d2 <= 5; ++d2) s.points.emplace_back(d1, d2);
    specs.push_back(std::move(s));
  }
  for (int d2 = 1; d2 <= 5; ++d2) {
    SeriesSpec s{"d2=" + std::to_string(d2), "d1", {}};
    for (int d1 = 1; d1 <= 5; ++d1) s.points.emplace_back(d1, d2);
    specs.push_back(std::move(s));
  }
  return specs;
}

}  // namespace

const std::vector<std::string>& reproduce_targets() {
  static const std::vector<std::string> targets{
      "eta-table", "table1", "table2", "table3", "fig4", "fig5", "fig6", "fig7"};
  return targets;
}

bool matches_printed(double computed, double printed, double tol) {
  if (printed == 0.0) return computed < tol;
  return std::abs(computed - printed) <= tol;
}

SojournTable converged_sojourn(const ModelParams& params, double term_tol) {
  for (int terms = kDefaultSojournTerms;; terms *= 2) {
    const FixedPoint fp = fixed_point(params, terms + 2);
    SojournTable t = expected_sojourn(fp, params, terms, term_tol);
    if (t.converged || terms >= (1 << 20)) return t;
  }
}

ReproduceResult reproduce(std::string_view target) {
  ReproduceResult r;
  if (target == "eta-table") {
    r = eta_table();
  } else if (target == "table1") {
    r = fixed_point_table(published::kTable1);
  } else if (target == "table2") {
    r = fixed_point_table(published::kTable2);
  } else if (target == "table3") {
    r = fixed_point_table(published::kTable3);
  } else if (target == "fig4") {
    r = sojourn_figure(fig4());
  } else if (target == "fig5") {
    r = sojourn_figure(fig5());
  } else if (target == "fig6") {
    r = sojourn_figure(fig6());
  } else if (target == "fig7") {
    r = sojourn_figure(fig7());
  } else {
    throw std::invalid_argument("unknown reproduce target '" +
                                std::string(target) + "'");
  }
  r.meta["target"] = std::string(target);
  r.meta["cells"] = r.cells;
  r.meta["failures"] = r.failures;
  return r;
}

}  // namespace retrial
