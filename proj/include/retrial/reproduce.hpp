#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "retrial/model_params.hpp"
#include "retrial/report.hpp"
#include "retrial/sojourn.hpp"

namespace retrial {

/// eta-table, table1, table2, table3, fig4, fig5, fig6, fig7.
const std::vector<std::string>& reproduce_targets();

struct TrendVerdict {
  std::string series;  // e.g. "d2=1"
  std::string axis;    // "d1", "d2" or "d"
  bool decreasing = false;
};

struct ReproduceResult {
  Table table{{}};
  nlohmann::ordered_json meta;
  int cells = 0;     // compared cells (tables only)
  int failures = 0;  // cells outside tolerance
  std::vector<TrendVerdict> trends;

  bool pass() const { return failures == 0; }
};

/// Throws std::invalid_argument for an unknown target.
ReproduceResult reproduce(std::string_view target);

/// Mixture sojourn time with the term cap doubled (from 512 up to 2^20)
/// until the summand tolerance is met.
SojournTable converged_sojourn(const ModelParams& params,
                               double term_tol = kDefaultTermTol);

/// A printed 0 stands for anything below tol; otherwise |computed - printed|
/// must not exceed tol.
bool matches_printed(double computed, double printed, double tol);

}  // namespace retrial
