#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace retrial {

enum class OutputFormat { kCsv, kJson };

OutputFormat parse_format(const std::string& text);

using Cell = std::variant<std::int64_t, double, bool, std::string>;

/// Column-oriented result set emitted by every CLI subcommand.
///
/// CSV: header row, comma separator, dot decimal, LF endings, doubles in
/// shortest round-trip form. JSON: {"meta": {...}, "data": [{col: value}]}.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  explicit Table(std::vector<std::string> cols) : columns(std::move(cols)) {}

  void add(std::vector<Cell> row);
};

std::string format_double(double value);

void write_csv(const Table& table, std::ostream& out);
void write_json(const Table& table, const nlohmann::ordered_json& meta,
                std::ostream& out);
void write_table(const Table& table, const nlohmann::ordered_json& meta,
                 OutputFormat format, std::ostream& out);

/// Writes through `emit` into path.tmp and renames it over `path` only when
/// emit returns normally; the temporary is removed otherwise.
void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& emit);

}  // namespace retrial
