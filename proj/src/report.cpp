#include "retrial/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace retrial {

OutputFormat parse_format(const std::string& text) {
  if (text == "csv") return OutputFormat::kCsv;
  if (text == "json") return OutputFormat::kJson;
  throw std::invalid_argument("unknown format '" + text +
                              "' (expected csv or json)");
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("row width does not match column count");
  }
  rows.push_back(std::move(row));
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::string cell_text(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else {
          return std::to_string(v);
        }
      },
      cell);
}

nlohmann::ordered_json cell_json(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return format_double(v);
        }
        return v;
      },
      cell);
}

}  // namespace

void write_csv(const Table& table, std::ostream& out) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out << (c ? "," : "") << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << cell_text(row[c]);
    }
    out << '\n';
  }
}

void write_json(const Table& table, const nlohmann::ordered_json& meta,
                std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["meta"] = meta;
  auto& data = doc["data"] = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      obj[table.columns[c]] = cell_json(row[c]);
    }
    data.push_back(std::move(obj));
  }
  out << doc.dump(2) << '\n';
}

void write_table(const Table& table, const nlohmann::ordered_json& meta,
                 OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::kCsv) {
    write_csv(table, out);
  } else {
    write_json(table, meta, out);
  }
}

void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& emit) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  try {
    {
      std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
      if (!file) throw std::runtime_error("cannot open " + tmp.string());
      emit(file);
      file.flush();
      if (!file) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

}  // namespace retrial
