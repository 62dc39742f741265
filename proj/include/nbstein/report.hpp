#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nbstein/errors.hpp"

namespace nbstein {

/// Locale-independent, 17 significant digits.
inline std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// Non-finite numbers become strings so the output stays valid JSON.
inline nlohmann::ordered_json json_number(double x) {
  if (std::isfinite(x)) return x;
  return fmt_double(x);
}

namespace detail {

struct Cell {
  std::string text;
  nlohmann::ordered_json value;
};

inline Cell cell(double x) { return {fmt_double(x), json_number(x)}; }
inline Cell cell(std::int64_t x) { return {std::to_string(x), x}; }
inline Cell cell(int x) { return {std::to_string(x), x}; }
inline Cell cell(std::uint64_t x) { return {std::to_string(x), x}; }
inline Cell cell(bool x) { return {x ? "true" : "false", x}; }
inline Cell cell(const std::string& x) { return {x, x}; }
inline Cell cell(const char* x) { return {x, x}; }

}  // namespace detail

/// A table rendered either as CSV (header row, '.' decimals, 17 significant
/// digits) or as a JSON array of objects.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  template <class... Cells>
  void row(const Cells&... cells) {
    static_assert(sizeof...(Cells) > 0);
    std::vector<detail::Cell> r{detail::cell(cells)...};
    if (r.size() != columns_.size()) throw DomainError("CsvTable: row width mismatch");
    rows_.push_back(std::move(r));
  }

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t size() const { return rows_.size(); }

  std::string row_str(std::size_t i) const {
    std::string out;
    for (std::size_t k = 0; k < rows_[i].size(); ++k) {
      if (k) out += ',';
      out += rows_[i][k].text;
    }
    return out;
  }

  std::string header_str() const {
    std::string out;
    for (std::size_t k = 0; k < columns_.size(); ++k) {
      if (k) out += ',';
      out += columns_[k];
    }
    return out;
  }

  std::string str() const {
    std::string out = header_str() + "\n";
    for (std::size_t i = 0; i < rows_.size(); ++i) out += row_str(i) + "\n";
    return out;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows_) {
      nlohmann::ordered_json obj;
      for (std::size_t i = 0; i < columns_.size(); ++i) obj[columns_[i]] = r[i].value;
      arr.push_back(obj);
    }
    return arr;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<detail::Cell>> rows_;
};

inline std::string dump_json(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

/// Writes to stdout when dest is empty or "-".
inline void write_output(std::string_view text, const std::string& dest) {
  if (dest.empty() || dest == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("cannot write to stdout");
    return;
  }
  std::ofstream out(dest, std::ios::binary);
  if (!out) throw IoError("cannot open " + dest + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("cannot write " + dest);
}

}  // namespace nbstein
