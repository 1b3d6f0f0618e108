#pragma once

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dzip/calendar.hpp"
#include "dzip/count_model.hpp"
#include "dzip/error.hpp"

namespace dzip {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace detail

/// Reads a `week,count` CSV. Weeks are ISO weeks (2015-W40) or the ISO date
/// of the week's Monday; rows must be consecutive weeks.
inline CountSeries parse_csv(std::istream& in, std::string_view source = "<stream>") {
  std::vector<std::string> labels;
  std::vector<Count> counts;
  std::vector<WeekLabel> weeks;
  std::string line;
  std::size_t row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto comma = view.find(',');
    if (comma == std::string_view::npos) {
      throw DataError(std::string(source) + ": row " + std::to_string(row) + ": expected `week,count`");
    }
    const auto week_text = detail::trim(view.substr(0, comma));
    const auto count_text = detail::trim(view.substr(comma + 1));
    auto week = parse_week_label(week_text);
    if (!week) {
      if (first) {  // header
        first = false;
        continue;
      }
      throw DataError(std::string(source) + ": row " + std::to_string(row) + ": invalid week '" +
                      std::string(week_text) + "'");
    }
    first = false;
    long long value = 0;
    auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), value);
    if (ec != std::errc{} || ptr != count_text.data() + count_text.size() || count_text.empty()) {
      throw DataError(std::string(source) + ": row " + std::to_string(row) + ": count '" +
                      std::string(count_text) + "' is not an integer");
    }
    if (value < 0) {
      throw DataError(std::string(source) + ": row " + std::to_string(row) + ": negative count " +
                      std::to_string(value));
    }
    if (!weeks.empty()) {
      const auto step = (week->monday - weeks.back().monday).count();
      if (step <= 0) {
        throw DataError(std::string(source) + ": row " + std::to_string(row) + ": week '" +
                        std::string(week_text) + "' is not after the previous row");
      }
      if (step != 7) {
        std::string missing;
        for (auto d = weeks.back().monday + std::chrono::days{7}; d < week->monday; d += std::chrono::days{7}) {
          if (!missing.empty()) missing += ", ";
          missing += format_week_label(d, week->style);
        }
        throw DataError(std::string(source) + ": row " + std::to_string(row) + ": missing weeks " +
                        missing);
      }
    }
    weeks.push_back(*week);
    labels.emplace_back(week_text);
    counts.push_back(value);
  }
  return CountSeries(std::move(labels), std::move(counts));
}

inline CountSeries parse_csv_string(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

inline CountSeries parse_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  return parse_csv(in, path.string());
}

inline void write_csv(std::ostream& out, const CountSeries& series) {
  out << "week,count\n";
  for (std::size_t t = 0; t < series.size(); ++t) out << series.labels()[t] << ',' << series[t] << '\n';
}

inline void write_csv(const std::filesystem::path& path, const CountSeries& series) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_csv(out, series);
}

}  // namespace dzip
