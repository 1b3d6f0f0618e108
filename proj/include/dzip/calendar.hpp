#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace dzip {

/// How a week label was written in the source file.
enum class WeekStyle { iso_week, iso_date };

struct WeekLabel {
  std::chrono::sys_days monday;
  WeekStyle style = WeekStyle::iso_week;
};

namespace detail {

inline std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return value;
}

/// Monday of ISO week 1: the week containing January 4th.
inline std::chrono::sys_days iso_week_one(int year) {
  using namespace std::chrono;
  const sys_days jan4 = std::chrono::year{year} / January / 4;
  const unsigned iso_dow = weekday{jan4}.iso_encoding();  // Mon=1..Sun=7
  return jan4 - days{iso_dow - 1};
}

inline int iso_weeks_in_year(int year) {
  return static_cast<int>((iso_week_one(year + 1) - iso_week_one(year)).count() / 7);
}

}  // namespace detail

/// Parses `2015-W40` (ISO week) or `2015-09-28` (the Monday of the week).
inline std::optional<WeekLabel> parse_week_label(std::string_view text) {
  using namespace std::chrono;
  while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '"' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (text.size() == 8 && text[4] == '-' && (text[5] == 'W' || text[5] == 'w')) {
    auto y = detail::parse_int(text.substr(0, 4));
    auto w = detail::parse_int(text.substr(6, 2));
    if (!y || !w || *w < 1 || *w > detail::iso_weeks_in_year(*y)) return std::nullopt;
    return WeekLabel{detail::iso_week_one(*y) + weeks{*w - 1}, WeekStyle::iso_week};
  }
  if (text.size() == 10 && text[4] == '-' && text[7] == '-') {
    auto y = detail::parse_int(text.substr(0, 4));
    auto m = detail::parse_int(text.substr(5, 2));
    auto d = detail::parse_int(text.substr(8, 2));
    if (!y || !m || !d) return std::nullopt;
    const year_month_day ymd{std::chrono::year{*y}, month{static_cast<unsigned>(*m)},
                             day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    const sys_days date{ymd};
    if (weekday{date} != Monday) return std::nullopt;
    return WeekLabel{date, WeekStyle::iso_date};
  }
  return std::nullopt;
}

inline std::string format_week_label(std::chrono::sys_days monday, WeekStyle style) {
  using namespace std::chrono;
  char buf[16];
  if (style == WeekStyle::iso_date) {
    const year_month_day ymd{monday};
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
  }
  // The ISO year is the calendar year of the week's Thursday.
  const year_month_day thursday{monday + days{3}};
  const int iso_year = static_cast<int>(thursday.year());
  const auto week = (monday - detail::iso_week_one(iso_year)).count() / 7 + 1;
  std::snprintf(buf, sizeof buf, "%04d-W%02d", iso_year, static_cast<int>(week));
  return buf;
}

}  // namespace dzip
