#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dzip/calendar.hpp"
#include "dzip/error.hpp"
#include "dzip/math.hpp"

namespace dzip {

using Count = std::int64_t;

/// Weekly count series. Labels are kept verbatim from the source; the
/// constructor checks that they are consecutive weeks.
class CountSeries {
 public:
  CountSeries(std::vector<std::string> labels, std::vector<Count> counts)
      : labels_(std::move(labels)), counts_(std::move(counts)) {
    if (counts_.size() < 2) throw DataError("count series needs at least 2 observations");
    if (labels_.size() != counts_.size()) throw DataError("label and count lengths differ");
    for (std::size_t t = 0; t < counts_.size(); ++t) {
      if (counts_[t] < 0) {
        throw DataError("negative count at position " + std::to_string(t));
      }
    }
    std::optional<WeekLabel> prev;
    for (std::size_t t = 0; t < labels_.size(); ++t) {
      auto week = parse_week_label(labels_[t]);
      if (!week) throw DataError("unparseable week label '" + labels_[t] + "'");
      if (prev && week->monday - prev->monday != std::chrono::days{7}) {
        throw DataError("labels are not consecutive weeks at '" + labels_[t] + "'");
      }
      prev = week;
    }
  }

  /// Consecutive weekly labels starting at `first_monday`.
  static CountSeries weekly(std::vector<Count> counts,
                            std::chrono::sys_days first_monday = default_start(),
                            WeekStyle style = WeekStyle::iso_week) {
    std::vector<std::string> labels;
    labels.reserve(counts.size());
    for (std::size_t t = 0; t < counts.size(); ++t) {
      labels.push_back(format_week_label(first_monday + std::chrono::weeks{t}, style));
    }
    return CountSeries(std::move(labels), std::move(counts));
  }

  /// 2015-W40, the first week of the Mediterranean series.
  static std::chrono::sys_days default_start() { return parse_week_label("2015-W40")->monday; }

  std::size_t size() const noexcept { return counts_.size(); }
  std::span<const Count> counts() const noexcept { return counts_; }
  std::span<const std::string> labels() const noexcept { return labels_; }
  Count operator[](std::size_t t) const { return counts_[t]; }

  CountSeries slice(std::size_t first, std::size_t length) const {
    return CountSeries({labels_.begin() + first, labels_.begin() + first + length},
                       {counts_.begin() + first, counts_.begin() + first + length});
  }

 private:
  std::vector<std::string> labels_;
  std::vector<Count> counts_;
};

struct ZipParams {
  double z = 0.0;
  double pi = 1.0;
};

/// log P(y | Poisson(exp(z))) = y z - exp(z) - log y!.
inline double poisson_log_pmf(Count y, double z) {
  if (!std::isfinite(z)) throw NumericalError("invalid log-intensity");
  if (y < 0) return neg_inf;
  if (y == 0) return -std::exp(z);
  return static_cast<double>(y) * z - std::exp(z) - log_gamma(static_cast<double>(y) + 1.0);
}

/// Zero-inflated Poisson log pmf; pi is the probability of the sampling path.
inline double zip_log_pmf(Count y, double z, double pi) {
  if (!(pi >= 0.0 && pi <= 1.0)) throw DataError("zero-inflation probability outside [0,1]");
  if (y > 0) {
    if (pi == 0.0) return neg_inf;
    return std::log(pi) + poisson_log_pmf(y, z);
  }
  const double structural = pi == 1.0 ? neg_inf : std::log1p(-pi);
  const double sampling = pi == 0.0 ? neg_inf : std::log(pi) + poisson_log_pmf(0, z);
  return log_add_exp(structural, sampling);
}

inline double zip_log_pmf(Count y, const ZipParams& p) { return zip_log_pmf(y, p.z, p.pi); }

}  // namespace dzip
