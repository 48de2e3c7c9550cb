#pragma once

#include "asymalloc/linalg.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace asymalloc {

// Monthly observations. Row t of excessReturns/factorLevels belongs to dates[t].
struct TimeSeriesData {
  std::vector<std::string> dates;  // YYYY-MM, strictly increasing
  Matrix excessReturns;            // T x m
  Matrix factorLevels;             // T x n

  Eigen::Index length() const noexcept { return excessReturns.rows(); }
};

inline constexpr Eigen::Index kMinObservations = 24;

/// Throws DataError on ragged or short (< 24 rows) input, non-finite values,
/// or bad dates.
void check_time_series(const TimeSeriesData& data);

/// CSV with header `date,excess_return_1..m,factor_1..n`.
TimeSeriesData parse_time_series_csv(std::string_view text);
TimeSeriesData read_time_series_csv(const std::filesystem::path& path);
std::string time_series_to_csv(const TimeSeriesData& data);

// Month label `offset` months after `start` (YYYY-MM).
std::string month_label(std::string_view start, long offset);

}  // namespace asymalloc
