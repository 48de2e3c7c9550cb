#include "asymalloc/timeseries.hpp"

#include "asymalloc/errors.hpp"
#include "asymalloc/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace asymalloc {

namespace {

// YYYY-MM; years past 9999 take more digits so long synthetic series stay valid.
bool parse_month(std::string_view s, int& year, int& month) {
  if (s.size() < 7 || s[s.size() - 3] != '-') return false;
  const char* dash = s.data() + s.size() - 3;
  auto r1 = std::from_chars(s.data(), dash, year);
  auto r2 = std::from_chars(dash + 1, s.data() + s.size(), month);
  return r1.ec == std::errc{} && r1.ptr == dash && r2.ec == std::errc{} &&
         r2.ptr == s.data() + s.size() && year >= 0 && month >= 1 && month <= 12;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

}  // namespace

std::string month_label(std::string_view start, long offset) {
  int year = 0, month = 0;
  if (!parse_month(start, year, month)) throw DataError("bad month label '" + std::string(start) + "'");
  const long idx = year * 12L + (month - 1) + offset;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04ld-%02ld", idx / 12, idx % 12 + 1);
  return buf;
}

void check_time_series(const TimeSeriesData& d) {
  const auto T = d.excessReturns.rows();
  if (d.factorLevels.rows() != T || static_cast<Eigen::Index>(d.dates.size()) != T) {
    throw DataError("dates, returns and factors have different lengths");
  }
  if (T < kMinObservations) {
    throw DataError("need at least " + std::to_string(kMinObservations) + " observations, got " +
                    std::to_string(T));
  }
  if (d.excessReturns.cols() < 1) throw DataError("no excess return columns");
  if (d.factorLevels.cols() < 1) throw DataError("no factor columns");
  if (!d.excessReturns.allFinite() || !d.factorLevels.allFinite()) {
    throw DataError("time series contains missing or non-finite values");
  }
  int prev = -1;
  for (std::size_t t = 0; t < d.dates.size(); ++t) {
    int y = 0, mo = 0;
    if (!parse_month(d.dates[t], y, mo)) {
      throw DataError("row " + std::to_string(t + 1) + ": date '" + d.dates[t] + "' is not YYYY-MM");
    }
    const int idx = y * 12 + mo;
    if (idx <= prev) throw DataError("row " + std::to_string(t + 1) + ": dates are not increasing");
    prev = idx;
  }
}

TimeSeriesData parse_time_series_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto line : split(text, '\n')) {
    line = trim(line);
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw DataError("CSV is empty");
  const auto header = split(lines[0], ',');
  if (header.empty() || trim(header[0]) != "date") throw DataError("missing column 'date'");

  int m = 0, n = 0;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto name = trim(header[c]);
    if (name == "excess_return_" + std::to_string(m + 1) && n == 0) {
      ++m;
    } else if (name == "factor_" + std::to_string(n + 1)) {
      ++n;
    } else {
      const std::string expected = n == 0 ? "excess_return_" + std::to_string(m + 1) + "' or 'factor_1"
                                          : "factor_" + std::to_string(n + 1);
      throw DataError("unexpected column '" + std::string(name) + "' (expected '" + expected + "')");
    }
  }
  if (m == 0) throw DataError("missing column 'excess_return_1'");
  if (n == 0) throw DataError("missing column 'factor_1'");

  TimeSeriesData d;
  const auto T = static_cast<Eigen::Index>(lines.size() - 1);
  d.excessReturns.resize(T, m);
  d.factorLevels.resize(T, n);
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto cells = split(lines[static_cast<std::size_t>(t + 1)], ',');
    const std::string row = "row " + std::to_string(t + 2);
    if (cells.size() != header.size()) {
      throw DataError(row + ": expected " + std::to_string(header.size()) + " fields, got " +
                      std::to_string(cells.size()));
    }
    d.dates.emplace_back(trim(cells[0]));
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const auto cell = trim(cells[c]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw DataError(row + ", column '" + std::string(trim(header[c])) + "': '" + std::string(cell) +
                        "' is not a number");
      }
      const auto col = static_cast<Eigen::Index>(c - 1);
      if (col < m) {
        d.excessReturns(t, col) = v;
      } else {
        d.factorLevels(t, col - m) = v;
      }
    }
  }
  check_time_series(d);
  return d;
}

TimeSeriesData read_time_series_csv(const std::filesystem::path& path) {
  return parse_time_series_csv(io::read_text(path));
}

std::string time_series_to_csv(const TimeSeriesData& d) {
  std::ostringstream out;
  out << "date";
  for (Eigen::Index i = 0; i < d.excessReturns.cols(); ++i) out << ",excess_return_" << i + 1;
  for (Eigen::Index j = 0; j < d.factorLevels.cols(); ++j) out << ",factor_" << j + 1;
  out << '\n';
  for (Eigen::Index t = 0; t < d.length(); ++t) {
    out << d.dates[static_cast<std::size_t>(t)];
    for (Eigen::Index i = 0; i < d.excessReturns.cols(); ++i) out << ',' << io::format_double(d.excessReturns(t, i));
    for (Eigen::Index j = 0; j < d.factorLevels.cols(); ++j) out << ',' << io::format_double(d.factorLevels(t, j));
    out << '\n';
  }
  return out.str();
}

}  // namespace asymalloc
