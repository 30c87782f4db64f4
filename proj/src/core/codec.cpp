// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "codec.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace pct {

std::int64_t Theta::segment_count() const {
  if (segment_seconds <= 0 || period_end <= period_start) return 0;
  return (period_end - period_start + segment_seconds - 1) / segment_seconds;
}

void Theta::validate() const {
  if (geo_digits < 1 || geo_digits > kMaxGeoDigits) {
    fail(ErrorCode::kConfig, "theta.geo_digits must be in [1, 12], got " + std::to_string(geo_digits));
  }
  if (period_end <= period_start) fail(ErrorCode::kConfig, "theta.period_end must exceed theta.period_start");
  if (segment_seconds <= 0) fail(ErrorCode::kConfig, "theta.segment_seconds must be positive");
  if (time_width < 1 || time_width > 18) fail(ErrorCode::kConfig, "theta.time_width must be in [1, 18]");
  std::int64_t capacity = 1;
  for (int i = 0; i < time_width; ++i) capacity *= 10;
  if (segment_count() > capacity) {
    fail(ErrorCode::kConfig, "theta: " + std::to_string(segment_count()) + " segments do not fit in " +
                                 std::to_string(time_width) + " digits");
  }
}

void validate_point(const TrajectoryPoint& p) {
  if (!(p.lat >= -90.0 && p.lat <= 90.0)) fail(ErrorCode::kInvalidInput, "latitude out of range");
  if (!(p.lon >= -180.0 && p.lon <= 180.0)) fail(ErrorCode::kInvalidInput, "longitude out of range");
  if (p.t < 0) fail(ErrorCode::kInvalidInput, "negative timestamp");
}

std::string geohash_encode(double lat, double lon, int digits) {
  if (digits < 1 || digits > kMaxGeoDigits) {
    fail(ErrorCode::kInvalidInput, "geohash digits must be in [1, 12], got " + std::to_string(digits));
  }
  if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) {
    fail(ErrorCode::kInvalidInput, "coordinate out of range");
  }
  double lat_lo = -90.0, lat_hi = 90.0;
  double lon_lo = -180.0, lon_hi = 180.0;
  std::string out(static_cast<std::size_t>(digits), '0');
  bool lon_bit = true;
  for (int c = 0; c < digits; ++c) {
    unsigned index = 0;
    for (int b = 0; b < 5; ++b) {
      index <<= 1;
      if (lon_bit) {
        const double mid = lon_lo + (lon_hi - lon_lo) / 2;
        if (lon >= mid) {
          index |= 1;
          lon_lo = mid;
        } else {
          lon_hi = mid;
        }
      } else {
        const double mid = lat_lo + (lat_hi - lat_lo) / 2;
        if (lat >= mid) {
          index |= 1;
          lat_lo = mid;
        } else {
          lat_hi = mid;
        }
      }
      lon_bit = !lon_bit;
    }
    out[static_cast<std::size_t>(c)] = kGeohashAlphabet[index];
  }
  return out;
}

std::int64_t segment_index(std::int64_t t, const Theta& theta) {
  if (t < theta.period_start || t >= theta.period_end) {
    fail(ErrorCode::kOutOfPeriod, "timestamp " + std::to_string(t) + " outside period [" +
                                      std::to_string(theta.period_start) + ", " +
                                      std::to_string(theta.period_end) + ")");
  }
  return (t - theta.period_start) / theta.segment_seconds;
}

std::string periodical_encode(std::int64_t t, const Theta& theta) {
  std::int64_t segment = segment_index(t, theta);
  std::string out(static_cast<std::size_t>(theta.time_width), '0');
  for (auto it = out.rbegin(); it != out.rend() && segment > 0; ++it) {
    *it = static_cast<char>('0' + segment % 10);
    segment /= 10;
  }
  if (segment > 0) fail(ErrorCode::kConfig, "segment label does not fit theta.time_width");
  return out;
}

std::string encode_point(const TrajectoryPoint& p, const Theta& theta) {
  validate_point(p);
  std::string key = geohash_encode(p.lat, p.lon, theta.geo_digits);
  key += periodical_encode(p.t, theta);
  return key;
}

bool key_well_formed(std::string_view key, const Theta& theta) {
  if (key.size() != theta.key_length()) return false;
  const auto geo = static_cast<std::size_t>(theta.geo_digits);
  for (std::size_t i = 0; i < key.size(); ++i) {
    const char c = key[i];
    if (i < geo) {
      if (kGeohashAlphabet.find(c) == std::string_view::npos) return false;
    } else if (c < '0' || c > '9') {
      return false;
    }
  }
  return true;
}

std::vector<std::string> encode_trajectory(const std::vector<TrajectoryPoint>& points,
                                           const Theta& theta, EncodeStats* stats) {
  std::vector<std::string> keys;
  keys.reserve(points.size());
  EncodeStats local;
  for (const auto& p : points) {
    if (p.t < theta.period_start || p.t >= theta.period_end) {
      ++local.dropped_out_of_period;
      continue;
    }
    keys.push_back(encode_point(p, theta));
    ++local.encoded;
  }
  if (stats) *stats = local;
  return keys;
}

namespace {

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

template <typename T>
T parse_field(std::string_view field, std::size_t line_no, const char* name) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || field.empty()) {
    throw ParseError(line_no, std::string("malformed ") + name + " '" + std::string(field) + "'");
  }
  return value;
}

TrajectoryPoint parse_line(std::string_view line, std::size_t line_no) {
  const auto c1 = line.find(',');
  const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
  if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
    throw ParseError(line_no, "expected 3 comma-separated fields");
  }
  TrajectoryPoint p;
  p.t = parse_field<std::int64_t>(line.substr(0, c1), line_no, "epoch_seconds");
  p.lat = parse_field<double>(line.substr(c1 + 1, c2 - c1 - 1), line_no, "latitude");
  p.lon = parse_field<double>(line.substr(c2 + 1), line_no, "longitude");
  try {
    validate_point(p);
  } catch (const Error& e) {
    fail(ErrorCode::kInvalidInput, "line " + std::to_string(line_no) + ": " + e.what());
  }
  return p;
}

}  // namespace

std::vector<TrajectoryPoint> parse_trajectory(std::istream& in) {
  std::vector<TrajectoryPoint> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim_cr(line);
    if (view.empty()) continue;
    points.push_back(parse_line(view, line_no));
  }
  return points;
}

std::vector<TrajectoryPoint> parse_trajectory_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trajectory(in);
}

std::vector<TrajectoryPoint> parse_trajectory_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open trajectory file " + path);
  return parse_trajectory(in);
}

void write_trajectory(std::ostream& out, const std::vector<TrajectoryPoint>& points) {
  char buf[96];
  for (const auto& p : points) {
    auto* end = std::to_chars(buf, buf + sizeof buf, p.t).ptr;
    *end++ = ',';
    end = std::to_chars(end, buf + sizeof buf, p.lat).ptr;
    *end++ = ',';
    end = std::to_chars(end, buf + sizeof buf, p.lon).ptr;
    *end++ = '\n';
    out.write(buf, end - buf);
  }
}

}  // namespace pct
