// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace pct {

inline constexpr std::string_view kGeohashAlphabet = "0123456789bcdefghjkmnpqrstuvwxyz";
inline constexpr int kMaxGeoDigits = 12;

struct TrajectoryPoint {
  std::int64_t t = 0;  // UNIX epoch seconds
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

// Contact granularity: spatial (Geohash digits) and temporal (segment length)
// plus the retention period the segment labels are counted from.
struct Theta {
  int geo_digits = 10;
  std::int64_t period_start = 0;
  std::int64_t period_end = 0;
  std::int64_t segment_seconds = 600;
  int time_width = 4;

  std::int64_t segment_count() const;
  std::size_t key_length() const { return static_cast<std::size_t>(geo_digits + time_width); }

  // Throws kConfig when any invariant is violated.
  void validate() const;

  friend bool operator==(const Theta&, const Theta&) = default;
};

void validate_point(const TrajectoryPoint& p);

std::string geohash_encode(double lat, double lon, int digits);

std::string periodical_encode(std::int64_t t, const Theta& theta);

// Segment index of t; throws kOutOfPeriod outside [period_start, period_end).
std::int64_t segment_index(std::int64_t t, const Theta& theta);

std::string encode_point(const TrajectoryPoint& p, const Theta& theta);

bool key_well_formed(std::string_view key, const Theta& theta);

struct EncodeStats {
  std::size_t encoded = 0;
  std::size_t dropped_out_of_period = 0;
};

// Encodes every in-period point; out-of-period records are counted and skipped.
std::vector<std::string> encode_trajectory(const std::vector<TrajectoryPoint>& points,
                                           const Theta& theta, EncodeStats* stats = nullptr);

std::vector<TrajectoryPoint> parse_trajectory(std::istream& in);
std::vector<TrajectoryPoint> parse_trajectory_file(const std::string& path);
std::vector<TrajectoryPoint> parse_trajectory_text(std::string_view text);

void write_trajectory(std::ostream& out, const std::vector<TrajectoryPoint>& points);

}  // namespace pct
