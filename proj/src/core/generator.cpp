// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#include "generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <unordered_set>

#include "error.hpp"

namespace pct {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double reflect(double v, double lo, double hi) {
  for (int i = 0; i < 8 && (v < lo || v > hi); ++i) v = v < lo ? 2 * lo - v : 2 * hi - v;
  return std::clamp(v, lo, hi);
}

struct Place {
  double lat, lon;
};

std::vector<Place> make_places(const GeneratorConfig& c) {
  Rng rng(splitmix(c.seed ^ 0x706c61636573ULL));
  std::vector<Place> places(std::max<std::size_t>(c.place_count, 1));
  for (auto& p : places) p = {rng.uniform(c.lat0, c.lat1), rng.uniform(c.lon0, c.lon1)};
  return places;
}

std::vector<TrajectoryPoint> make_person(const GeneratorConfig& c, const std::vector<Place>& places,
                                         std::size_t index) {
  Rng rng(splitmix(c.seed * 0x100000001b3ULL + index));
  std::vector<TrajectoryPoint> out;
  out.reserve(c.points_per_person);
  double lat = 0, lon = 0;
  if (c.model == MobilityModel::kRandomWalk) {
    const Place& home = places[rng.below(places.size())];
    lat = reflect(home.lat + c.place_spread_deg * rng.normal(), c.lat0, c.lat1);
    lon = reflect(home.lon + c.place_spread_deg * rng.normal(), c.lon0, c.lon1);
  }
  for (std::size_t i = 0; i < c.points_per_person; ++i) {
    if (c.model == MobilityModel::kUniform) {
      lat = rng.uniform(c.lat0, c.lat1);
      lon = rng.uniform(c.lon0, c.lon1);
    } else if (i > 0 && rng.uniform() < c.move_probability) {
      lat = reflect(lat + c.step_scale_deg * rng.normal(), c.lat0, c.lat1);
      lon = reflect(lon + c.step_scale_deg * rng.normal(), c.lon0, c.lon1);
    }
    const auto jitter = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(c.interval_seconds)));
    out.push_back({c.start_time + static_cast<std::int64_t>(i) * c.interval_seconds + jitter, lat, lon});
  }
  return out;
}

}  // namespace

MobilityModel parse_mobility_model(std::string_view name) {
  if (name == "walk" || name == "random_walk") return MobilityModel::kRandomWalk;
  if (name == "uniform") return MobilityModel::kUniform;
  fail(ErrorCode::kConfig, "unknown mobility model '" + std::string(name) + "'");
}

void GeneratorConfig::validate() const {
  if (!(lat0 < lat1) || !(lon0 < lon1)) fail(ErrorCode::kConfig, "degenerate bounding box");
  if (lat0 < -90 || lat1 > 90 || lon0 < -180 || lon1 > 180) fail(ErrorCode::kConfig, "bounding box out of range");
  if (interval_seconds <= 0) fail(ErrorCode::kConfig, "interval_seconds must be positive");
  if (step_scale_deg < 0 || place_spread_deg < 0) fail(ErrorCode::kConfig, "negative walk scale");
  if (move_probability < 0 || move_probability > 1) fail(ErrorCode::kConfig, "move_probability outside [0, 1]");
  if (start_time < 0) fail(ErrorCode::kConfig, "negative start_time");
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::vector<TrajectoryPoint>> generate_people(const GeneratorConfig& config) {
  config.validate();
  const auto places = make_places(config);
  std::vector<std::vector<TrajectoryPoint>> people;
  people.reserve(config.num_people);
  for (std::size_t i = 0; i < config.num_people; ++i) people.push_back(make_person(config, places, i));
  return people;
}

Theta theta_for(const GeneratorConfig& config, int geo_digits, int time_width) {
  Theta th;
  th.geo_digits = geo_digits;
  th.time_width = time_width;
  th.period_start = config.start_time;
  th.segment_seconds = config.interval_seconds;
  th.period_end = config.start_time + static_cast<std::int64_t>(config.points_per_person) * config.interval_seconds;
  return th;
}

std::vector<std::string> generate_unique_keys(GeneratorConfig config, const Theta& theta, std::size_t count) {
  config.validate();
  theta.validate();
  const auto places = make_places(config);
  const std::size_t len = theta.key_length();
  std::vector<char> arena(count * len);
  std::unordered_set<std::string_view> seen;
  seen.reserve(count);
  std::size_t person = 0;
  std::size_t stalled = 0;
  while (seen.size() < count) {
    const std::size_t before = seen.size();
    for (const auto& p : make_person(config, places, person++)) {
      if (p.t < theta.period_start || p.t >= theta.period_end) continue;
      const std::string key = encode_point(p, theta);
      char* slot = arena.data() + seen.size() * len;
      std::copy(key.begin(), key.end(), slot);
      seen.emplace(slot, len);
      if (seen.size() == count) break;
    }
    stalled = seen.size() == before ? stalled + 1 : 0;
    if (stalled > 1000) fail(ErrorCode::kConfig, "generator cannot produce enough distinct keys");
  }
  seen.clear();
  std::vector<std::string> keys;
  keys.reserve(count);
  for (std::size_t i = 0; i < count; ++i) keys.emplace_back(arena.data() + i * len, len);
  std::sort(keys.begin(), keys.end());
  return keys;
}

void write_generated(const std::string& dir, const std::vector<std::vector<TrajectoryPoint>>& people) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIo, "cannot create " + dir + ": " + ec.message());
  std::ofstream corpus(dir + "/corpus.csv");
  if (!corpus) fail(ErrorCode::kIo, "cannot write " + dir + "/corpus.csv");
  char name[64];
  for (std::size_t i = 0; i < people.size(); ++i) {
    std::snprintf(name, sizeof name, "/person_%06zu.csv", i);
    std::ofstream out(dir + name);
    if (!out) fail(ErrorCode::kIo, std::string("cannot write ") + dir + name);
    write_trajectory(out, people[i]);
    write_trajectory(corpus, people[i]);
  }
  if (!corpus) fail(ErrorCode::kIo, "write failed on corpus.csv");
}

}  // namespace pct
