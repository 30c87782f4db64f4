// Copyright 2026 The PCT Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "codec.hpp"

namespace pct {

enum class MobilityModel { kRandomWalk, kUniform };

MobilityModel parse_mobility_model(std::string_view name);

// Synthetic people-flow generator. RANDOM_WALK people alternate between
// dwelling and moving, starting near one of a fixed pool of shared places, so
// nearby people and consecutive samples share cells. UNIFORM draws every point
// independently inside the bounding box.
struct GeneratorConfig {
  std::size_t num_people = 1;
  std::size_t points_per_person = 1440;
  double lat0 = 34.60, lon0 = 135.40, lat1 = 34.80, lon1 = 135.60;
  MobilityModel model = MobilityModel::kRandomWalk;
  double step_scale_deg = 0.0005;     // std-dev of one move, per axis
  double move_probability = 0.2;      // per sample, chance the person moves
  std::size_t place_count = 2000;     // shared start locations
  double place_spread_deg = 0.0002;   // jitter around a shared place
  std::int64_t start_time = 1600000000;
  std::int64_t interval_seconds = 840;
  std::uint64_t seed = 1;

  void validate() const;
};

// Small deterministic random source: mt19937_64 output mapped with explicit
// formulas, so sequences do not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// One trajectory per person, temporally ordered.
std::vector<std::vector<TrajectoryPoint>> generate_people(const GeneratorConfig& config);

// Generates people until exactly `count` distinct keys under `theta` exist and
// returns them sorted. The last person contributes only the keys needed.
std::vector<std::string> generate_unique_keys(GeneratorConfig config, const Theta& theta, std::size_t count);

// Theta matching the generator's time span: one segment per sample interval.
Theta theta_for(const GeneratorConfig& config, int geo_digits = 10, int time_width = 4);

// Writes one CSV per person plus the concatenated corpus.csv into `dir`.
void write_generated(const std::string& dir, const std::vector<std::vector<TrajectoryPoint>>& people);

}  // namespace pct
