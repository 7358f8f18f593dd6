// Synthesizes CD-pipeline logs with controllable push schedules, polling
// intervals, and injected detection delays. Deterministic given the seed.

#pragma once

#include "patmon/core.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace patmon {

struct PushSpec {
  std::string package;
  std::string tag;
  std::int64_t time = 0; // seconds from scenario start
};

struct DelaySpec {
  std::string tag;
  std::int64_t extra = 0; // visibility delay after the push, seconds
};

struct Scenario {
  std::uint64_t seed = 0;
  int duration_days = 1;
  std::vector<std::string> packages;
  std::vector<PushSpec> pushes;
  std::int64_t polling_interval_ms = 60'000;
  std::int64_t jitter_min_s = 0;
  std::int64_t jitter_max_s = 0;
  std::vector<DelaySpec> delays;

  std::int64_t horizon_seconds() const {
    return static_cast<std::int64_t>(duration_days) * 86'400;
  }
};

// `create` events at push times; per package, a `fetch` event at every
// polling tick carrying the latest tag visible at that tick (pushed tags
// become visible after any configured extra delay). Timestamp-sorted,
// creates before fetches at equal seconds. Throws std::invalid_argument
// on an inconsistent scenario.
TimedDataWord generate(const Scenario &s);

// Fixed presets for 5, 10 or 15 simulated days whose generated logs hit
// the benchmark entry counts (12,758 / 25,223 / 41,151 within 1%) with 12
// pushes; one tag carries a 377 s visibility delay so the 300 s bound
// reports and the 600 s bound does not.
Scenario benchmark_preset(int days);

// key=value config: seed, duration_days, packages (comma-separated),
// polling_interval_ms, jitter_min_s, jitter_max_s, and repeatable
// push=<package>,<tag>,<time_s> / delay=<tag>,<extra_s> lines.
Scenario parse_scenario(std::string_view text);

} // namespace patmon
