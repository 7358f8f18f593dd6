#include "patmon/generator.hpp"

#include <algorithm>
#include <charconv>
#include <random>
#include <sstream>

namespace patmon {

namespace {

// Tag fetched before any push becomes visible.
constexpr const char *kBaselineTag = "stg-initial-0";

std::int64_t delay_for(const Scenario &s, const std::string &tag) {
  for (const auto &d : s.delays)
    if (d.tag == tag)
      return d.extra;
  return 0;
}

void validate(const Scenario &s) {
  if (s.duration_days <= 0)
    throw std::invalid_argument("scenario duration must be positive");
  if (s.polling_interval_ms <= 0)
    throw std::invalid_argument("polling interval must be positive");
  if (s.jitter_min_s < 0 || s.jitter_max_s < s.jitter_min_s)
    throw std::invalid_argument("jitter bounds must satisfy 0 <= min <= max");
  if (s.packages.empty())
    throw std::invalid_argument("scenario needs at least one package");
  for (const auto &p : s.pushes) {
    if (p.time < 0 || p.time > s.horizon_seconds())
      throw std::invalid_argument("push time for tag '" + p.tag +
                                  "' is outside the scenario duration");
    if (std::find(s.packages.begin(), s.packages.end(), p.package) ==
        s.packages.end())
      throw std::invalid_argument("push references unknown package '" +
                                  p.package + "'");
  }
  for (const auto &d : s.delays) {
    if (d.extra < 0)
      throw std::invalid_argument("visibility delay must be non-negative");
  }
}

} // namespace

TimedDataWord generate(const Scenario &s) {
  validate(s);
  const std::int64_t horizon = s.horizon_seconds();

  struct Line {
    Event event;
    int kind; // creates before fetches at equal seconds
  };
  std::vector<Line> lines;
  ValuePool pool;

  for (const auto &p : s.pushes) {
    lines.push_back({Event{"create",
                           {pool.text(p.package), pool.text(p.tag)},
                           p.time},
                     0});
  }

  std::mt19937_64 rng(s.seed);
  auto jitter = [&]() -> std::int64_t {
    if (s.jitter_max_s == s.jitter_min_s)
      return s.jitter_min_s;
    std::uint64_t span =
        static_cast<std::uint64_t>(s.jitter_max_s - s.jitter_min_s) + 1;
    return s.jitter_min_s + static_cast<std::int64_t>(rng() % span);
  };

  for (const auto &pkg : s.packages) {
    // pushes to this package, by push time (stable for equal times)
    std::vector<const PushSpec *> pushes;
    for (const auto &p : s.pushes)
      if (p.package == pkg)
        pushes.push_back(&p);
    std::stable_sort(pushes.begin(), pushes.end(),
                     [](const PushSpec *a, const PushSpec *b) {
                       return a->time < b->time;
                     });

    for (std::int64_t k = 1;; ++k) {
      std::int64_t tick_ms = k * s.polling_interval_ms;
      if (tick_ms > horizon * 1000)
        break;
      std::int64_t t = tick_ms / 1000 + jitter();
      if (t > horizon)
        continue;

      // latest tag visible at t; pushed tags appear after their delay
      const PushSpec *visible = nullptr;
      for (const PushSpec *p : pushes) {
        if (p->time + delay_for(s, p->tag) <= t)
          visible = p;
      }
      lines.push_back(
          {Event{"fetch",
                 {pool.text(pkg),
                  pool.text(visible ? visible->tag : kBaselineTag)},
                 t},
           1});
    }
  }

  std::stable_sort(lines.begin(), lines.end(),
                   [](const Line &a, const Line &b) {
                     if (a.event.timestamp != b.event.timestamp)
                       return a.event.timestamp < b.event.timestamp;
                     return a.kind < b.kind;
                   });

  TimedDataWord word;
  for (auto &l : lines)
    word.append(std::move(l.event));
  return word;
}

namespace {

std::string synth_tag(int index) {
  // deterministic 40-hex-digit tag body
  std::string hex;
  hex.reserve(40);
  std::uint64_t x = 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(
                                                index + 1);
  for (int i = 0; i < 40; ++i) {
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    hex += "0123456789abcdef"[(x * 0x2545f4914f6cdd1dULL >> 60) & 0xf];
  }
  return "stg-" + hex + "-" + std::to_string(1440 + index);
}

} // namespace

Scenario benchmark_preset(int days) {
  std::int64_t target = 0;
  switch (days) {
  case 5:
    target = 12758;
    break;
  case 10:
    target = 25223;
    break;
  case 15:
    target = 41151;
    break;
  default:
    throw std::invalid_argument("benchmark_preset presets cover 5, 10 or 15 days");
  }

  Scenario s;
  s.seed = 7;
  s.duration_days = days;
  s.packages = {"auth-frontend", "auth-backend", "auth-example"};

  constexpr int kPushes = 12;
  // All but the pushes are polling fetches; solve the per-package
  // interval (in ms, for sub-second resolution) from the target count.
  std::int64_t horizon_ms = s.horizon_seconds() * 1000;
  std::int64_t fetch_target = target - kPushes;
  s.polling_interval_ms =
      (horizon_ms * static_cast<std::int64_t>(s.packages.size()) +
       fetch_target / 2) /
      fetch_target;
  s.jitter_min_s = 0;
  s.jitter_max_s = 20;

  for (int i = 0; i < kPushes; ++i) {
    PushSpec p;
    p.package = s.packages[static_cast<std::size_t>(i) % s.packages.size()];
    p.tag = synth_tag(i);
    p.time = (static_cast<std::int64_t>(i) + 1) * s.horizon_seconds() /
             (kPushes + 1);
    s.pushes.push_back(std::move(p));
  }
  // One late-visible tag: polling first resolves it 377 s after the
  // push, inside a 600 s budget but past a 300 s one.
  s.delays.push_back({s.pushes[5].tag, 377});
  return s;
}

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;

  auto parse_int = [&](const std::string &value,
                       const char *key) -> std::int64_t {
    std::int64_t v = 0;
    auto [ptr, ec] =
        std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size())
      throw std::invalid_argument("line " + std::to_string(lineno) + ": '" +
                                  value + "' is not an integer for " + key);
    return v;
  };
  auto split = [](const std::string &value) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
      std::size_t comma = value.find(',', start);
      parts.push_back(value.substr(start, comma - start));
      if (comma == std::string::npos)
        return parts;
      start = comma + 1;
    }
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::size_t begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos || line[begin] == '#')
      continue;
    std::size_t end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(lineno) +
                                  ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);

    if (key == "seed") {
      s.seed = static_cast<std::uint64_t>(parse_int(value, "seed"));
    } else if (key == "duration_days") {
      s.duration_days = static_cast<int>(parse_int(value, "duration_days"));
    } else if (key == "packages") {
      s.packages = split(value);
    } else if (key == "polling_interval_ms") {
      s.polling_interval_ms = parse_int(value, "polling_interval_ms");
    } else if (key == "jitter_min_s") {
      s.jitter_min_s = parse_int(value, "jitter_min_s");
    } else if (key == "jitter_max_s") {
      s.jitter_max_s = parse_int(value, "jitter_max_s");
    } else if (key == "push") {
      auto parts = split(value);
      if (parts.size() != 3)
        throw std::invalid_argument("line " + std::to_string(lineno) +
                                    ": push=<package>,<tag>,<time_s>");
      s.pushes.push_back(
          {parts[0], parts[1], parse_int(parts[2], "push time")});
    } else if (key == "delay") {
      auto parts = split(value);
      if (parts.size() != 2)
        throw std::invalid_argument("line " + std::to_string(lineno) +
                                    ": delay=<tag>,<extra_s>");
      s.delays.push_back({parts[0], parse_int(parts[1], "delay")});
    } else {
      throw std::invalid_argument("line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
    }
  }
  return s;
}

} // namespace patmon
