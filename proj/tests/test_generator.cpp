#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "patmon/generator.hpp"
#include "patmon/ingest.hpp"
#include "patmon/oracle.hpp"
#include "testutil.hpp"

#include <random>
#include <sstream>

using namespace patmon;

namespace {

std::string render(const TimedDataWord &w) {
  std::ostringstream out;
  for (const auto &e : w.events())
    out << format_event(e) << '\n';
  return out.str();
}

Scenario one_package() {
  Scenario s;
  s.seed = 3;
  s.duration_days = 1;
  s.packages = {"app"};
  s.polling_interval_ms = 60'000;
  return s;
}

} // namespace

TEST_CASE("a push is fetched at the next polling tick") {
  Scenario s = one_package();
  s.pushes = {{"app", "tag-new", 0}};
  TimedDataWord w = generate(s);

  // first fetch of the fresh tag happens at the first tick
  std::int64_t first = -1;
  for (const auto &e : w.events()) {
    if (e.label == "fetch" && e.fields[1].as_text() == "tag-new") {
      first = e.timestamp;
      break;
    }
  }
  CHECK(first == 60);
  CHECK(latency_check(w, 300).empty());
}

TEST_CASE("a visibility delay produces the five-vs-ten-minute split") {
  Scenario s = one_package();
  s.pushes = {{"app", "tag-new", 0}};
  s.delays = {{"tag-new", 350}};
  TimedDataWord w = generate(s);

  std::int64_t first = -1;
  for (const auto &e : w.events()) {
    if (e.label == "fetch" && e.fields[1].as_text() == "tag-new") {
      first = e.timestamp;
      break;
    }
  }
  CHECK(first == 360);
  CHECK_FALSE(latency_check(w, 300).empty());
  CHECK(latency_check(w, 600).empty());
}

TEST_CASE("an empty push schedule yields a fetch-only log") {
  Scenario s = one_package();
  TimedDataWord w = generate(s);
  CHECK_FALSE(w.empty());
  for (const auto &e : w.events())
    CHECK(e.label == "fetch");
  CHECK(latency_check(w, 300).empty());
}

TEST_CASE("generation is deterministic under a fixed seed") {
  Scenario s = benchmark_preset(5);
  CHECK(render(generate(s)) == render(generate(s)));
  s.seed = 8;
  Scenario s2 = benchmark_preset(5);
  s2.seed = 9;
  CHECK(render(generate(s)) != render(generate(s2)));
}

TEST_CASE("generated words are timestamp-monotone") {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 50; ++i) {
    Scenario s;
    s.seed = rng();
    s.duration_days = 1;
    s.packages = {"a", "b"};
    s.polling_interval_ms = 1000 + static_cast<std::int64_t>(rng() % 120000);
    s.jitter_max_s = static_cast<std::int64_t>(rng() % 30);
    s.pushes = {{"a", "t1", static_cast<std::int64_t>(rng() % 86400)},
                {"b", "t2", static_cast<std::int64_t>(rng() % 86400)}};
    TimedDataWord w = generate(s); // append() enforces monotonicity
    CHECK(w.size() >= s.pushes.size());
  }
}

TEST_CASE("delay-free scenarios under slow bounds never report") {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 30; ++i) {
    Scenario s;
    s.seed = rng();
    s.duration_days = 1;
    s.packages = {"a"};
    // polling interval plus worst jitter stays within the bound, and
    // pushes are spaced so no tag is superseded before its first fetch
    s.polling_interval_ms =
        1000 * (30 + static_cast<std::int64_t>(rng() % 240));
    s.jitter_max_s = 10;
    std::int64_t gap = s.polling_interval_ms / 1000 + 20;
    s.pushes = {{"a", "t1", 1000}, {"a", "t2", 1000 + 3 * gap}};
    TimedDataWord w = generate(s);
    CHECK(latency_check(w, s.polling_interval_ms / 1000 + 11).empty());
  }
}

TEST_CASE("benchmark presets hit the recorded entry counts within 1%") {
  struct Row {
    int days;
    std::size_t target;
  };
  for (Row row : {Row{5, 12758}, Row{10, 25223}, Row{15, 41151}}) {
    Scenario s = benchmark_preset(row.days);
    TimedDataWord w = generate(s);
    double lo = static_cast<double>(row.target) * 0.99;
    double hi = static_cast<double>(row.target) * 1.01;
    CAPTURE(row.days);
    CHECK(static_cast<double>(w.size()) >= lo);
    CHECK(static_cast<double>(w.size()) <= hi);

    std::size_t creates = 0;
    for (const auto &e : w.events())
      creates += e.label == "create";
    CHECK(creates == 12);
  }
}

TEST_CASE("the 5-day preset reports under 300 s but not under 600 s") {
  TimedDataWord w = generate(benchmark_preset(5));
  CHECK_FALSE(latency_check(w, 300).empty());
  CHECK(latency_check(w, 600).empty());
}

TEST_CASE("scenario config files round-trip the fields") {
  Scenario s = parse_scenario("# demo scenario\n"
                              "seed=42\n"
                              "duration_days=2\n"
                              "packages=front,back\n"
                              "polling_interval_ms=90000\n"
                              "jitter_min_s=1\n"
                              "jitter_max_s=5\n"
                              "push=front,tag-1,3600\n"
                              "push=back,tag-2,7200\n"
                              "delay=tag-2,400\n");
  CHECK(s.seed == 42);
  CHECK(s.duration_days == 2);
  CHECK(s.packages == std::vector<std::string>{"front", "back"});
  CHECK(s.polling_interval_ms == 90000);
  CHECK(s.jitter_min_s == 1);
  CHECK(s.jitter_max_s == 5);
  REQUIRE(s.pushes.size() == 2);
  CHECK(s.pushes[1].tag == "tag-2");
  CHECK(s.pushes[1].time == 7200);
  REQUIRE(s.delays.size() == 1);
  CHECK(s.delays[0].extra == 400);

  CHECK_NOTHROW((void)generate(s));
}

TEST_CASE("invalid scenarios are rejected") {
  CHECK_THROWS_AS((void)parse_scenario("nonsense\n"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_scenario("mystery=1\n"), std::invalid_argument);

  Scenario s = one_package();
  s.polling_interval_ms = 0;
  CHECK_THROWS_AS((void)generate(s), std::invalid_argument);

  Scenario late = one_package();
  late.pushes = {{"app", "t", 999'999'999}};
  CHECK_THROWS_AS((void)generate(late), std::invalid_argument);

  Scenario foreign = one_package();
  foreign.pushes = {{"ghost", "t", 10}};
  CHECK_THROWS_AS((void)generate(foreign), std::invalid_argument);

  CHECK_THROWS_AS((void)benchmark_preset(7), std::invalid_argument);
}
