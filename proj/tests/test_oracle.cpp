#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "patmon/oracle.hpp"
#include "testutil.hpp"

#include <random>

using namespace patmon;

namespace {

DataValue txt(const char *s) { return DataValue::text(s); }

Event ev(const char *label, const char *name, const char *tag,
         std::int64_t ts) {
  return Event{label, {txt(name), txt(tag)}, ts};
}

TimedDataWord word_of(std::initializer_list<Event> events) {
  TimedDataWord w;
  for (const auto &e : events)
    w.append(e);
  return w;
}

ExprPtr resolved(const std::string &src) {
  SpecAst ast = parse_spec(src);
  return resolve(ast);
}

std::set<std::pair<std::size_t, std::string>>
report_keys(const std::vector<MatchReport> &reports) {
  std::set<std::pair<std::size_t, std::string>> out;
  for (const auto &r : reports)
    out.insert({r.time_point,
                ParamConstraint::serialize_conjunction(r.constraint)});
  return out;
}

} // namespace

TEST_CASE("naive_match: single atom against a one-event word") {
  ExprPtr e = resolved("signature a { x: string; } a(x)");
  TimedDataWord w = word_of({Event{"a", {txt("v")}, 0}});
  CHECK(naive_match(e, w, {}) == std::set<std::size_t>{0});
}

TEST_CASE("naive_match: a*b accepts exactly the a,a,b prefix") {
  ExprPtr e = resolved("signature a { x: string; }\n"
                       "signature b { y: string; }\n"
                       "zero_or_more { a(x) }; b(y)");
  TimedDataWord w = word_of({Event{"a", {txt("v")}, 0},
                             Event{"a", {txt("v")}, 1},
                             Event{"b", {txt("v")}, 2}});
  CHECK(naive_match(e, w, {}) == std::set<std::size_t>{2});
}

TEST_CASE("naive_match: deployment pattern under a concrete valuation") {
  SpecAst ast =
      parse_spec(testutil::read_file(testutil::spec_path("deploy_latency.pat")));
  ExprPtr e = resolve(ast);
  std::vector<DataValue> valuation{txt("a"), txt("t")};

  TimedDataWord late = word_of({ev("create", "a", "t", 0),
                                ev("fetch", "b", "u", 301)});
  CHECK(naive_match(e, late, valuation) == std::set<std::size_t>{1});

  TimedDataWord answered = word_of({ev("create", "a", "t", 0),
                                    ev("fetch", "a", "t", 200),
                                    ev("fetch", "b", "u", 400)});
  CHECK(naive_match(e, answered, valuation).empty());
}

TEST_CASE("latency_check: answered in time yields nothing") {
  TimedDataWord w = word_of({ev("create", "a", "t", 0),
                             ev("fetch", "a", "t", 100)});
  CHECK(latency_check(w, 300).empty());
}

TEST_CASE("latency_check: every event past the deadline reports") {
  TimedDataWord w = word_of({ev("create", "a", "t", 0),
                             ev("fetch", "b", "u", 150),
                             ev("fetch", "b", "u", 320),
                             ev("fetch", "a", "t", 340)});
  std::vector<MatchReport> reports = latency_check(w, 300);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].time_point == 2);
  CHECK(reports[0].timestamp == 320);
  CHECK(ParamConstraint::serialize_conjunction(reports[0].constraint) ==
        "x0 == a\tx1 == t");
  CHECK(reports[1].time_point == 3);
  CHECK(reports[1].timestamp == 340);
  CHECK(ParamConstraint::serialize_conjunction(reports[1].constraint) ==
        "x0 == a\tx1 == t");
}

TEST_CASE("latency_check: reconstructed registry-push scenario") {
  // create at the recorded push instant; polls of an unrelated package
  // every 60 s; the matching fetch lands 377 s later.
  TimedDataWord w;
  w.append(ev("create", "auth-frontend",
              "stg-9c8f5e28c2c7d78da2648f5eaa62216038cbd1fd-1458",
              1751424646));
  for (int k = 1; k <= 5; ++k)
    w.append(ev("fetch", "auth-example", "stg-other-1441",
                1751424646 + 60 * k));
  w.append(ev("fetch", "auth-frontend",
              "stg-9c8f5e28c2c7d78da2648f5eaa62216038cbd1fd-1458",
              1751425023));

  std::vector<MatchReport> reports = latency_check(w, 300);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].timestamp == 1751425023);
  CHECK(reports[0].time_point == 6);
  CHECK(ParamConstraint::serialize_conjunction(reports[0].constraint) ==
        "x0 == auth-frontend\t"
        "x1 == stg-9c8f5e28c2c7d78da2648f5eaa62216038cbd1fd-1458");

  CHECK(latency_check(w, 600).empty());
}

TEST_CASE("latency_check boundary: exactly the bound is not a violation") {
  TimedDataWord w = word_of({ev("create", "a", "t", 0),
                             ev("fetch", "b", "u", 300)});
  CHECK(latency_check(w, 300).empty());

  TimedDataWord w2 = word_of({ev("create", "a", "t", 0),
                              ev("fetch", "b", "u", 301)});
  CHECK(latency_check(w2, 300).size() == 1);
}

TEST_CASE("latency_check is monotone in the bound") {
  std::mt19937_64 rng(5150);
  for (int i = 0; i < 300; ++i) {
    TimedDataWord w = testutil::random_latency_log(rng, 60, 3, 3);
    auto strict = report_keys(latency_check(w, 300));
    auto relaxed = report_keys(latency_check(w, 600));
    for (const auto &k : relaxed)
      CHECK(strict.count(k) == 1);
  }
}

TEST_CASE("latency_check rejects foreign schemas") {
  TimedDataWord w = word_of({Event{"boot", {txt("a"), txt("t")}, 0}});
  CHECK_THROWS_AS((void)latency_check(w, 300), schema_error);
  TimedDataWord w2 = word_of({Event{"create", {txt("a")}, 0}});
  CHECK_THROWS_AS((void)latency_check(w2, 300), schema_error);
}
