// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Runs the full randomized equivalence checks, the reconstructed
// deployment scenario against its golden output, the benchmark-scale
// performance envelope, preprocessing fidelity, and the live collector.

#include "patmon/automaton.hpp"
#include "patmon/generator.hpp"
#include "patmon/ingest.hpp"
#include "patmon/monitor.hpp"
#include "patmon/oracle.hpp"
#include "patmon/specdsl.hpp"
#include "testutil.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

using namespace patmon;

namespace {

int failures = 0;

void criterion(int number, const std::string &name,
               const std::function<void()> &body) {
  auto start = std::chrono::steady_clock::now();
  std::string error;
  try {
    body();
  } catch (const std::exception &ex) {
    error = ex.what();
  }
  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  if (error.empty()) {
    std::printf("[PASS] criterion %d: %s (%.1fs)\n", number, name.c_str(),
                secs);
  } else {
    std::printf("[FAIL] criterion %d: %s: %s\n", number, name.c_str(),
                error.c_str());
    ++failures;
  }
  std::fflush(stdout);
}

void require(bool cond, const std::string &what) {
  if (!cond)
    throw std::runtime_error(what);
}

struct Deploy {
  SpecAst ast;
  Automaton a300;
  Automaton a600;
};

Deploy load_deploy() {
  SpecAst ast = parse_spec(
      testutil::read_file(testutil::spec_path("deploy_latency.pat")),
      "deploy_latency.pat");
  ExprPtr expr = resolve(ast);
  Automaton a300 = compile(expr, ast);
  Automaton a600 = compile(override_bounds(expr, 600), ast);
  return {std::move(ast), std::move(a300), std::move(a600)};
}

std::string render(const std::vector<MatchReport> &reports) {
  std::string out;
  for (const auto &r : reports) {
    out += format_report_line(r);
    out += '\n';
  }
  return out;
}

// ---- criteria ------------------------------------------------------

void spec_fidelity() {
  const Deploy d = load_deploy();
  require(d.ast.vars.size() == 2 && d.ast.vars[0].name == "current_name" &&
              d.ast.vars[1].name == "current_tag",
          "variable block mismatch");
  require(d.ast.signatures.size() == 2 &&
              d.ast.signatures[0].name == "create" &&
              d.ast.signatures[0].fields.size() == 2 &&
              d.ast.signatures[1].name == "fetch" &&
              d.ast.signatures[1].fields.size() == 2,
          "signature block mismatch");
  require(d.ast.exprs.size() == 3 && d.ast.exprs[0].name == "ignore_any" &&
              d.ast.exprs[1].name == "ignore_irrelevant" &&
              d.ast.exprs[2].name == "failed",
          "named expression mismatch");
  const auto *seq = std::get_if<SeqExpr>(&d.ast.main->node);
  require(seq && seq->items.size() == 2, "main expression is not a pair");
  const auto *r0 = std::get_if<RefExpr>(&seq->items[0]->node);
  const auto *r1 = std::get_if<RefExpr>(&seq->items[1]->node);
  require(r0 && r0->name == "ignore_any" && r1 && r1->name == "failed",
          "main expression references mismatch");
  require(d.a300.num_clocks() == 1, "clock count is not 1");
}

void oracle_equivalence() {
  const Deploy d = load_deploy();
  std::mt19937_64 rng(20250811);
  int logs = 0;
  for (int i = 0; i < 10'000; ++i) {
    TimedDataWord w = testutil::random_latency_log(rng, 200, 4, 4);
    for (std::int64_t bound : {300, 600}) {
      const Automaton &a = bound == 300 ? d.a300 : d.a600;
      std::vector<MatchReport> sym = run(a, w);
      std::vector<MatchReport> ref = latency_check(w, bound);
      if (!(sym == ref))
        throw std::runtime_error("report mismatch on log " +
                                 std::to_string(i) + " at bound " +
                                 std::to_string(bound));
    }
    ++logs;
  }
  require(logs == 10'000, "log count");
}

void generic_equivalence() {
  std::mt19937_64 rng(777);
  testutil::ExprSourceGen gen(rng);
  auto valuations =
      testutil::all_valuations({"v1", "v2", "fresh"}, 2);
  long triples = 0;
  for (int i = 0; i < 300; ++i) {
    std::string src = gen.spec_source(1 + static_cast<int>(rng() % 3));
    SpecAst ast = parse_spec(src);
    ExprPtr expr = resolve(ast);
    Automaton automaton = compile(expr, ast);
    for (int j = 0; j < 4; ++j) {
      TimedDataWord w = testutil::random_small_word(rng, 5);
      std::vector<MatchReport> reports = run(automaton, w);
      for (const auto &valuation : valuations) {
        std::set<std::size_t> naive = naive_match(expr, w, valuation);
        std::set<std::size_t> symbolic;
        for (const auto &r : reports)
          if (ParamConstraint::of({r.constraint}).evaluate(valuation))
            symbolic.insert(r.time_point);
        if (symbolic != naive)
          throw std::runtime_error("prefix-set mismatch for: " + src);
        ++triples;
      }
    }
  }
  require(triples >= 10'000, "triple count " + std::to_string(triples));
}

void scenario_reconstruction() {
  const Deploy d = load_deploy();
  std::ifstream log(testutil::data_path("delayed_fetch_scenario.log"));
  TimedDataWord w = read_event_log(log);
  require(w.size() == 8, "fixture size");
  require(w[0].timestamp == 1751424646, "create instant");
  require(w[6].timestamp == 1751425023, "late fetch instant");
  require(w[6].timestamp - w[0].timestamp == 377, "gap is 377 s");

  std::string strict = render(run(d.a300, w));
  std::string golden = testutil::read_file(
      testutil::data_path("delayed_fetch_scenario_bound300.golden"));
  require(strict == golden, "bound-300 output differs from golden");

  std::string relaxed = render(run(d.a600, w));
  std::string golden600 = testutil::read_file(
      testutil::data_path("delayed_fetch_scenario_bound600.golden"));
  require(relaxed == golden600,
          "bound-600 output should be empty: matching fetch within 600 s");
}

void performance_envelope() {
  const Deploy d = load_deploy();
  struct Row {
    int days;
    std::size_t target;
    double median_ms = 0;
  };
  std::vector<Row> rows{{5, 12'758}, {10, 25'223}, {15, 41'151}};
  for (Row &row : rows) {
    TimedDataWord w = generate(benchmark_preset(row.days));
    double lo = static_cast<double>(row.target) * 0.99;
    double hi = static_cast<double>(row.target) * 1.01;
    require(static_cast<double>(w.size()) >= lo &&
                static_cast<double>(w.size()) <= hi,
            "entry count " + std::to_string(w.size()) + " outside 1% of " +
                std::to_string(row.target));

    std::vector<double> samples;
    for (int i = 0; i < 5; ++i) {
      auto t0 = std::chrono::steady_clock::now();
      std::vector<MatchReport> reports = run(d.a300, w);
      auto t1 = std::chrono::steady_clock::now();
      samples.push_back(
          std::chrono::duration<double, std::milli>(t1 - t0).count());
      if (row.days == 5)
        require(!reports.empty(), "5-day preset should report at 300 s");
    }
    std::sort(samples.begin(), samples.end());
    row.median_ms = samples[2];
    std::printf("       %2d days: %zu entries, %.1f ms\n", row.days, w.size(),
                row.median_ms);
    require(row.median_ms <= 2000.0,
            "run took " + std::to_string(row.median_ms) + " ms > 2000 ms");
  }
  require(rows[2].median_ms <= 4.0 * std::max(rows[0].median_ms, 1e-3),
          "15-day runtime exceeds 4x the 5-day runtime");
}

void preprocessing_fidelity() {
  std::string webhook = testutil::read_file(
      testutil::data_path("webhook_push.json"));
  RecordParse create = parse_webhook(webhook);
  require(create.event.has_value(), "webhook fixture rejected");
  require(format_event(*create.event) ==
              "create auth-frontend "
              "stg-9c8f5e28c2c7d78da2648f5eaa62216038cbd1fd-1458 1751424646",
          "webhook line mismatch");

  std::string flux = testutil::read_file(
      testutil::data_path("fluxcd_poll.json"));
  RecordParse fetch = parse_fluxcd(flux);
  require(fetch.event.has_value(), "fluxcd fixture rejected");
  require(format_event(*fetch.event) ==
              "fetch auth-frontend "
              "stg-9c8f5e28c2c7d78da2648f5eaa62216038cbd1fd-1458 1751526419",
          "fluxcd line mismatch");

  // independent calendar oracle for the two instants
  auto via_timegm = [](int y, int mo, int dd, int h, int mi, int s) {
    std::tm tm{};
    tm.tm_year = y - 1900;
    tm.tm_mon = mo - 1;
    tm.tm_mday = dd;
    tm.tm_hour = h;
    tm.tm_min = mi;
    tm.tm_sec = s;
    return static_cast<std::int64_t>(timegm(&tm));
  };
  require(via_timegm(2025, 7, 2, 2, 50, 46) == 1751424646,
          "calendar oracle disagrees on the push instant");
  require(via_timegm(2025, 7, 3, 7, 6, 59) == 1751526419,
          "calendar oracle disagrees on the poll instant");
  require(create.event->timestamp == 1751424646 &&
              fetch.event->timestamp == 1751526419,
          "converted timestamps mismatch");
}

void collector_behavior() {
  std::ostringstream out;
  LineSink sink(out);
  Collector collector(sink);
  require(collector.bind("127.0.0.1", 0), "bind failed");
  std::thread server([&] { collector.listen(); });

  std::string body = testutil::read_file(
      testutil::data_path("webhook_push.json"));
  {
    httplib::Client client("127.0.0.1", collector.port());
    auto ok = client.Post("/webhook", body, "application/json");
    require(ok && ok->status == 200, "well-formed POST not accepted");
    auto bad = client.Post("/webhook", "{\"oops\":1}", "application/json");
    require(bad && bad->status == 400, "malformed POST not rejected");
  }
  require(out.str() ==
              "create auth-frontend "
              "stg-9c8f5e28c2c7d78da2648f5eaa62216038cbd1fd-1458 1751424646\n",
          "single delivery produced unexpected sink content");

  // 100 concurrent deliveries, all distinct
  std::vector<std::thread> posters;
  for (int t = 0; t < 10; ++t) {
    posters.emplace_back([&, t] {
      httplib::Client client("127.0.0.1", collector.port());
      for (int k = 0; k < 10; ++k) {
        std::string payload =
            R"({"time":"2025-07-03T07:05:59Z","package_name":"pkg)" +
            std::to_string(t) + R"(","package_tag":"tag-)" +
            std::to_string(k) + R"("})";
        auto res = client.Post("/webhook", payload, "application/json");
        if (!res || res->status != 200)
          throw std::runtime_error("concurrent POST failed");
      }
    });
  }
  for (auto &p : posters)
    p.join();
  collector.stop();
  server.join();

  std::istringstream lines(out.str());
  std::string line;
  int well_formed = 0;
  while (std::getline(lines, line)) {
    RecordParse rp = parse_line(line);
    require(rp.event.has_value(), "mangled line in sink: " + line);
    ++well_formed;
  }
  require(well_formed == 101,
          "expected 101 lines, got " + std::to_string(well_formed));
  require(collector.stats().accepted == 101 &&
              collector.stats().rejected == 1,
          "collector stats mismatch");
}

} // namespace

int main() {
  criterion(1, "spec fidelity", spec_fidelity);
  criterion(2, "oracle equivalence on 10,000 random logs",
            oracle_equivalence);
  criterion(3, "generic small-instance equivalence on 10,800 triples",
            generic_equivalence);
  criterion(4, "deployment scenario reconstruction", scenario_reconstruction);
  criterion(5, "performance envelope at benchmark scale",
            performance_envelope);
  criterion(6, "preprocessing fidelity", preprocessing_fidelity);
  criterion(7, "collector behavior", collector_behavior);

  if (failures) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
