#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "testutil.hpp"

#include <array>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include <httplib.h>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output; // stdout only
};

RunResult run_cli(const std::string &args) {
  std::string cmd = std::string(PATMON_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE *pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    r.output.append(buf.data(), n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string spec_arg() {
  return "--spec " + testutil::spec_path("deploy_latency.pat");
}

fs::path temp_file(const std::string &name, const std::string &content) {
  fs::path p = fs::temp_directory_path() / ("patmon_test_" + name);
  std::ofstream out(p, std::ios::trunc | std::ios::binary);
  out << content;
  return p;
}

} // namespace

TEST_CASE("monitor: violation reports and exit codes") {
  std::string scenario =
      testutil::read_file(testutil::data_path("delayed_fetch_scenario.log"));
  fs::path log = temp_file("scenario.log", scenario);

  RunResult strict = run_cli("monitor " + spec_arg() + " " + log.string());
  CHECK(strict.exit_code == 1);
  CHECK(strict.output ==
        testutil::read_file(testutil::data_path(
            "delayed_fetch_scenario_bound300.golden")));

  RunResult relaxed =
      run_cli("monitor " + spec_arg() + " --bound 600 " + log.string());
  CHECK(relaxed.exit_code == 0);
  CHECK(relaxed.output.empty());
}

TEST_CASE("monitor: clean five-event sample stays silent") {
  fs::path log = temp_file(
      "clean.log",
      "create auth-backend stg-7c03f5241c93d6e77bb132d8ea9ffe9e59e7b62d-1445 "
      "171982\n"
      "fetch auth-example stg-379cca639565f93fe2485c6f443b1d5b45285534-1441 "
      "172084\n"
      "fetch auth-example stg-379cca639565f93fe2485c6f443b1d5b45285534-1441 "
      "172085\n"
      "create auth-frontend stg-7c03f5241c93d6e77bb132d8ea9ffe9e59e7b62d-1445 "
      "172140\n"
      "fetch auth-frontend stg-7c03f5241c93d6e77bb132d8ea9ffe9e59e7b62d-1445 "
      "172146\n");
  RunResult r = run_cli("monitor " + spec_arg() + " " + log.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.empty());
}

TEST_CASE("monitor: empty log exits clean") {
  fs::path log = temp_file("empty.log", "");
  RunResult r = run_cli("monitor " + spec_arg() + " " + log.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.empty());
}

TEST_CASE("monitor: malformed input exits 2") {
  fs::path log = temp_file("broken.log", "create a\n");
  CHECK(run_cli("monitor " + spec_arg() + " " + log.string()).exit_code == 2);
  CHECK(run_cli("monitor --spec /nonexistent.pat " + log.string())
            .exit_code == 2);
  CHECK(run_cli("monitor " + log.string()).exit_code == 2); // --spec missing

  fs::path unordered = temp_file("unordered.log",
                                 "create a t 100\nfetch a t 99\n");
  CHECK(run_cli("monitor " + spec_arg() + " " + unordered.string())
            .exit_code == 2);
}

TEST_CASE("monitor reads stdin when the log is '-'") {
  std::string scenario =
      testutil::read_file(testutil::data_path("delayed_fetch_scenario.log"));
  fs::path log = temp_file("stdin.log", scenario);
  RunResult r = run_cli("monitor " + spec_arg() + " - < " + log.string());
  CHECK(r.exit_code == 1);
  CHECK(r.output == testutil::read_file(testutil::data_path(
                        "delayed_fetch_scenario_bound300.golden")));
}

TEST_CASE("oracle and monitor emit byte-identical reports") {
  std::mt19937_64 rng(52);
  for (int i = 0; i < 5; ++i) {
    patmon::TimedDataWord w = testutil::random_latency_log(rng, 120, 3, 3);
    std::string text;
    for (const auto &e : w.events()) {
      text += e.label + " " + e.fields[0].to_string() + " " +
              e.fields[1].to_string() + " " + std::to_string(e.timestamp) +
              "\n";
    }
    fs::path log = temp_file("rand.log", text);
    for (const char *bound : {"300", "600"}) {
      RunResult mon = run_cli("monitor " + spec_arg() + " --bound " + bound +
                              " " + log.string());
      RunResult ora =
          run_cli("oracle --bound " + std::string(bound) + " " + log.string());
      CHECK(mon.output == ora.output);
      CHECK(mon.exit_code == ora.exit_code);
    }
  }
}

TEST_CASE("preprocess merges the shipped fixtures into 4-column lines") {
  RunResult r = run_cli(
      "preprocess --webhook " + testutil::data_path("webhook_push.json") +
      " --fluxcd " + testutil::data_path("flux_lines.jsonl"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.rfind("create auth-frontend "
                       "stg-9c8f5e28c2c7d78da2648f5eaa62216038cbd1fd-1458 "
                       "1751424646\n",
                       0) == 0);
  CHECK(std::count(r.output.begin(), r.output.end(), '\n') == 4);

  RunResult rebased = run_cli(
      "preprocess --rebase --webhook " +
      testutil::data_path("webhook_push.json") + " --fluxcd " +
      testutil::data_path("flux_lines.jsonl"));
  CHECK(rebased.output.rfind("create auth-frontend "
                             "stg-9c8f5e28c2c7d78da2648f5eaa62216038cbd1fd-"
                             "1458 0\n",
                             0) == 0);
}

TEST_CASE("generate feeds monitor end to end") {
  RunResult gen = run_cli("generate --preset 5d");
  CHECK(gen.exit_code == 0);
  fs::path log = temp_file("preset5d.log", gen.output);

  RunResult strict = run_cli("monitor " + spec_arg() + " " + log.string());
  CHECK(strict.exit_code == 1);
  CHECK_FALSE(strict.output.empty());

  RunResult relaxed =
      run_cli("monitor " + spec_arg() + " --bound 600 " + log.string());
  CHECK(relaxed.exit_code == 0);
  CHECK(relaxed.output.empty());
}

TEST_CASE("generate honors config files and seeds") {
  fs::path config = temp_file("scenario.cfg", "seed=11\n"
                                              "duration_days=1\n"
                                              "packages=app\n"
                                              "polling_interval_ms=60000\n"
                                              "push=app,tag-1,600\n");
  RunResult a = run_cli("generate --config " + config.string());
  RunResult b = run_cli("generate --config " + config.string());
  CHECK(a.exit_code == 0);
  CHECK(a.output == b.output);

  RunResult c = run_cli("generate --config " + config.string() + " --seed 12");
  CHECK(c.exit_code == 0);

  CHECK(run_cli("generate").exit_code == 2); // needs --preset or --config
}

TEST_CASE("follow converts polling lines from stdin") {
  RunResult r = run_cli("follow " + testutil::data_path("flux_lines.jsonl"));
  CHECK(r.exit_code == 0);
  CHECK(std::count(r.output.begin(), r.output.end(), '\n') == 3);
  CHECK(r.output.find("fetch auth-backend") != std::string::npos);
}

TEST_CASE("collect subcommand receives webhooks over HTTP") {
  int port = 23000 + static_cast<int>(getpid() % 10000);
  fs::path out = temp_file("collect.out", "");

  std::string cmd = std::string(PATMON_CLI_PATH) + " collect --bind 127.0.0.1:" +
                    std::to_string(port) + " --out " + out.string() +
                    " >/dev/null 2>&1 & echo $!";
  FILE *pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  long pid = 0;
  REQUIRE(fscanf(pipe, "%ld", &pid) == 1);
  pclose(pipe);

  std::string body =
      testutil::read_file(testutil::data_path("webhook_push.json"));
  bool accepted = false;
  {
    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(0, 200'000);
    for (int i = 0; i < 50 && !accepted; ++i) {
      auto res = client.Post("/webhook", body, "application/json");
      if (res && res->status == 200)
        accepted = true;
      else
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  }
  kill(static_cast<pid_t>(pid), SIGTERM);
  for (int i = 0; i < 20 && kill(static_cast<pid_t>(pid), 0) == 0; ++i)
    std::this_thread::sleep_for(std::chrono::milliseconds(100));

  REQUIRE(accepted);
  CHECK(testutil::read_file(out.string()) ==
        "create auth-frontend "
        "stg-9c8f5e28c2c7d78da2648f5eaa62216038cbd1fd-1458 1751424646\n");
}

TEST_CASE("bench prints one row per log") {
  RunResult gen = run_cli("generate --preset 15d");
  fs::path log = temp_file("bench15d.log", gen.output);
  RunResult r = run_cli("bench " + spec_arg() + " " + log.string() + " " +
                        log.string());
  CHECK(r.exit_code == 0);
  CAPTURE(r.output);

  // header plus two rows, each with three columns
  std::istringstream lines(r.output);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line.find("entries") != std::string::npos);
  std::vector<double> times;
  std::size_t entries = 0;
  while (std::getline(lines, line)) {
    std::istringstream cols(line);
    std::size_t n, reports;
    double ms;
    REQUIRE((cols >> n >> reports >> ms));
    entries = n;
    times.push_back(ms);
  }
  REQUIRE(times.size() == 2);
  CHECK(entries > 40000);
  // identical logs land within 20% of each other
  CHECK(std::abs(times[0] - times[1]) <=
        0.2 * std::max({times[0], times[1], 1.0}));
}
