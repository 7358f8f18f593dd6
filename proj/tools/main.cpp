// patmon: monitor timed event logs against timed-pattern specifications
// with data parameters, plus the ingestion, generation and benchmarking
// pieces around it.
//
// Exit codes: 0 = clean, 1 = at least one report (violation found),
// 2 = input or usage error. `monitor` and `oracle` print one report line
// per accepted prefix and parameter disjunct.

#include "patmon/automaton.hpp"
#include "patmon/generator.hpp"
#include "patmon/ingest.hpp"
#include "patmon/monitor.hpp"
#include "patmon/oracle.hpp"
#include "patmon/specdsl.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace {

using namespace patmon;

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// '-' selects stdin.
std::unique_ptr<std::istream> open_input(const std::string &path) {
  if (path == "-")
    return nullptr;
  auto in = std::make_unique<std::ifstream>(path);
  if (!*in)
    throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

Automaton load_automaton(const std::string &spec_path,
                         std::optional<std::int64_t> bound) {
  std::string source = read_file(spec_path);
  SpecAst ast = parse_spec(source, spec_path);
  ExprPtr expr = resolve(ast);
  if (bound)
    expr = override_bounds(expr, *bound);
  return compile(expr, ast);
}

std::int64_t checked_bound(std::int64_t bound) {
  if (bound < 0)
    throw std::runtime_error("--bound must be non-negative");
  return bound;
}

int cmd_monitor(const std::string &spec_path, const std::string &log_path,
                std::optional<std::int64_t> bound) {
  Automaton automaton = load_automaton(spec_path, bound);
  Session session(automaton);

  auto file = open_input(log_path);
  std::istream &in = file ? *file : std::cin;

  bool reported = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    RecordParse rp = parse_line(line);
    if (!rp.event)
      throw std::runtime_error(log_path + ":" + std::to_string(lineno) +
                               ": " + rp.error);
    std::vector<MatchReport> reports;
    try {
      reports = session.step(*rp.event);
    } catch (const monitor_error &ex) {
      throw std::runtime_error(log_path + ":" + std::to_string(lineno) +
                               ": " + ex.what());
    }
    for (const auto &r : reports) {
      std::cout << format_report_line(r) << '\n';
      reported = true;
    }
  }
  std::cout.flush();
  return reported ? 1 : 0;
}

int cmd_oracle(const std::string &log_path, std::int64_t bound) {
  auto file = open_input(log_path);
  TimedDataWord word = read_event_log(file ? *file : std::cin);
  std::vector<MatchReport> reports = latency_check(word, bound);
  for (const auto &r : reports)
    std::cout << format_report_line(r) << '\n';
  std::cout.flush();
  return reports.empty() ? 0 : 1;
}

int cmd_preprocess(const std::vector<std::string> &webhook_paths,
                   const std::vector<std::string> &flux_paths, bool rebase) {
  std::vector<std::unique_ptr<std::istream>> owned;
  std::vector<std::istream *> webhooks, fluxes;
  for (const auto &p : webhook_paths) {
    owned.push_back(open_input(p));
    webhooks.push_back(owned.back() ? owned.back().get() : &std::cin);
  }
  for (const auto &p : flux_paths) {
    owned.push_back(open_input(p));
    fluxes.push_back(owned.back() ? owned.back().get() : &std::cin);
  }
  PreprocessResult result = preprocess(webhooks, fluxes, rebase);
  for (const auto &d : result.webhook.diagnostics)
    std::cerr << "webhook: " << d << '\n';
  for (const auto &d : result.fluxcd.diagnostics)
    std::cerr << "fluxcd: " << d << '\n';
  for (const auto &e : result.events)
    std::cout << format_event(e) << '\n';
  std::cout.flush();
  std::cerr << "preprocess: " << result.webhook.accepted << " create, "
            << result.fluxcd.accepted << " fetch, "
            << result.fluxcd.skipped << " skipped, "
            << result.webhook.rejected + result.fluxcd.rejected
            << " rejected\n";
  return 0;
}

int cmd_follow(const std::string &input_path, const std::string &out_path) {
  auto file = open_input(input_path);
  std::ofstream out_file;
  if (!out_path.empty()) {
    out_file.open(out_path, std::ios::app);
    if (!out_file)
      throw std::runtime_error("cannot open '" + out_path + "'");
  }
  LineSink sink(out_path.empty() ? std::cout : out_file);
  SourceStats stats = follow(file ? *file : std::cin, sink);
  for (const auto &d : stats.diagnostics)
    std::cerr << "fluxcd: " << d << '\n';
  std::cerr << "follow: " << stats.accepted << " fetch, " << stats.skipped
            << " skipped, " << stats.rejected << " rejected\n";
  return 0;
}

Collector *g_collector = nullptr;

int cmd_collect(const std::string &bind, const std::string &out_path) {
  std::string host = bind;
  int port = 8080;
  if (auto colon = bind.rfind(':'); colon != std::string::npos) {
    host = bind.substr(0, colon);
    port = std::stoi(bind.substr(colon + 1));
  }

  std::ofstream out_file;
  if (!out_path.empty()) {
    out_file.open(out_path, std::ios::app);
    if (!out_file)
      throw std::runtime_error("cannot open '" + out_path + "'");
  }
  LineSink sink(out_path.empty() ? std::cout : out_file);
  Collector collector(sink);
  if (!collector.bind(host, port))
    throw std::runtime_error("cannot bind " + host + ":" +
                             std::to_string(port));
  std::cerr << "collect: listening on " << host << ":" << collector.port()
            << ", POST /webhook\n";

  g_collector = &collector;
  std::signal(SIGINT, [](int) {
    if (g_collector)
      g_collector->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_collector)
      g_collector->stop();
  });
  collector.listen();
  g_collector = nullptr;

  Collector::Stats stats = collector.stats();
  std::cerr << "collect: " << stats.accepted << " accepted, "
            << stats.rejected << " rejected\n";
  return 0;
}

int cmd_generate(const std::string &preset, const std::string &config_path,
                 std::optional<std::uint64_t> seed) {
  Scenario scenario;
  if (!preset.empty()) {
    int days = preset == "5d" ? 5 : preset == "10d" ? 10 : 15;
    scenario = benchmark_preset(days);
  } else {
    scenario = parse_scenario(read_file(config_path));
  }
  if (seed)
    scenario.seed = *seed;
  TimedDataWord word = generate(scenario);
  for (const auto &e : word.events())
    std::cout << format_event(e) << '\n';
  std::cout.flush();
  return 0;
}

int cmd_bench(const std::string &spec_path,
              const std::vector<std::string> &log_paths,
              std::optional<std::int64_t> bound) {
  Automaton automaton = load_automaton(spec_path, bound);

  std::printf("%10s %10s %12s\n", "entries", "reports", "time_ms");
  for (const auto &path : log_paths) {
    auto file = open_input(path);
    TimedDataWord word = read_event_log(file ? *file : std::cin);

    // Timing covers the run only, not the file read: one untimed
    // warm-up, then the median of 5 samples.
    std::size_t reports = run(automaton, word).size();
    std::vector<double> samples;
    for (int i = 0; i < 5; ++i) {
      auto start = std::chrono::steady_clock::now();
      std::vector<MatchReport> out = run(automaton, word);
      auto stop = std::chrono::steady_clock::now();
      reports = out.size();
      samples.push_back(
          std::chrono::duration<double, std::milli>(stop - start).count());
    }
    std::sort(samples.begin(), samples.end());
    std::printf("%10zu %10zu %12.1f\n", word.size(), reports, samples[2]);
  }
  return 0;
}

int dispatch(int argc, char **argv) {
  CLI::App app{"timed-pattern monitor for CD-pipeline event logs"};
  app.require_subcommand(1);

  std::string spec_path, log_path = "-";
  std::int64_t bound_value = 0;
  bool have_bound = false;

  auto *monitor_cmd =
      app.add_subcommand("monitor", "report accepted log prefixes with "
                                    "their parameter valuations");
  monitor_cmd->add_option("--spec", spec_path, "specification file")
      ->required();
  monitor_cmd->add_option("--bound", bound_value,
                          "override every within bound (seconds)");
  monitor_cmd->add_option("log", log_path, "event log ('-' = stdin)");

  std::string oracle_log = "-";
  std::int64_t oracle_bound = 300;
  auto *oracle_cmd = app.add_subcommand(
      "oracle", "brute-force create/fetch latency checker (reference)");
  oracle_cmd->add_option("--bound", oracle_bound, "latency bound (seconds)");
  oracle_cmd->add_option("log", oracle_log, "event log ('-' = stdin)");

  std::vector<std::string> webhook_paths, flux_paths;
  bool rebase = false;
  auto *pre_cmd = app.add_subcommand(
      "preprocess", "convert raw webhook/FluxCD JSON into 4-column events");
  pre_cmd->add_option("--webhook", webhook_paths,
                      "webhook JSON file (repeatable)");
  pre_cmd->add_option("--fluxcd", flux_paths,
                      "FluxCD log file, one JSON per line (repeatable)");
  pre_cmd->add_flag("--rebase", rebase,
                    "subtract the first event's timestamp");

  std::string follow_input = "-", follow_out;
  auto *follow_cmd = app.add_subcommand(
      "follow", "pipe FluxCD polling JSON lines into fetch events");
  follow_cmd->add_option("input", follow_input, "input ('-' = stdin)");
  follow_cmd->add_option("--out", follow_out, "append to file (default stdout)");

  std::string bind = "127.0.0.1:8080", collect_out;
  auto *collect_cmd = app.add_subcommand(
      "collect", "receive registry webhooks on POST /webhook");
  collect_cmd->add_option("--bind", bind, "host:port (port 0 = ephemeral)");
  collect_cmd->add_option("--out", collect_out,
                          "append to file (default stdout)");

  std::string preset, config_path;
  std::uint64_t seed_value = 0;
  bool have_seed = false;
  auto *gen_cmd =
      app.add_subcommand("generate", "synthesize a CD-pipeline event log");
  auto *preset_opt = gen_cmd->add_option(
      "--preset", preset, "benchmark-scale preset: 5d, 10d or 15d");
  preset_opt->check(CLI::IsMember({"5d", "10d", "15d"}));
  auto *config_opt =
      gen_cmd->add_option("--config", config_path, "scenario config file");
  preset_opt->excludes(config_opt);
  gen_cmd->add_option("--seed", seed_value, "override the scenario seed");

  std::string bench_spec;
  std::vector<std::string> bench_logs;
  auto *bench_cmd = app.add_subcommand(
      "bench", "time the monitor over event logs (median of 5 runs)");
  bench_cmd->add_option("--spec", bench_spec, "specification file")
      ->required();
  bench_cmd->add_option("--bound", bound_value,
                        "override every within bound (seconds)");
  bench_cmd->add_option("logs", bench_logs, "event logs")->required();

  try {
    app.parse(argc, argv);
    have_bound = monitor_cmd->count("--bound") > 0 ||
                 bench_cmd->count("--bound") > 0;
    have_seed = gen_cmd->count("--seed") > 0;

    if (monitor_cmd->parsed())
      return cmd_monitor(spec_path, log_path,
                         have_bound ? std::optional(checked_bound(bound_value))
                                    : std::nullopt);
    if (oracle_cmd->parsed())
      return cmd_oracle(oracle_log, checked_bound(oracle_bound));
    if (pre_cmd->parsed())
      return cmd_preprocess(webhook_paths, flux_paths, rebase);
    if (follow_cmd->parsed())
      return cmd_follow(follow_input, follow_out);
    if (collect_cmd->parsed())
      return cmd_collect(bind, collect_out);
    if (gen_cmd->parsed()) {
      if (preset.empty() && config_path.empty())
        throw std::runtime_error("generate needs --preset or --config");
      return cmd_generate(preset, config_path,
                          have_seed ? std::optional(seed_value)
                                    : std::nullopt);
    }
    if (bench_cmd->parsed())
      return cmd_bench(bench_spec, bench_logs,
                       have_bound ? std::optional(checked_bound(bound_value))
                                  : std::nullopt);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0)
      return app.exit(e); // --help
    app.exit(e);
    return 2;
  }
  return 2;
}

} // namespace

int main(int argc, char **argv) {
  try {
    return dispatch(argc, argv);
  } catch (const std::exception &ex) {
    std::cerr << "patmon: " << ex.what() << '\n';
    return 2;
  }
}
