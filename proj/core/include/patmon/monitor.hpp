// Online symbolic matching engine: consumes events one at a time and
// reports every accepted log prefix together with the satisfiable
// parameter constraint that witnesses it.

#pragma once

#include "patmon/automaton.hpp"
#include "patmon/core.hpp"

#include <string>
#include <vector>

namespace patmon {

class monitor_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Event timestamp went backwards.
class monotonicity_error : public monitor_error {
public:
  using monitor_error::monitor_error;
};

// Unknown label or wrong field arity.
class schema_error : public monitor_error {
public:
  using monitor_error::monitor_error;
};

// One accepted prefix under one conjunction of parameter atoms. A step
// that accepts under several disjuncts yields one report per disjunct.
struct MatchReport {
  std::size_t time_point = 0; // 0-based index of the completing event
  std::int64_t timestamp = 0;
  Conjunction constraint; // satisfiable, canonical
};

bool operator==(const MatchReport &a, const MatchReport &b);

// `@<timestamp>.000000.\t(time-point <n>)\t` then tab-separated atoms in
// variable-declaration order, then `\ttrue`. No trailing newline.
std::string format_report_line(const MatchReport &r);

// A Session is single-owner; distinct sessions over one shared automaton
// run concurrently without coordination.
class Session {
public:
  explicit Session(const Automaton &a);

  // Advances every live configuration over every enabled transition and
  // returns the reports completed by this event, ordered by constraint
  // serialization. Throws monotonicity_error / schema_error.
  std::vector<MatchReport> step(const Event &e);

  std::size_t events_consumed() const { return consumed_; }
  std::size_t live_configurations() const { return configs_.size(); }

private:
  struct Config {
    int location = 0;
    std::vector<std::int64_t> clock_reset; // -1 = never reset
    ParamConstraint constraint;
  };

  const Automaton *aut_;
  std::vector<Config> configs_;
  std::vector<Config> scratch_;
  // per-step guard evaluation cache: a guard's value depends only on the
  // event, and transitions compiled from one atom share a guard object
  std::vector<std::pair<const Guard *, ParamConstraint>> guard_cache_;
  std::int64_t last_ts_ = -1;
  std::size_t consumed_ = 0;
};

// Batch entry point: concatenation of step() outputs over the whole word.
std::vector<MatchReport> run(const Automaton &a, const TimedDataWord &w);

} // namespace patmon
