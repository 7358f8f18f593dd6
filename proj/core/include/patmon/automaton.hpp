// Compiles a resolved expression into a data-parametric timed automaton:
// one clock per `within` scope, symbolic data guards over binders and
// globals, and concrete integer clock bounds. Silent transitions are
// eliminated at compile time, so the monitor only ever handles
// event-consuming transitions.

#pragma once

#include "patmon/specdsl.hpp"

#include <string>
#include <vector>

namespace patmon {

class compile_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ClockAtom {
  int clock = 0;
  CmpOp cmp = CmpOp::gt;
  std::int64_t bound = 0;
};

struct Transition {
  int source = 0;
  int target = 0;
  int signature = 0;
  // over binders and globals; null = true. Transitions compiled from one
  // event atom share the same guard object.
  std::shared_ptr<const Guard> guard;
  std::vector<ClockAtom> clock_guard; // evaluated before resets apply
  std::vector<int> clock_resets;     // reset to the consumed event's time
};

class Automaton {
public:
  int num_locations() const { return num_locations_; }
  int initial_location() const { return 0; }
  // -1 when no event-consuming path reaches acceptance.
  int accepting_location() const { return accepting_; }
  int num_clocks() const { return num_clocks_; }

  const std::vector<std::string> &globals() const { return globals_; }
  const std::vector<SignatureDecl> &signatures() const { return signatures_; }
  int signature_index(std::string_view name) const;

  const std::vector<Transition> &transitions() const { return transitions_; }
  const std::vector<int> &transitions_from(int location) const;
  const std::vector<int> &transitions_from(int location, int signature) const;

private:
  friend Automaton compile(const ExprPtr &, const SpecAst &);

  int num_locations_ = 1;
  int accepting_ = -1;
  int num_clocks_ = 0;
  std::vector<std::string> globals_;
  std::vector<SignatureDecl> signatures_;
  std::vector<Transition> transitions_;
  std::vector<std::vector<int>> by_source_;
  std::vector<std::vector<int>> by_source_sig_; // source * num_sigs + sig
};

// Throws compile_error on number-typed fields or variables, on guards
// comparing two globals, and on unresolved references.
Automaton compile(const ExprPtr &expr, const SpecAst &ast);

// Deterministic human-readable dump; byte-identical for identical input.
std::string describe(const Automaton &a);

} // namespace patmon
