#include "patmon/monitor.hpp"

#include <algorithm>

namespace patmon {

bool operator==(const MatchReport &a, const MatchReport &b) {
  return a.time_point == b.time_point && a.timestamp == b.timestamp &&
         a.constraint.size() == b.constraint.size() &&
         std::equal(a.constraint.begin(), a.constraint.end(),
                    b.constraint.begin());
}

std::string format_report_line(const MatchReport &r) {
  std::string line = "@" + std::to_string(r.timestamp) + ".000000.";
  line += "\t(time-point " + std::to_string(r.time_point) + ")";
  std::string atoms = ParamConstraint::serialize_conjunction(r.constraint);
  if (!atoms.empty()) {
    line += '\t';
    line += atoms;
  }
  line += "\ttrue";
  return line;
}

namespace {

DataValue operand_value(const GuardOperand &op,
                        const std::vector<DataValue> &fields) {
  if (op.kind == GuardOperand::Kind::binder)
    return fields[static_cast<std::size_t>(op.index)];
  return DataValue::text(op.text);
}

// Substitutes the event's field values for binders and folds the guard
// into a constraint over the global parameters alone.
ParamConstraint eval_guard(const Guard &g,
                           const std::vector<DataValue> &fields) {
  switch (g.kind) {
  case Guard::Kind::atom: {
    const GuardAtom &at = *g.atom;
    bool lhs_global = at.lhs.kind == GuardOperand::Kind::global;
    bool rhs_global = at.rhs.kind == GuardOperand::Kind::global;
    if (lhs_global || rhs_global) {
      // compile() rejects global-vs-global atoms
      const GuardOperand &param = lhs_global ? at.lhs : at.rhs;
      const GuardOperand &other = lhs_global ? at.rhs : at.lhs;
      return ParamConstraint::atom(param.index, at.equal,
                                   operand_value(other, fields));
    }
    bool holds = operand_value(at.lhs, fields)
                     .equals(operand_value(at.rhs, fields));
    if (!at.equal)
      holds = !holds;
    return holds ? ParamConstraint::top() : ParamConstraint::bottom();
  }
  case Guard::Kind::all_of: {
    ParamConstraint acc = ParamConstraint::top();
    for (const auto &c : g.children) {
      acc = conjoin(acc, eval_guard(c, fields));
      if (!acc.is_satisfiable())
        return acc;
    }
    return acc;
  }
  case Guard::Kind::any_of: {
    ParamConstraint acc = ParamConstraint::bottom();
    for (const auto &c : g.children)
      acc = acc.or_with(eval_guard(c, fields));
    return acc;
  }
  }
  return ParamConstraint::bottom();
}

} // namespace

Session::Session(const Automaton &a) : aut_(&a) {
  Config initial;
  initial.location = a.initial_location();
  initial.clock_reset.assign(static_cast<std::size_t>(a.num_clocks()), -1);
  initial.constraint = ParamConstraint::top();
  configs_.push_back(std::move(initial));
}

std::vector<MatchReport> Session::step(const Event &e) {
  if (e.timestamp < last_ts_)
    throw monotonicity_error(
        "event timestamp " + std::to_string(e.timestamp) +
        " is earlier than the previous event at " + std::to_string(last_ts_));
  int sig = aut_->signature_index(e.label);
  if (sig < 0)
    throw schema_error("unknown event label '" + e.label + "'");
  std::size_t arity = aut_->signatures()[static_cast<std::size_t>(sig)]
                          .fields.size();
  if (e.fields.size() != arity)
    throw schema_error("label '" + e.label + "' expects " +
                       std::to_string(arity) + " fields, got " +
                       std::to_string(e.fields.size()));

  const std::int64_t now = e.timestamp;
  guard_cache_.clear();
  // copies share storage, so returning by value costs one refcount
  auto gained_for = [&](const Transition &t) -> ParamConstraint {
    if (!t.guard)
      return ParamConstraint::top();
    for (const auto &[g, c] : guard_cache_) {
      if (g == t.guard.get())
        return c;
    }
    guard_cache_.emplace_back(t.guard.get(), eval_guard(*t.guard, e.fields));
    return guard_cache_.back().second;
  };

  // Same (location, clock values) merge into one configuration whose
  // constraint is the disjunction. Few configurations are live at a
  // time, so a linear scan beats an ordered map here.
  std::vector<Config> &next = scratch_;
  next.clear();
  std::vector<Conjunction> accepted;

  std::vector<std::int64_t> clocks; // scratch for reset targets
  for (const Config &cfg : configs_) {
    for (int idx : aut_->transitions_from(cfg.location, sig)) {
      const Transition &t = aut_->transitions()[static_cast<std::size_t>(idx)];

      bool clocks_ok = true;
      for (const ClockAtom &c : t.clock_guard) {
        std::int64_t reset = cfg.clock_reset[static_cast<std::size_t>(c.clock)];
        // compilation puts every reset on the paths ahead of its checks
        if (reset < 0)
          throw std::logic_error("clock checked before any reset");
        if (!cmp_eval(now - reset, c.cmp, c.bound)) {
          clocks_ok = false;
          break;
        }
      }
      if (!clocks_ok)
        continue;

      ParamConstraint gained = gained_for(t);
      if (!gained.is_satisfiable())
        continue;
      ParamConstraint combined = conjoin(cfg.constraint, gained);
      if (!combined.is_satisfiable())
        continue;

      if (t.target == aut_->accepting_location()) {
        for (const auto &d : combined.disjuncts())
          accepted.push_back(d);
        continue;
      }

      const std::vector<std::int64_t> *key = &cfg.clock_reset;
      if (!t.clock_resets.empty()) {
        clocks = cfg.clock_reset;
        for (int r : t.clock_resets)
          clocks[static_cast<std::size_t>(r)] = now;
        key = &clocks;
      }

      bool merged = false;
      for (Config &existing : next) {
        if (existing.location == t.target && existing.clock_reset == *key) {
          existing.constraint = existing.constraint.or_with(combined);
          merged = true;
          break;
        }
      }
      if (!merged)
        next.push_back(Config{t.target, *key, std::move(combined)});
    }
  }

  configs_.swap(next);

  std::size_t time_point = consumed_;
  ++consumed_;
  last_ts_ = now;

  std::vector<MatchReport> reports;
  if (!accepted.empty()) {
    // Canonical union: duplicates collapse, disjuncts subsumed by a
    // sibling drop, and the serialization order fixes report order.
    ParamConstraint merged = ParamConstraint::of(std::move(accepted));
    std::vector<std::pair<std::string, Conjunction>> ordered;
    ordered.reserve(merged.disjuncts().size());
    for (const auto &d : merged.disjuncts())
      ordered.emplace_back(ParamConstraint::serialize_conjunction(d), d);
    std::sort(ordered.begin(), ordered.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });
    for (auto &[text, conj] : ordered)
      reports.push_back(MatchReport{time_point, now, std::move(conj)});
  }
  return reports;
}

std::vector<MatchReport> run(const Automaton &a, const TimedDataWord &w) {
  Session session(a);
  std::vector<MatchReport> out;
  for (const Event &e : w.events()) {
    auto reports = session.step(e);
    out.insert(out.end(), std::make_move_iterator(reports.begin()),
               std::make_move_iterator(reports.end()));
  }
  return out;
}

} // namespace patmon
