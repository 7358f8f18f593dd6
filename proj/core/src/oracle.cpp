#include "patmon/oracle.hpp"

#include <algorithm>
#include <unordered_map>

namespace patmon {

namespace {

DataValue concrete(const GuardOperand &op, const Event &e,
                   std::span<const DataValue> valuation) {
  switch (op.kind) {
  case GuardOperand::Kind::binder:
    return e.fields[static_cast<std::size_t>(op.index)];
  case GuardOperand::Kind::global:
    return valuation[static_cast<std::size_t>(op.index)];
  case GuardOperand::Kind::literal:
    return DataValue::text(op.text);
  }
  return {};
}

bool guard_holds(const Guard &g, const Event &e,
                 std::span<const DataValue> valuation) {
  switch (g.kind) {
  case Guard::Kind::atom: {
    bool eq = concrete(g.atom->lhs, e, valuation)
                  .equals(concrete(g.atom->rhs, e, valuation));
    return g.atom->equal ? eq : !eq;
  }
  case Guard::Kind::all_of:
    for (const auto &c : g.children)
      if (!guard_holds(c, e, valuation))
        return false;
    return true;
  case Guard::Kind::any_of:
    for (const auto &c : g.children)
      if (guard_holds(c, e, valuation))
        return true;
    return false;
  }
  return false;
}

struct Matcher {
  const TimedDataWord &w;
  std::span<const DataValue> valuation;
  std::unordered_map<const ExprNode *, std::vector<signed char>> memo;

  // Can `e` match exactly the events of [i, j)? Memoized per node over
  // the (i, j) grid; -1 unknown, else 0/1.
  bool matches(const ExprPtr &e, std::size_t i, std::size_t j) {
    std::size_t n = w.size() + 1;
    auto &grid = memo[e.get()];
    if (grid.empty())
      grid.assign(n * n, -1);
    signed char &cell = grid[i * n + j];
    if (cell < 0)
      cell = compute(e, i, j) ? 1 : 0;
    return cell == 1;
  }

  bool compute(const ExprPtr &e, std::size_t i, std::size_t j) {
    if (const auto *atom = std::get_if<EventAtomExpr>(&e->node)) {
      if (j != i + 1)
        return false;
      const Event &ev = w[i];
      if (ev.label != atom->signature)
        return false;
      return !atom->guard || guard_holds(*atom->guard, ev, valuation);
    }
    if (const auto *seq = std::get_if<SeqExpr>(&e->node))
      return match_seq(seq->items, 0, i, j);
    if (const auto *alt = std::get_if<OneOfExpr>(&e->node)) {
      for (const auto &b : alt->branches)
        if (matches(b, i, j))
          return true;
      return false;
    }
    if (const auto *star = std::get_if<ZeroOrMoreExpr>(&e->node)) {
      if (i == j)
        return true;
      // first iteration must consume at least one event
      for (std::size_t m = i + 1; m <= j; ++m)
        if (matches(star->child, i, m) && matches(e, m, j))
          return true;
      return false;
    }
    if (const auto *win = std::get_if<WithinExpr>(&e->node)) {
      if (!matches(win->child, i, j))
        return false;
      // Duration runs from the event just before the scope to the scope's
      // last event; a scope at the word start anchors on its own first
      // event, and an empty scope spans no time.
      std::int64_t duration = 0;
      if (j > i) {
        std::int64_t anchor =
            i > 0 ? w[i - 1].timestamp : w[i].timestamp;
        duration = w[j - 1].timestamp - anchor;
      }
      return cmp_eval(duration, win->cmp, win->bound);
    }
    throw std::logic_error("naive_match requires a resolved expression");
  }

  bool match_seq(const std::vector<ExprPtr> &items, std::size_t k,
                 std::size_t i, std::size_t j) {
    if (k + 1 == items.size())
      return matches(items[k], i, j);
    for (std::size_t m = i; m <= j; ++m)
      if (matches(items[k], i, m) && match_seq(items, k + 1, m, j))
        return true;
    return false;
  }
};

} // namespace

std::set<std::size_t> naive_match(const ExprPtr &expr, const TimedDataWord &w,
                                  std::span<const DataValue> valuation) {
  Matcher m{w, valuation, {}};
  std::set<std::size_t> ends;
  for (std::size_t k = 0; k < w.size(); ++k)
    if (m.matches(expr, 0, k + 1))
      ends.insert(k);
  return ends;
}

std::vector<MatchReport> latency_check(const TimedDataWord &w,
                                       std::int64_t bound) {
  struct Pending {
    std::string name;
    std::string tag;
    std::int64_t created;
  };
  std::vector<Pending> pending;
  std::vector<MatchReport> out;

  for (std::size_t k = 0; k < w.size(); ++k) {
    const Event &e = w[k];
    if ((e.label != "create" && e.label != "fetch") || e.fields.size() != 2)
      throw schema_error("latency_check expects create/fetch events with "
                         "two fields, got '" +
                         e.label + "'");
    const std::string &name = e.fields[0].as_text();
    const std::string &tag = e.fields[1].as_text();

    // This event witnesses every create older than the bound that no
    // matching fetch has answered yet, one report per (name, tag).
    std::vector<std::pair<std::string, Conjunction>> hits;
    for (const Pending &p : pending) {
      if (e.timestamp - p.created <= bound)
        continue;
      Conjunction c{ConstraintAtom{0, true, DataValue::text(p.name)},
                    ConstraintAtom{1, true, DataValue::text(p.tag)}};
      std::string key = ParamConstraint::serialize_conjunction(c);
      bool dup = false;
      for (const auto &h : hits)
        dup = dup || h.first == key;
      if (!dup)
        hits.emplace_back(std::move(key), std::move(c));
    }
    std::sort(hits.begin(), hits.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });
    for (auto &[key, c] : hits)
      out.push_back(MatchReport{k, e.timestamp, std::move(c)});

    if (e.label == "fetch") {
      std::erase_if(pending, [&](const Pending &p) {
        return p.name == name && p.tag == tag;
      });
    } else {
      pending.push_back({name, tag, e.timestamp});
    }
  }
  return out;
}

} // namespace patmon
