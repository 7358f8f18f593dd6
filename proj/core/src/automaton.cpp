#include "patmon/automaton.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace patmon {

int Automaton::signature_index(std::string_view name) const {
  for (std::size_t i = 0; i < signatures_.size(); ++i)
    if (signatures_[i].name == name)
      return static_cast<int>(i);
  return -1;
}

const std::vector<int> &Automaton::transitions_from(int location) const {
  return by_source_.at(static_cast<std::size_t>(location));
}

const std::vector<int> &Automaton::transitions_from(int location,
                                                    int signature) const {
  return by_source_sig_.at(static_cast<std::size_t>(location) *
                               signatures_.size() +
                           static_cast<std::size_t>(signature));
}

namespace {

// One operation on a silent edge of the intermediate graph.
struct EpsOp {
  enum class Kind { none, reset, check };
  Kind kind = Kind::none;
  int clock = 0;
  CmpOp cmp = CmpOp::gt;
  std::int64_t bound = 0;
};

struct EpsEdge {
  int to = 0;
  EpsOp op;
};

struct ConsumingEdge {
  int from = 0;
  int to = 0;
  const EventAtomExpr *atom = nullptr;
  std::shared_ptr<const Guard> guard; // aliases the atom's node
};

// Thompson-style graph with silent edges carrying clock operations.
struct Graph {
  std::vector<std::vector<EpsEdge>> eps;      // by source state
  std::vector<std::vector<int>> consuming_at; // edge ids by source state
  std::vector<ConsumingEdge> consuming;
  int num_clocks = 0;

  int fresh() {
    eps.emplace_back();
    consuming_at.emplace_back();
    return static_cast<int>(eps.size()) - 1;
  }

  void silent(int from, int to, EpsOp op = {}) {
    eps[from].push_back({to, op});
  }
};

struct Fragment {
  int entry = 0;
  int exit = 0;
};

Fragment build(Graph &g, const ExprPtr &e) {
  if (const auto *atom = std::get_if<EventAtomExpr>(&e->node)) {
    int entry = g.fresh();
    int exit = g.fresh();
    std::shared_ptr<const Guard> guard;
    if (atom->guard)
      guard = std::shared_ptr<const Guard>(e, &*atom->guard);
    g.consuming_at[entry].push_back(static_cast<int>(g.consuming.size()));
    g.consuming.push_back({entry, exit, atom, std::move(guard)});
    return {entry, exit};
  }
  if (const auto *seq = std::get_if<SeqExpr>(&e->node)) {
    Fragment all = build(g, seq->items[0]);
    for (std::size_t i = 1; i < seq->items.size(); ++i) {
      Fragment next = build(g, seq->items[i]);
      g.silent(all.exit, next.entry);
      all.exit = next.exit;
    }
    return all;
  }
  if (const auto *alt = std::get_if<OneOfExpr>(&e->node)) {
    int entry = g.fresh();
    int exit = g.fresh();
    for (const auto &b : alt->branches) {
      Fragment f = build(g, b);
      g.silent(entry, f.entry);
      g.silent(f.exit, exit);
    }
    return {entry, exit};
  }
  if (const auto *star = std::get_if<ZeroOrMoreExpr>(&e->node)) {
    int entry = g.fresh();
    int exit = g.fresh();
    Fragment f = build(g, star->child);
    g.silent(entry, f.entry);
    g.silent(entry, exit);
    g.silent(f.exit, f.entry);
    g.silent(f.exit, exit);
    return {entry, exit};
  }
  if (const auto *win = std::get_if<WithinExpr>(&e->node)) {
    int entry = g.fresh();
    int exit = g.fresh();
    Fragment f = build(g, win->child);
    int clock = g.num_clocks++;
    g.silent(entry, f.entry,
             {EpsOp::Kind::reset, clock, CmpOp::gt, 0});
    g.silent(f.exit, exit,
             {EpsOp::Kind::check, clock, win->cmp, win->bound});
    return {entry, exit};
  }
  throw compile_error("cannot compile an unresolved expression reference");
}

// Net effect of one silent path, all at a single instant: pending checks
// against pre-path clock values plus the set of clocks reset. A check of
// a clock already reset on the same path sees zero elapsed time and folds
// to a constant.
struct Summary {
  std::vector<ClockAtom> checks; // sorted
  std::vector<int> resets;       // sorted

  bool operator<(const Summary &o) const {
    auto key = [](const ClockAtom &a) {
      return std::tuple(a.clock, static_cast<int>(a.cmp), a.bound);
    };
    if (checks.size() != o.checks.size())
      return checks.size() < o.checks.size();
    for (std::size_t i = 0; i < checks.size(); ++i) {
      if (key(checks[i]) != key(o.checks[i]))
        return key(checks[i]) < key(o.checks[i]);
    }
    return resets < o.resets;
  }
};

// Applies one op to a path summary; false when the path dies.
bool apply(Summary &s, const EpsOp &op) {
  if (op.kind == EpsOp::Kind::none)
    return true;
  if (op.kind == EpsOp::Kind::reset) {
    auto it = std::lower_bound(s.resets.begin(), s.resets.end(), op.clock);
    if (it == s.resets.end() || *it != op.clock)
      s.resets.insert(it, op.clock);
    return true;
  }
  if (std::binary_search(s.resets.begin(), s.resets.end(), op.clock))
    return cmp_eval(0, op.cmp, op.bound); // elapsed 0 at the same instant
  ClockAtom atom{op.clock, op.cmp, op.bound};
  auto key = [](const ClockAtom &a) {
    return std::tuple(a.clock, static_cast<int>(a.cmp), a.bound);
  };
  auto it = std::lower_bound(s.checks.begin(), s.checks.end(), atom,
                             [&](const ClockAtom &a, const ClockAtom &b) {
                               return key(a) < key(b);
                             });
  if (it == s.checks.end() || key(*it) != key(atom))
    s.checks.insert(it, atom);
  return true;
}

// Every (state, summary) pair reachable from `start` over silent edges.
// Silent cycles (from stars with nullable bodies) are handled by the
// visited set; summaries converge because ops at one instant are
// idempotent.
std::set<std::pair<int, Summary>> silent_closure(const Graph &g, int start,
                                                 Summary initial) {
  std::set<std::pair<int, Summary>> visited;
  std::deque<std::pair<int, Summary>> work;
  visited.insert({start, initial});
  work.push_back({start, std::move(initial)});
  while (!work.empty()) {
    auto [state, summary] = std::move(work.front());
    work.pop_front();
    for (const EpsEdge &e : g.eps[state]) {
      Summary next = summary;
      if (!apply(next, e.op))
        continue;
      auto ins = visited.insert({e.to, next});
      if (ins.second)
        work.push_back({e.to, std::move(next)});
    }
  }
  return visited;
}

void reject_unsupported(const SpecAst &ast, const ExprPtr &e) {
  if (const auto *atom = std::get_if<EventAtomExpr>(&e->node)) {
    const auto &sig = ast.signatures.at(atom->sig_index);
    for (const auto &f : sig.fields) {
      if (f.type != DataValue::Kind::text)
        throw compile_error("field '" + f.name + "' of signature '" +
                            sig.name +
                            "': number fields are unsupported in this build");
    }
    if (atom->guard) {
      // ParamConstraint atoms relate one parameter to one literal, so a
      // guard relating two parameters has no symbolic encoding here.
      std::vector<const Guard *> stack{&*atom->guard};
      while (!stack.empty()) {
        const Guard *gd = stack.back();
        stack.pop_back();
        if (gd->kind == Guard::Kind::atom) {
          if (gd->atom->lhs.kind == GuardOperand::Kind::global &&
              gd->atom->rhs.kind == GuardOperand::Kind::global)
            throw compile_error(
                "guards comparing two variables are unsupported in this "
                "build");
        } else {
          for (const auto &c : gd->children)
            stack.push_back(&c);
        }
      }
    }
    return;
  }
  if (const auto *seq = std::get_if<SeqExpr>(&e->node)) {
    for (const auto &i : seq->items)
      reject_unsupported(ast, i);
  } else if (const auto *alt = std::get_if<OneOfExpr>(&e->node)) {
    for (const auto &b : alt->branches)
      reject_unsupported(ast, b);
  } else if (const auto *star = std::get_if<ZeroOrMoreExpr>(&e->node)) {
    reject_unsupported(ast, star->child);
  } else if (const auto *win = std::get_if<WithinExpr>(&e->node)) {
    reject_unsupported(ast, win->child);
  } else {
    throw compile_error("cannot compile an unresolved expression reference");
  }
}

std::string transition_key(const Transition &t) {
  std::ostringstream os;
  os << t.source << '|' << t.target << '|' << t.signature << '|';
  if (t.guard)
    os << guard_to_string(*t.guard);
  os << '|';
  for (const auto &c : t.clock_guard)
    os << 'c' << c.clock << cmp_text(c.cmp) << c.bound << ' ';
  os << '|';
  for (int r : t.clock_resets)
    os << r << ' ';
  return os.str();
}

} // namespace

Automaton compile(const ExprPtr &expr, const SpecAst &ast) {
  for (const auto &v : ast.vars) {
    if (v.type != DataValue::Kind::text)
      throw compile_error("variable '" + v.name +
                          "': number variables are unsupported in this build");
  }
  reject_unsupported(ast, expr);

  Graph g;
  Fragment frag = build(g, expr);

  Automaton a;
  a.num_clocks_ = g.num_clocks;
  for (const auto &v : ast.vars)
    a.globals_.push_back(v.name);
  a.signatures_ = ast.signatures;

  // Location ids are assigned in first-use order, initial first; the
  // accepting state gets one only if some transition reaches it.
  std::map<int, int> loc_of;
  std::vector<int> state_of{frag.entry};
  loc_of[frag.entry] = 0;
  auto location = [&](int state) {
    auto it = loc_of.find(state);
    if (it != loc_of.end())
      return it->second;
    int id = static_cast<int>(state_of.size());
    loc_of.emplace(state, id);
    state_of.push_back(state);
    return id;
  };

  std::set<std::string> seen;
  std::deque<int> work{0};
  std::set<int> queued{0};
  while (!work.empty()) {
    int source_loc = work.front();
    work.pop_front();
    int source_state = state_of[static_cast<std::size_t>(source_loc)];
    if (source_state == frag.exit)
      continue; // acceptance has no future

    // From the initial location the run may first cross silent edges; a
    // reset there binds to the first event consumed, and any check on
    // such a path is dominated by its reset and folds away.
    std::set<std::pair<int, Summary>> starts;
    if (source_loc == 0)
      starts = silent_closure(g, source_state, {});
    else
      starts.insert({source_state, {}});

    for (const auto &[state, prefix] : starts) {
      assert(prefix.checks.empty() &&
             "checks before the first event must fold");
      for (int edge_id : g.consuming_at[state]) {
        const ConsumingEdge &edge = g.consuming[edge_id];
        for (const auto &[end_state, summary] :
             silent_closure(g, edge.to, prefix)) {
          bool accepting = end_state == frag.exit;
          if (!accepting && g.consuming_at[end_state].empty())
            continue; // no future from here
          Transition t;
          t.source = source_loc;
          t.target = location(end_state);
          t.signature = edge.atom->sig_index;
          t.guard = edge.guard;
          t.clock_guard = summary.checks;
          t.clock_resets = summary.resets;
          if (!seen.insert(transition_key(t)).second)
            continue;
          int target = t.target;
          a.transitions_.push_back(std::move(t));
          if (!accepting && queued.insert(target).second)
            work.push_back(target);
        }
      }
    }
  }

  a.num_locations_ = static_cast<int>(state_of.size());
  auto acc = loc_of.find(frag.exit);
  a.accepting_ = acc == loc_of.end() ? -1 : acc->second;

  a.by_source_.assign(static_cast<std::size_t>(a.num_locations_), {});
  a.by_source_sig_.assign(static_cast<std::size_t>(a.num_locations_) *
                              a.signatures_.size(),
                          {});
  for (std::size_t i = 0; i < a.transitions_.size(); ++i) {
    const Transition &t = a.transitions_[i];
    a.by_source_[static_cast<std::size_t>(t.source)].push_back(
        static_cast<int>(i));
    a.by_source_sig_[static_cast<std::size_t>(t.source) *
                         a.signatures_.size() +
                     static_cast<std::size_t>(t.signature)]
        .push_back(static_cast<int>(i));
  }
  return a;
}

std::string describe(const Automaton &a) {
  std::ostringstream os;
  os << "locations: " << a.num_locations() << '\n';
  os << "initial: " << a.initial_location() << '\n';
  if (a.accepting_location() >= 0)
    os << "accepting: " << a.accepting_location() << '\n';
  else
    os << "accepting: none\n";
  os << "clocks: " << a.num_clocks() << '\n';
  os << "globals:";
  for (const auto &v : a.globals())
    os << ' ' << v;
  os << '\n';
  os << "signatures:";
  for (const auto &s : a.signatures())
    os << ' ' << s.name << '/' << s.fields.size();
  os << '\n';
  os << "transitions: " << a.transitions().size() << '\n';
  for (const auto &t : a.transitions()) {
    os << "  " << t.source << " --" << a.signatures()[t.signature].name;
    if (t.guard)
      os << '[' << guard_to_string(*t.guard) << ']';
    if (!t.clock_guard.empty()) {
      os << '[';
      for (std::size_t i = 0; i < t.clock_guard.size(); ++i) {
        if (i)
          os << " && ";
        os << 'c' << t.clock_guard[i].clock << ' '
           << cmp_text(t.clock_guard[i].cmp) << ' ' << t.clock_guard[i].bound;
      }
      os << ']';
    }
    if (!t.clock_resets.empty()) {
      os << "{reset";
      for (int r : t.clock_resets)
        os << " c" << r;
      os << '}';
    }
    os << "--> " << t.target << '\n';
  }
  return os.str();
}

} // namespace patmon
