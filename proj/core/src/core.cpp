#include "patmon/core.hpp"

#include <algorithm>
#include <optional>

namespace patmon {

namespace {

const std::string &empty_text() {
  static const std::string empty;
  return empty;
}

} // namespace

DataValue DataValue::text(std::string v) {
  DataValue d;
  d.kind_ = Kind::text;
  if (!v.empty())
    d.text_ = std::make_shared<const std::string>(std::move(v));
  return d;
}

DataValue DataValue::number(std::int64_t v) {
  DataValue d;
  d.kind_ = Kind::number;
  d.number_ = v;
  return d;
}

const std::string &DataValue::as_text() const {
  if (kind_ != Kind::text)
    throw type_error("data value is not text");
  return text_ ? *text_ : empty_text();
}

std::int64_t DataValue::as_number() const {
  if (kind_ != Kind::number)
    throw type_error("data value is not a number");
  return number_;
}

bool DataValue::equals(const DataValue &other) const {
  if (kind_ != other.kind_)
    throw type_error("cannot compare text with number");
  if (kind_ == Kind::text)
    return text_ == other.text_ || as_text() == other.as_text();
  return number_ == other.number_;
}

std::string DataValue::to_string() const {
  if (kind_ == Kind::text)
    return as_text();
  return std::to_string(number_);
}

int DataValue::compare(const DataValue &a, const DataValue &b) {
  if (a.kind_ != b.kind_)
    return a.kind_ < b.kind_ ? -1 : 1;
  if (a.kind_ == Kind::text) {
    if (a.text_ == b.text_)
      return 0;
    return a.as_text().compare(b.as_text());
  }
  if (a.number_ != b.number_)
    return a.number_ < b.number_ ? -1 : 1;
  return 0;
}

DataValue ValuePool::text(std::string_view v) {
  for (const DataValue &d : values_) {
    if (d.as_text() == v)
      return d;
  }
  values_.push_back(DataValue::text(std::string(v)));
  return values_.back();
}

TimedDataWord::TimedDataWord(std::vector<Event> events) {
  events_.reserve(events.size());
  for (auto &e : events)
    append(std::move(e));
}

void TimedDataWord::append(Event e) {
  if (e.timestamp < 0)
    throw std::invalid_argument("event timestamp must be non-negative");
  if (!events_.empty() && e.timestamp < events_.back().timestamp)
    throw std::invalid_argument("event timestamps must be non-decreasing");
  events_.push_back(std::move(e));
}

bool operator==(const ConstraintAtom &a, const ConstraintAtom &b) {
  return a.param == b.param && a.equal == b.equal &&
         DataValue::compare(a.value, b.value) == 0;
}

namespace {

// (param, value, ==-before-!=); ties broken so sorting is a total order.
bool atom_less(const ConstraintAtom &a, const ConstraintAtom &b) {
  if (a.param != b.param)
    return a.param < b.param;
  int c = DataValue::compare(a.value, b.value);
  if (c != 0)
    return c < 0;
  return a.equal && !b.equal;
}

bool conjunction_less(const Conjunction &a, const Conjunction &b) {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(),
      [](const ConstraintAtom &x, const ConstraintAtom &y) {
        return atom_less(x, y);
      });
}

bool conjunction_eq(const Conjunction &a, const Conjunction &b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

// sat(a) subset-of sat(b), decided per parameter: a canonical conjunction
// pins a parameter to one value or excludes finitely many, so b's
// equality atoms must appear verbatim in a, and b's disequalities must be
// repeated or implied by an equality on a different value.
bool implies(const Conjunction &a, const Conjunction &b) {
  for (const auto &want : b) {
    bool ok = false;
    for (const auto &have : a) {
      if (have.param != want.param)
        continue;
      if (want.equal) {
        ok = have.equal && have.value.equals(want.value);
      } else if (have.equal) {
        ok = !have.value.equals(want.value);
      } else {
        ok = have.value.equals(want.value);
      }
      if (ok)
        break;
    }
    if (!ok)
      return false;
  }
  return true;
}

// Normalizes one conjunction; nullopt means unsatisfiable. Equality and
// disequality atoms over an infinite domain are satisfiable exactly when
// no parameter carries two distinct equalities or an equality contradicted
// by a disequality. Disequalities implied by an equality are dropped so
// that equal constraints share one spelling.
std::optional<Conjunction> normalize(Conjunction c) {
  std::sort(c.begin(), c.end(), atom_less);
  c.erase(std::unique(c.begin(), c.end(),
                      [](const ConstraintAtom &a, const ConstraintAtom &b) {
                        return a == b;
                      }),
          c.end());

  Conjunction out;
  out.reserve(c.size());
  std::size_t i = 0;
  while (i < c.size()) {
    std::size_t j = i;
    while (j < c.size() && c[j].param == c[i].param)
      ++j;

    const ConstraintAtom *eq = nullptr;
    for (std::size_t k = i; k < j; ++k) {
      if (!c[k].equal)
        continue;
      if (eq && !eq->value.equals(c[k].value))
        return std::nullopt; // two distinct equalities
      eq = &c[k];
    }
    if (eq) {
      for (std::size_t k = i; k < j; ++k) {
        if (!c[k].equal && c[k].value.equals(eq->value))
          return std::nullopt; // x == v contradicted by x != v
      }
      out.push_back(*eq);
    } else {
      for (std::size_t k = i; k < j; ++k)
        out.push_back(c[k]);
    }
    i = j;
  }
  return out;
}

std::vector<Conjunction> canonicalize(std::vector<Conjunction> raw) {
  std::vector<Conjunction> kept;
  kept.reserve(raw.size());
  for (auto &c : raw) {
    if (auto n = normalize(std::move(c)))
      kept.push_back(std::move(*n));
  }
  std::sort(kept.begin(), kept.end(), conjunction_less);
  kept.erase(std::unique(kept.begin(), kept.end(), conjunction_eq),
             kept.end());

  // Drop disjuncts implied by a sibling. Canonical conjunctions with the
  // same satisfying set are spelled identically, so after dedup the
  // implication relation is a strict partial order and the surviving set
  // does not depend on the order the conjunctions were produced in.
  std::vector<bool> redundant(kept.size(), false);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j = 0; j < kept.size(); ++j) {
      if (i == j || redundant[j])
        continue;
      if (implies(kept[i], kept[j])) {
        redundant[i] = true;
        break;
      }
    }
  }
  std::vector<Conjunction> out;
  out.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (!redundant[i])
      out.push_back(std::move(kept[i]));
  }
  return out;
}

} // namespace

// a's satisfying set is contained in b's: every disjunct of a implies
// some disjunct of b. Sufficient, not complete; used as a fast path.
bool dnf_implies(const std::vector<Conjunction> &a,
                 const std::vector<Conjunction> &b) {
  for (const auto &da : a) {
    bool covered = false;
    for (const auto &db : b) {
      if (implies(da, db)) {
        covered = true;
        break;
      }
    }
    if (!covered)
      return false;
  }
  return true;
}

const std::vector<Conjunction> &empty_disjuncts() {
  static const std::vector<Conjunction> empty;
  return empty;
}

ParamConstraint ParamConstraint::top() {
  static const ParamConstraint t = [] {
    ParamConstraint c;
    c.disjuncts_ =
        std::make_shared<const std::vector<Conjunction>>(1, Conjunction{});
    return c;
  }();
  return t;
}

ParamConstraint ParamConstraint::bottom() { return {}; }

ParamConstraint ParamConstraint::atom(int param, bool equal, DataValue value) {
  ParamConstraint c;
  std::vector<Conjunction> d;
  d.push_back({ConstraintAtom{param, equal, std::move(value)}});
  c.disjuncts_ = std::make_shared<const std::vector<Conjunction>>(std::move(d));
  return c;
}

ParamConstraint ParamConstraint::of(std::vector<Conjunction> disjuncts) {
  ParamConstraint c;
  std::vector<Conjunction> canon = canonicalize(std::move(disjuncts));
  if (!canon.empty())
    c.disjuncts_ =
        std::make_shared<const std::vector<Conjunction>>(std::move(canon));
  return c;
}

const std::vector<Conjunction> &ParamConstraint::disjuncts() const {
  return disjuncts_ ? *disjuncts_ : empty_disjuncts();
}

bool ParamConstraint::is_top() const {
  return disjuncts_ && disjuncts_->size() == 1 && (*disjuncts_)[0].empty();
}

ParamConstraint ParamConstraint::or_with(const ParamConstraint &other) const {
  if (!is_satisfiable())
    return other;
  if (!other.is_satisfiable())
    return *this;
  if (dnf_implies(other.disjuncts(), disjuncts()))
    return *this;
  if (dnf_implies(disjuncts(), other.disjuncts()))
    return other;
  std::vector<Conjunction> all = disjuncts();
  all.insert(all.end(), other.disjuncts().begin(), other.disjuncts().end());
  return of(std::move(all));
}

bool ParamConstraint::evaluate(std::span<const DataValue> valuation) const {
  for (const auto &conj : disjuncts()) {
    bool ok = true;
    for (const auto &atom : conj) {
      if (atom.param < 0 || static_cast<std::size_t>(atom.param) >=
                                valuation.size())
        throw std::out_of_range("valuation does not cover parameter");
      bool eq = valuation[atom.param].equals(atom.value);
      if (eq != atom.equal) {
        ok = false;
        break;
      }
    }
    if (ok)
      return true;
  }
  return false;
}

std::string ParamConstraint::serialize_conjunction(const Conjunction &c) {
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i)
      out += '\t';
    out += 'x';
    out += std::to_string(c[i].param);
    out += c[i].equal ? " == " : " != ";
    out += c[i].value.to_string();
  }
  return out;
}

std::string ParamConstraint::serialize() const {
  const auto &d = disjuncts();
  if (d.empty())
    return "false";
  std::string out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i)
      out += " || ";
    if (d[i].empty())
      out += "true";
    else
      out += serialize_conjunction(d[i]);
  }
  return out;
}

namespace {

// Exact unsatisfiability test for the union of two canonical
// conjunctions: a clash is always a cross pair on one parameter, either
// two distinct equalities or an equality against its own disequality.
bool union_unsat(const Conjunction &a, const Conjunction &b) {
  for (const auto &x : a) {
    for (const auto &y : b) {
      if (x.param != y.param)
        continue;
      if (x.equal && y.equal && !x.value.equals(y.value))
        return true;
      if (x.equal != y.equal && x.value.equals(y.value))
        return true;
    }
  }
  return false;
}

} // namespace

ParamConstraint conjoin(const ParamConstraint &a, const ParamConstraint &b) {
  if (a.is_top() || !b.is_satisfiable())
    return b;
  if (b.is_top() || !a.is_satisfiable())
    return a;
  // When one side already entails the other the product collapses onto
  // the stronger side, with the same canonical form the full product
  // would reach.
  if (dnf_implies(a.disjuncts(), b.disjuncts()))
    return a;
  if (dnf_implies(b.disjuncts(), a.disjuncts()))
    return b;
  std::vector<Conjunction> raw;
  for (const auto &ca : a.disjuncts()) {
    for (const auto &cb : b.disjuncts()) {
      if (union_unsat(ca, cb))
        continue;
      Conjunction merged = ca;
      merged.insert(merged.end(), cb.begin(), cb.end());
      raw.push_back(std::move(merged));
    }
  }
  if (raw.empty())
    return ParamConstraint::bottom();
  return ParamConstraint::of(std::move(raw));
}

bool operator==(const ParamConstraint &a, const ParamConstraint &b) {
  if (a.disjuncts_ == b.disjuncts_)
    return true;
  const auto &da = a.disjuncts();
  const auto &db = b.disjuncts();
  if (da.size() != db.size())
    return false;
  for (std::size_t i = 0; i < da.size(); ++i) {
    if (!conjunction_eq(da[i], db[i]))
      return false;
  }
  return true;
}

bool is_satisfiable(const ParamConstraint &c) { return c.is_satisfiable(); }

} // namespace patmon
