// Timed data words and symbolic parameter constraints, shared by every
// other component. All types here are immutable after construction and
// safe to share across threads.

#pragma once

#include <cstdint>
#include <span>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace patmon {

class type_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Infinite-domain value carried by an event field or a constraint literal.
// The numeric variant is reserved; every shipped pipeline produces text.
// Text storage is immutable and shared between copies, so values flow
// from events into constraints without reallocating.
class DataValue {
public:
  enum class Kind { text, number };

  DataValue() = default;
  static DataValue text(std::string v);
  static DataValue number(std::int64_t v);

  Kind kind() const { return kind_; }
  const std::string &as_text() const;
  std::int64_t as_number() const;

  // Exact equality within one variant; mixing variants is a type error,
  // never a silent false.
  bool equals(const DataValue &other) const;

  std::string to_string() const;

  // Total order used for canonical forms only. Never throws.
  static int compare(const DataValue &a, const DataValue &b);

private:
  Kind kind_ = Kind::text;
  std::shared_ptr<const std::string> text_;
  std::int64_t number_ = 0;
};

// Deduplicates text values so that a log with a small vocabulary stores
// each distinct string once. Single-owner; not thread-safe.
class ValuePool {
public:
  DataValue text(std::string_view v);

private:
  std::vector<DataValue> values_;
};

struct Event {
  std::string label;
  std::vector<DataValue> fields;
  std::int64_t timestamp = 0;
};

// Timestamp-ordered event sequence. Equal timestamps keep log order.
class TimedDataWord {
public:
  TimedDataWord() = default;
  explicit TimedDataWord(std::vector<Event> events);

  // Throws std::invalid_argument when the new timestamp decreases.
  void append(Event e);

  const std::vector<Event> &events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const Event &operator[](std::size_t i) const { return events_[i]; }

private:
  std::vector<Event> events_;
};

// One ==/!= atom over a global parameter, identified by declaration index.
struct ConstraintAtom {
  int param = 0;
  bool equal = true;
  DataValue value;
};

bool operator==(const ConstraintAtom &a, const ConstraintAtom &b);

// Atoms sorted by (param, value, op), with atoms implied by an equality on
// the same parameter removed. An empty conjunction is trivially true.
using Conjunction = std::vector<ConstraintAtom>;

// Satisfiable parameter valuation sets in disjunctive normal form.
// Unsatisfiable conjunctions are pruned on construction, so a constraint
// with no disjuncts is unsatisfiable and one with a single empty
// conjunction is trivially true. Disjuncts are kept in canonical order so
// equal constraints serialize identically. Values are immutable and
// copies share storage.
class ParamConstraint {
public:
  ParamConstraint() = default; // bottom

  static ParamConstraint top();
  static ParamConstraint bottom();
  static ParamConstraint atom(int param, bool equal, DataValue value);
  static ParamConstraint of(std::vector<Conjunction> disjuncts);

  bool is_satisfiable() const { return disjuncts_ && !disjuncts_->empty(); }
  bool is_top() const;
  const std::vector<Conjunction> &disjuncts() const;

  ParamConstraint or_with(const ParamConstraint &other) const;

  // True when the concrete assignment (indexed by parameter) satisfies
  // some disjunct.
  bool evaluate(std::span<const DataValue> valuation) const;

  // Canonical text; two semantically normalized constraints compare equal
  // iff their serializations do.
  std::string serialize() const;

  // `x<i> == <value>` / `x<i> != <value>` tokens joined by tab, where x<i>
  // numbers global variables in declaration order.
  static std::string serialize_conjunction(const Conjunction &c);

  friend ParamConstraint conjoin(const ParamConstraint &a,
                                 const ParamConstraint &b);
  friend bool operator==(const ParamConstraint &a, const ParamConstraint &b);

private:
  std::shared_ptr<const std::vector<Conjunction>> disjuncts_;
};

ParamConstraint conjoin(const ParamConstraint &a, const ParamConstraint &b);

bool is_satisfiable(const ParamConstraint &c);

} // namespace patmon
