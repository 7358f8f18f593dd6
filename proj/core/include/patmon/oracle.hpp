// Brute-force references used to validate the monitor. Both checkers are
// written against the matching semantics directly and share nothing with
// the automaton pipeline beyond core types. Not for production use.

#pragma once

#include "patmon/monitor.hpp"
#include "patmon/specdsl.hpp"

#include <set>
#include <span>

namespace patmon {

// Exhaustive recursive-descent matching of a resolved expression under a
// concrete assignment of the global variables. Returns the 0-based end
// indices of every accepted non-empty prefix. Exponential; |w| <= 30.
std::set<std::size_t> naive_match(const ExprPtr &expr, const TimedDataWord &w,
                                  std::span<const DataValue> valuation);

// Direct checker for the create->fetch latency property: reports
// (k, {x0==name, x1==tag}) iff some earlier create(name, tag) is older
// than `bound` seconds at event k and no matching fetch arrived in
// between. Requires create/fetch events with two text fields.
std::vector<MatchReport> latency_check(const TimedDataWord &w,
                                       std::int64_t bound);

} // namespace patmon
