#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "vlsm/machine.hpp"
#include "vlsm/reach.hpp"

namespace vlsm {

// Transitive closure of the dependency relation. Throws on a dependency
// cycle (the relation is assumed well-founded).
bool happens_before(const Vlsm& m, const Value& m1, const Value& m2);

// Same sender, neither observable in the other, and distinct.
bool incomparable(const Vlsm& m, const Value& m1, const Value& m2);

bool directly_observed(const Vlsm& m, const Value& state, const Value& msg);
bool indirectly_observed(const Vlsm& m, const Value& state, const Value& msg);

// All messages indirectly observed in a state: the directly observed ones
// plus their dependency closure.
std::vector<Value> observed_closure(const Vlsm& m, const Value& state);

struct EquivocationReport {
  enum class Scope { Local, Global };
  Scope scope = Scope::Local;
  std::set<Value> equivocators;  // addresses
  // Local witnesses are incomparable same-sender pairs; global witnesses are
  // observed-but-never-sent messages.
  std::map<Value, std::pair<Value, Value>> local_witnesses;
  std::map<Value, Value> global_witnesses;

  bool empty() const { return equivocators.empty(); }
};

// Senders with a pair of indirectly observed incomparable messages in the
// component state.
EquivocationReport local_equivocators(const Vlsm& component, const Value& state);

// Senders with an indirectly observed message that no part of the composite
// state has sent.
EquivocationReport global_equivocators(const Vlsm& composite, const Value& sigma);

// Variant that only considers directly observed messages (the full-node
// simplification).
EquivocationReport local_equivocators_direct(const Vlsm& component, const Value& state);
EquivocationReport global_equivocators_direct(const Vlsm& composite, const Value& sigma);

// Ok iff every receive step's dependencies were already (indirectly) observed
// by the receiving component before the step. Works on component traces and
// on composite traces (where the receiver is the labelled part).
CheckResult check_full_node(const Vlsm& m, const Trace& trace);

// A constrained trace reaching sigma along which the set of globally
// evidenced equivocators grows monotonically and stays inside the final set.
// Greedy dependency-aware replay of the per-component extracted traces;
// requires parts with state_to_trace and a constraint whose enabledness is
// monotone under extra earlier sends (as in the sent-in-trace models).
Trace minimal_equivocation_trace(const Vlsm& composite, const Value& sigma);

}  // namespace vlsm
