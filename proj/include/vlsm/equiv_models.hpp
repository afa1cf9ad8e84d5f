#pragma once

#include <optional>
#include <set>

#include "vlsm/compose.hpp"
#include "vlsm/umo.hpp"

namespace vlsm {

// Equivocator labels pair a copy index with an action: an inner label, a
// duplication of the chosen copy, or the spawn of a fresh machine.
Value equivocator_label_inner(size_t copy_index, Value inner);
Value equivocator_label_duplicate(size_t copy_index);
Value equivocator_label_new_machine(size_t copy_index, Value initial);
bool equivocator_action_is_inner(const Value& action);

// The list-of-copies transform: Inner acts on the chosen copy, Duplicate
// inserts a copy of it right after it, NewMachine inserts an initial state
// right after the chosen position. A message counts as sent if some copy
// sent it.
Vlsm equivocating(const Vlsm& component);

// Composition in which the components in E are replaced by their
// equivocating versions and receives must have been sent in the current
// trace. extra_phi, when given, further constrains transitions; it is
// evaluated existentially over copy selections of the equivocating parts
// (the selection pins the acting copy).
Vlsm state_equiv_fixed(std::vector<Vlsm> components, const std::set<int64_t>& E,
                       CompositionConstraint extra_phi = nullptr);

// Composition in which receives must have been sent in the current trace
// unless the message's sender is an allowed equivocator.
Vlsm message_equiv_fixed(std::vector<Vlsm> components, const std::set<int64_t>& E);

// The no-message-equivocation composition (all receives sent in trace).
Vlsm no_equivocation_composition(std::vector<Vlsm> components);

// Keep first copies of equivocating parts.
Value state_reduct(const Value& gamma_state, const std::set<int64_t>& E, size_t n);

// Keep honest steps and inner steps of the first copies, mapped onto the
// plain composition.
Trace trace_reduct(const Trace& state_model_trace, const std::set<int64_t>& E,
                   size_t n);

struct LiftOutcome {
  std::optional<Trace> trace;
  // Set when lifting fails: the input-step index (1-based) and the message
  // whose emission could not be scheduled.
  size_t fail_step = 0;
  std::string reason;

  bool ok() const { return trace.has_value(); }
};

// Rebuilds a state-equivocation trace from a message-equivocation trace:
// whenever a not-yet-sent message is received, its dependency closure and
// then the message itself are emitted on fresh copies of their senders'
// equivocators. The reduct of the result equals the input. Fails when a
// needed emission belongs to a component outside E.
LiftOutcome lift_trace(const Trace& message_model_trace,
                       const std::vector<Vlsm>& components,
                       const std::set<int64_t>& E, const Vlsm& state_model);

// t-limited models: every component may equivocate, but the weight of the
// components with more than one copy (resp. of the recorded equivocating
// senders) must stay strictly below the threshold.
Vlsm state_equiv_limited(std::vector<Vlsm> components, const WeightMap& w);
Vlsm message_equiv_limited(std::vector<Vlsm> components, const WeightMap& w);

// Annotated states of the t-limited message model.
Value annotated_state(Value sigma, const std::set<int64_t>& eqv);
const Value& annotated_base(const Value& s);
std::set<int64_t> annotated_eqv(const Value& s);

// Re-derives the annotation along a plain composite trace (the reduct side
// of the t-limited equivalence).
Trace annotate_trace(const Vlsm& annotated_machine, const Trace& plain);

// Drops the annotation.
Trace deannotate_trace(const Trace& annotated);

// Embeddings between the fixed-set and t-limited state models: honest steps
// become first-copy steps of a singleton equivocator and back.
Trace embed_fixed_to_limited(const Trace& fixed_trace, const std::set<int64_t>& E,
                             size_t n);
std::optional<Trace> restrict_limited_to_fixed(const Trace& limited_trace,
                                               const std::set<int64_t>& E, size_t n);

struct EquivalenceVerdict {
  enum class Status { Confirmed, Counterexample, PreconditionFailed };
  Status status = Status::Confirmed;
  std::string detail;
  std::optional<Trace> witness;

  bool confirmed() const { return status == Status::Confirmed; }
};

struct EquivalenceOptions {
  Limits limits;
  // Restrict both sides to traces whose receives satisfy the full-node
  // condition; the lifting theorems assume it and the observer components
  // outside ELMO do not enforce it themselves.
  bool full_node_filter = true;
};

// Fixed-set equivalence at a depth: trace reducts of the state-equivocation
// model against valid traces of the message-equivocation model, with
// lift_trace providing the reverse direction witnesses.
EquivalenceVerdict check_fixed_set_equivalence(const std::vector<Vlsm>& components,
                                               const std::set<int64_t>& E,
                                               size_t depth,
                                               const EquivalenceOptions& opts = {});

// t-limited equivalence at a depth: reducts of the t-limited state model are
// valid annotated traces, and annotated traces lift through the fixed-set
// bridge.
EquivalenceVerdict check_limited_equivalence(const std::vector<Vlsm>& components,
                                             const WeightMap& w, size_t depth,
                                             const EquivalenceOptions& opts = {});

}  // namespace vlsm
