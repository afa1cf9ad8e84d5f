#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>

#include "vlsm/machine.hpp"
#include "vlsm/reach.hpp"

namespace vlsm {

// Composite states are tuples (encoded as lists) of component states;
// composite labels are pairs (component index, inner label), 1-based.
Value composite_state(std::vector<Value> parts);
const Value& composite_part(const Value& state, size_t index1);
Value with_composite_part(const Value& state, size_t index1, Value part);
Value composite_label(size_t index1, Value inner);
size_t label_component(const Value& label);
const Value& label_inner(const Value& label);

using CompositionConstraint =
    std::function<bool(const Value& label, const Value& state, const OptionMessage&)>;

// Product states, disjoint-union labels, union initial messages,
// component-wise transition and constraint guided by labels. All components
// must share the message domain.
Vlsm free_compose(std::vector<Vlsm> components, const std::string& name = "");

// Same machine with the validity constraint strengthened by the composition
// constraint.
Vlsm constrain(Vlsm composite, CompositionConstraint phi,
               const std::string& name = "");

// Keeps the steps of component j, in order, mapped to component transitions.
Trace project_trace(const Trace& composite_trace, size_t j);

// Component j with its initial messages replaced by the valid messages of the
// composition, bounded at the given depth.
Vlsm induced_projection(const Vlsm& composite, size_t j, size_t depth,
                        const Limits& limits = {});

struct ValidatorCounterexample {
  Value state;
  Value label;
  OptionMessage input;
};

struct LiftWitness {
  Value component_state;
  Value label;
  OptionMessage input;
  Trace composite_witness;  // valid composite trace whose last step is the lift
};

struct ValidatorVerdict {
  bool confirmed = false;
  size_t depth = 0;
  std::optional<ValidatorCounterexample> counterexample;
  std::vector<LiftWitness> witnesses;  // populated when requested
  size_t unwitnessed = 0;  // lifts found only through the fallback state index
};

struct ValidatorOptions {
  // Extra candidate input messages beyond the composition's valid messages;
  // lets callers probe junk that the component's own constraint might accept.
  std::vector<Value> probes;
  bool collect_witnesses = false;
  Limits limits;
};

// Checks that every constrained transition from an enumerated constrained
// state of component j can be lifted to a valid transition of the
// composition. Bounded: component states come from depth-bounded constrained
// traces over (valid messages + probes); lifts are searched via solo
// embeddings and the composition's reach sets.
ValidatorVerdict is_validator(const Vlsm& composite, size_t j, size_t depth,
                              const ValidatorOptions& opts = {});

// Component j re-equipped with the induced-validator constraint: the input
// must be a valid message of the composition and some valid composite state
// with matching j-th part must admit the transition. Bounded by depth.
Vlsm induced_validator(const Vlsm& composite, size_t j, size_t depth,
                       const Limits& limits = {});

// Shared helper: can `msg` be emitted by component j embedded alone in the
// composition (all other parts idle at their initial states), with every
// input recursively valid? Returns the solo composite trace on success.
class SoloEmissionIndex {
 public:
  SoloEmissionIndex(const Vlsm& composite, size_t depth, const Limits& limits = {});

  // Valid-message check: reach-set membership first, then recipe replay.
  bool message_valid(const Value& msg);
  std::optional<Trace> solo_witness(const Value& msg);

  const ReachSet& reach_set() const { return reach_; }

 private:
  const Vlsm& composite_;
  size_t depth_;
  Limits limits_;
  ReachSet reach_;
  std::map<Value, bool> memo_;
  std::map<Value, Trace> witness_memo_;
  bool emit_check(const Value& msg, size_t recursion_guard);
};

}  // namespace vlsm
