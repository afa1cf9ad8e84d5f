#pragma once

#include <optional>
#include <set>

#include "vlsm/equiv_models.hpp"

namespace vlsm {

// Single-state machine whose labels are messages: a transition ignores the
// input and emits the label, and only messages attributed to the component's
// own address may be emitted. The label universe is a finite message pool
// supplied by the caller (bounded stand-in for "any message").
Vlsm byzantine_component(int64_t address, std::vector<Value> universe,
                         const Oracles& message_oracles);

// Composition replacing the components in B by Byzantine components; honest
// receives must have been sent by the sender's part (which, for a Byzantine
// sender, holds by attribution), Byzantine parts may receive anything.
Vlsm byzantine_composition(std::vector<Vlsm> components, const std::set<int64_t>& B,
                           const std::vector<Value>& universe);

// Valid traces of the induced projection of an honest component, canonically
// ordered.
std::vector<Trace> exposed_traces(const Vlsm& composition, size_t j, size_t depth,
                                  const Limits& limits = {});

struct ByzantineCheckOptions {
  Limits limits;
  // Structural probe messages for the validator precondition; the gate must
  // catch components whose constraints accept junk no composition can emit.
  std::vector<Value> probes;
};

// Fixed-set Byzantine/equivocation equivalence at a depth: for every honest
// component, the traces exposed to B-fixed Byzantine behaviour equal the
// traces exposed to B-fixed equivocation behaviour. Precondition gate: every
// honest component must be a validator for the free composition (probed).
EquivalenceVerdict check_fixed_byzantine(const std::vector<Vlsm>& components,
                                         const std::set<int64_t>& B, size_t depth,
                                         const ByzantineCheckOptions& opts = {});

// t-limited version: the union over all B of weight < t of honest projections
// of Byzantine-composition traces equals the non-equivocating projections of
// the t-limited message-equivocation model. Precondition gate: every
// component must be a validator for the t-limited message model.
EquivalenceVerdict check_limited_byzantine(const std::vector<Vlsm>& components,
                                           const WeightMap& w, size_t depth,
                                           const ByzantineCheckOptions& opts = {});

// The validator notion of the t-limited theorem: whenever a component's own
// constraint accepts an input, the input embeds in a valid annotated state of
// weight below the threshold. Returns a description of the first flaw, if
// any (bounded search).
std::optional<std::string> t_limited_validator_flaw(
    const std::vector<Vlsm>& components, const WeightMap& w, size_t depth,
    const ByzantineCheckOptions& opts = {});

// First constrained component trace within the depth whose receives violate
// the full-node condition, if one exists over the pool.
std::optional<Trace> find_full_node_violation(const Vlsm& component, size_t depth,
                                              const std::vector<Value>& pool,
                                              const Limits& limits = {});

}  // namespace vlsm
