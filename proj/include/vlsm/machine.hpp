#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vlsm/value.hpp"

namespace vlsm {

// One transition: (post, output) must equal transition(label, pre, input).
struct TransitionRecord {
  Value label;
  Value pre;
  OptionMessage input;
  Value post;
  OptionMessage output;
};

// A run from an initial state. Records full transitions so that checking is
// local and replay-verifiable.
struct Trace {
  Value start;
  std::vector<TransitionRecord> steps;

  const Value& final_state() const { return steps.empty() ? start : steps.back().post; }
  size_t length() const { return steps.size(); }

  // Canonical encoding for ordered sets and exact trace-set comparison.
  Value encode() const;
};

struct StepResult {
  Value post;
  OptionMessage output;
};

// Per-machine oracle bundle. sender/dependencies describe messages;
// has_been_sent/has_been_received/observed_messages describe what a state of
// this machine has witnessed. All optional; the equivocation machinery
// requires them.
struct Oracles {
  std::function<Value(const Value& msg)> sender;
  std::function<std::vector<Value>(const Value& msg)> dependencies;
  std::function<bool(const Value& state, const Value& msg)> has_been_sent;
  std::function<bool(const Value& state, const Value& msg)> has_been_received;
  // Finite enumeration of the messages directly observed in a state.
  std::function<std::vector<Value>(const Value& state)> observed_messages;
};

// A validating labelled state transition and message production system.
// The transition function is total; the constraint filters its inputs.
// State and message domains may be unbounded, so instantiators supply
// decidable predicates plus finite enumerators; all reachability in this
// library is depth- and cap-bounded.
struct Vlsm {
  std::string name;

  std::vector<Value> initial_states;
  std::function<bool(const Value& state)> is_initial_state;
  std::vector<Value> initial_messages;

  std::function<bool(const Value& label)> is_label;
  // Candidate labels usable from a given state (finite per state).
  std::function<std::vector<Value>(const Value& state)> enabled_labels;

  std::function<StepResult(const Value& label, const Value& state,
                           const OptionMessage& input)>
      transition;
  std::function<bool(const Value& label, const Value& state,
                     const OptionMessage& input)>
      constraint;

  Oracles oracles;

  // Optional capabilities used by trace extraction and lifting.
  // state_to_trace: the unique/chosen run reaching a state of this machine.
  std::function<std::optional<Trace>(const Value& state)> state_to_trace;
  // emission_recipe: a run of this machine, from an initial state, whose last
  // step outputs the given message. Used for targeted validity witnesses and
  // for replaying emissions on equivocator copies.
  std::function<std::optional<Trace>(const Value& msg)> emission_recipe;

  // Components, in order, when this machine is a composition.
  std::vector<Vlsm> parts;
};

// Enumeration budget. Exceeding it raises ResourceLimitError naming the cap.
struct Limits {
  size_t max_visited = 1'000'000;
};

class ResourceLimitError : public std::runtime_error {
 public:
  ResourceLimitError(std::string cap_name, size_t cap)
      : std::runtime_error("resource cap '" + cap_name + "' exceeded (" +
                           std::to_string(cap) + ")"),
        cap_name(std::move(cap_name)),
        cap(cap) {}
  std::string cap_name;
  size_t cap;
};

class ExtractionError : public std::runtime_error {
 public:
  ExtractionError(size_t index, const std::string& what)
      : std::runtime_error("extraction failed at observation " +
                           std::to_string(index) + ": " + what),
        index(index) {}
  size_t index;
};

// tau(label, state, input), with a domain check on the label.
StepResult apply(const Vlsm& m, const Value& label, const Value& state,
                 const OptionMessage& input);

// beta(label, state, input); false outside the label set.
bool is_constrained(const Vlsm& m, const Value& label, const Value& state,
                    const OptionMessage& input);

}  // namespace vlsm
