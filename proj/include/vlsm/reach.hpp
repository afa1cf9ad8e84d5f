#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vlsm/machine.hpp"

namespace vlsm {

// Valid states and valid messages up to a depth, computed by the mutual
// fixpoint (round n+1 extends round n through constrained transitions whose
// inputs are already-valid messages). Both sets are monotone in depth and
// messages always contains the no-message slot.
struct ReachSet {
  size_t depth = 0;
  std::set<Value> states;
  std::set<OptionMessage> messages;

  bool has_message(const OptionMessage& m) const { return messages.count(m) > 0; }
  std::vector<Value> proper_messages() const;
  std::set<Value> proper_message_set() const;
};

// Candidate input messages each round are the valid messages so far plus the
// given universe (which must cover the initial messages for the result to be
// the exact fixpoint; a wider universe gives a relativized exploration).
ReachSet reach(const Vlsm& m, size_t depth, const std::vector<Value>& universe = {},
               const Limits& limits = {});

struct WitnessedMessage {
  bool valid = false;
  Trace witness;  // meaningful only when valid
};

// Is the message producible on a valid trace within the depth bound? The
// witness search is breadth-first by trace length, then lexicographic, so
// witnesses are reproducible across runs.
WitnessedMessage is_valid_message(const Vlsm& m, const OptionMessage& msg,
                                  size_t depth, const Limits& limits = {});

enum class TraceMode { Constrained, Valid };

struct CheckResult {
  bool ok = true;
  size_t fail_index = 0;  // step index, 1-based in reports
  std::string reason;

  static CheckResult pass() { return {}; }
  static CheckResult fail(size_t index, std::string why) {
    return {false, index, std::move(why)};
  }
};

// Constrained mode checks initiality, chaining, replayed transitions, and the
// validity constraint per step. Valid mode additionally requires every proper
// input to be a valid message within the depth bound.
CheckResult check_trace(const Vlsm& m, const Trace& tr, TraceMode mode,
                        size_t depth = 0, const Limits& limits = {});

// Same, with the valid-message set precomputed (proper messages only).
CheckResult check_trace_with(const Vlsm& m, const Trace& tr, TraceMode mode,
                             const std::set<Value>& valid_msgs);

// Trace-validity where inputs may also be messages output earlier in the same
// trace (used to verify constructed lifts without a deep global fixpoint).
CheckResult check_trace_self_seeded(const Vlsm& m, const Trace& tr,
                                    const std::set<Value>& valid_msgs);

struct TraceEnumOptions {
  size_t max_steps = 0;
  Limits limits;
  // When set, a candidate step is only explored if the filter accepts it;
  // runs before the constraint, so it can prune cheaply.
  std::function<bool(const Trace& prefix, const Value& label,
                     const OptionMessage& input)>
      step_filter;
};

// Enumerates valid traces (every prefix is visited, including the empty
// trace) in canonical depth-first order: inputs range over the given valid
// message set. The callback may return false to stop the whole enumeration.
void for_each_valid_trace(const Vlsm& m, const TraceEnumOptions& opts,
                          const std::set<Value>& valid_msgs,
                          const std::function<bool(const Trace&)>& fn);

// Enumerates constrained traces; proper inputs range over the given pool.
void for_each_constrained_trace(const Vlsm& m, const TraceEnumOptions& opts,
                                const std::vector<Value>& input_pool,
                                const std::function<bool(const Trace&)>& fn);

std::vector<Trace> collect_valid_traces(const Vlsm& m, size_t max_steps,
                                        const std::set<Value>& valid_msgs,
                                        const Limits& limits = {});

std::vector<Trace> collect_constrained_traces(const Vlsm& m, size_t max_steps,
                                              const std::vector<Value>& input_pool,
                                              const Limits& limits = {});

// Endpoints of constrained traces: the constrained states reachable within
// the depth bound over the given input pool.
std::set<Value> constrained_states(const Vlsm& m, size_t max_steps,
                                   const std::vector<Value>& input_pool,
                                   const Limits& limits = {});

// Same set, computed breadth-first over states rather than traces; preferable
// for compositions, where interleavings converge on shared states.
std::set<Value> constrained_reach(const Vlsm& m, size_t depth,
                                  const std::vector<Value>& input_pool,
                                  const Limits& limits = {});

std::set<Value> trace_set(const std::vector<Trace>& traces);

}  // namespace vlsm
