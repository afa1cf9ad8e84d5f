#include "vlsm/reach.hpp"

#include <algorithm>
#include <deque>

namespace vlsm {

std::vector<Value> ReachSet::proper_messages() const {
  std::vector<Value> out;
  for (const auto& m : messages) {
    if (m.is_proper()) out.push_back(m.message());
  }
  return out;
}

std::set<Value> ReachSet::proper_message_set() const {
  std::set<Value> out;
  for (const auto& m : messages) {
    if (m.is_proper()) out.insert(m.message());
  }
  return out;
}

ReachSet reach(const Vlsm& m, size_t depth, const std::vector<Value>& universe,
               const Limits& limits) {
  ReachSet rs;
  rs.depth = depth;

  // The budget counts stored states and messages, the quantity that actually
  // explodes; pair visits are a time cost, not a space one.
  size_t stored = 0;
  auto charge = [&](size_t n) {
    stored += n;
    if (stored > limits.max_visited)
      throw ResourceLimitError("max_visited", limits.max_visited);
  };

  for (const auto& s : m.initial_states) {
    if (rs.states.insert(s).second) charge(1);
  }
  rs.messages.insert(OptionMessage::none());
  for (const auto& im : m.initial_messages) {
    if (rs.messages.insert(OptionMessage::proper(im)).second) charge(1);
  }

  // Candidate inputs: valid messages so far plus the supplied universe.
  std::set<OptionMessage> all_inputs = rs.messages;
  for (const auto& c : universe) all_inputs.insert(OptionMessage::proper(c));

  // Semi-naive iteration: each (state, input) pair is explored once, the
  // round either state or input first became available.
  std::vector<Value> old_states;
  std::vector<Value> frontier_states(rs.states.begin(), rs.states.end());
  std::vector<OptionMessage> frontier_inputs(all_inputs.begin(), all_inputs.end());

  for (size_t round = 0; round < depth; ++round) {
    std::set<Value> next_states;
    std::set<OptionMessage> next_messages;
    auto explore = [&](const Value& s, const OptionMessage& in) {
      for (const auto& l : m.enabled_labels(s)) {
        if (!m.constraint(l, s, in)) continue;
        StepResult st = m.transition(l, s, in);
        if (!rs.states.count(st.post)) next_states.insert(st.post);
        if (!rs.messages.count(st.output)) next_messages.insert(st.output);
      }
    };
    for (const auto& s : frontier_states) {
      for (const auto& in : all_inputs) explore(s, in);
    }
    for (const auto& s : old_states) {
      for (const auto& in : frontier_inputs) explore(s, in);
    }
    if (next_states.empty() && next_messages.empty()) break;

    old_states.insert(old_states.end(), frontier_states.begin(), frontier_states.end());
    frontier_states.assign(next_states.begin(), next_states.end());
    frontier_inputs.clear();
    for (const auto& s : next_states) {
      if (rs.states.insert(s).second) charge(1);
    }
    for (const auto& om : next_messages) {
      if (rs.messages.insert(om).second) charge(1);
      if (all_inputs.insert(om).second) frontier_inputs.push_back(om);
    }
  }
  return rs;
}

namespace {

struct StepChoice {
  Value label;
  OptionMessage input;
};

// Candidate (label, input) pairs from a state, canonically ordered.
std::vector<StepChoice> step_choices(const Vlsm& m, const Value& s,
                                     const std::vector<OptionMessage>& inputs) {
  std::vector<Value> labels = m.enabled_labels(s);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  std::vector<StepChoice> out;
  out.reserve(labels.size() * inputs.size());
  for (const auto& l : labels) {
    for (const auto& in : inputs) out.push_back({l, in});
  }
  return out;
}

std::vector<OptionMessage> sorted_inputs(const std::set<Value>& proper) {
  std::vector<OptionMessage> inputs;
  inputs.push_back(OptionMessage::none());
  for (const auto& v : proper) inputs.push_back(OptionMessage::proper(v));
  return inputs;
}

bool enumerate_traces(const Vlsm& m, const TraceEnumOptions& opts,
                      const std::vector<OptionMessage>& inputs,
                      const std::function<bool(const Trace&)>& fn) {
  size_t visited = 0;
  auto charge = [&]() {
    if (++visited > opts.limits.max_visited)
      throw ResourceLimitError("max_visited", opts.limits.max_visited);
  };

  std::vector<Value> starts = m.initial_states;
  std::sort(starts.begin(), starts.end());

  std::function<bool(Trace&)> go = [&](Trace& tr) -> bool {
    if (!fn(tr)) return false;
    if (tr.steps.size() >= opts.max_steps) return true;
    // Copy: growing tr.steps below would invalidate a reference.
    Value s = tr.final_state();
    for (const auto& c : step_choices(m, s, inputs)) {
      charge();
      if (opts.step_filter && !opts.step_filter(tr, c.label, c.input)) continue;
      if (!m.constraint(c.label, s, c.input)) continue;
      StepResult st = m.transition(c.label, s, c.input);
      tr.steps.push_back(TransitionRecord{c.label, s, c.input, st.post, st.output});
      bool keep = go(tr);
      tr.steps.pop_back();
      if (!keep) return false;
    }
    return true;
  };

  for (const auto& s0 : starts) {
    Trace tr{s0, {}};
    if (!go(tr)) return false;
  }
  return true;
}

}  // namespace

void for_each_valid_trace(const Vlsm& m, const TraceEnumOptions& opts,
                          const std::set<Value>& valid_msgs,
                          const std::function<bool(const Trace&)>& fn) {
  enumerate_traces(m, opts, sorted_inputs(valid_msgs), fn);
}

void for_each_constrained_trace(const Vlsm& m, const TraceEnumOptions& opts,
                                const std::vector<Value>& input_pool,
                                const std::function<bool(const Trace&)>& fn) {
  std::set<Value> pool(input_pool.begin(), input_pool.end());
  enumerate_traces(m, opts, sorted_inputs(pool), fn);
}

std::vector<Trace> collect_valid_traces(const Vlsm& m, size_t max_steps,
                                        const std::set<Value>& valid_msgs,
                                        const Limits& limits) {
  std::vector<Trace> out;
  TraceEnumOptions opts;
  opts.max_steps = max_steps;
  opts.limits = limits;
  for_each_valid_trace(m, opts, valid_msgs, [&](const Trace& tr) {
    out.push_back(tr);
    return true;
  });
  return out;
}

std::vector<Trace> collect_constrained_traces(const Vlsm& m, size_t max_steps,
                                              const std::vector<Value>& input_pool,
                                              const Limits& limits) {
  std::vector<Trace> out;
  TraceEnumOptions opts;
  opts.max_steps = max_steps;
  opts.limits = limits;
  for_each_constrained_trace(m, opts, input_pool, [&](const Trace& tr) {
    out.push_back(tr);
    return true;
  });
  return out;
}

std::set<Value> constrained_states(const Vlsm& m, size_t max_steps,
                                   const std::vector<Value>& input_pool,
                                   const Limits& limits) {
  std::set<Value> out;
  TraceEnumOptions opts;
  opts.max_steps = max_steps;
  opts.limits = limits;
  for_each_constrained_trace(m, opts, input_pool, [&](const Trace& tr) {
    out.insert(tr.final_state());
    return true;
  });
  return out;
}

std::set<Value> trace_set(const std::vector<Trace>& traces) {
  std::set<Value> out;
  for (const auto& tr : traces) out.insert(tr.encode());
  return out;
}

std::set<Value> constrained_reach(const Vlsm& m, size_t depth,
                                  const std::vector<Value>& input_pool,
                                  const Limits& limits) {
  std::set<Value> pool(input_pool.begin(), input_pool.end());
  std::vector<OptionMessage> inputs;
  inputs.push_back(OptionMessage::none());
  for (const auto& v : pool) inputs.push_back(OptionMessage::proper(v));

  std::set<Value> seen(m.initial_states.begin(), m.initial_states.end());
  std::vector<Value> frontier(seen.begin(), seen.end());
  size_t stored = seen.size();
  for (size_t round = 0; round < depth && !frontier.empty(); ++round) {
    std::set<Value> next;
    for (const auto& s : frontier) {
      for (const auto& l : m.enabled_labels(s)) {
        for (const auto& in : inputs) {
          if (!m.constraint(l, s, in)) continue;
          Value post = m.transition(l, s, in).post;
          if (!seen.count(post)) next.insert(post);
        }
      }
    }
    frontier.assign(next.begin(), next.end());
    for (auto& s : next) {
      if (seen.insert(std::move(s)).second && ++stored > limits.max_visited) {
        throw ResourceLimitError("max_visited", limits.max_visited);
      }
    }
  }
  return seen;
}

WitnessedMessage is_valid_message(const Vlsm& m, const OptionMessage& msg,
                                  size_t depth, const Limits& limits) {
  if (!msg.is_proper()) {
    Trace tr{m.initial_states.empty() ? Value() : m.initial_states.front(), {}};
    return {true, tr};
  }
  for (const auto& im : m.initial_messages) {
    if (im == msg.message()) {
      Trace tr{m.initial_states.empty() ? Value() : m.initial_states.front(), {}};
      return {true, tr};
    }
  }
  ReachSet rs = reach(m, depth, {}, limits);
  if (!rs.has_message(msg)) return {false, {}};

  // Breadth-first by trace length, lexicographic within a length: iterative
  // deepening over the canonical depth-first order.
  std::set<Value> valid_msgs = rs.proper_message_set();
  for (size_t len = 1; len <= depth; ++len) {
    WitnessedMessage found;
    TraceEnumOptions opts;
    opts.max_steps = len;
    opts.limits = limits;
    for_each_valid_trace(m, opts, valid_msgs, [&](const Trace& tr) {
      if (tr.steps.size() == len && tr.steps.back().output == msg) {
        found.valid = true;
        found.witness = tr;
        return false;
      }
      return true;
    });
    if (found.valid) return found;
  }
  return {false, {}};
}

namespace {

CheckResult check_trace_impl(
    const Vlsm& m, const Trace& tr,
    const std::function<bool(const OptionMessage&, size_t)>& input_ok) {
  if (!m.is_initial_state(tr.start)) {
    return CheckResult::fail(0, "start state is not initial");
  }
  Value cur = tr.start;
  for (size_t i = 0; i < tr.steps.size(); ++i) {
    const auto& st = tr.steps[i];
    if (st.pre != cur) {
      return CheckResult::fail(i + 1, "pre-state does not chain");
    }
    if (!m.is_label(st.label)) {
      return CheckResult::fail(i + 1, "unknown label " + st.label.repr());
    }
    StepResult r = m.transition(st.label, st.pre, st.input);
    if (r.post != st.post || !(r.output == st.output)) {
      return CheckResult::fail(i + 1, "recorded transition does not replay");
    }
    if (!m.constraint(st.label, st.pre, st.input)) {
      return CheckResult::fail(i + 1, "validity constraint rejected the input");
    }
    if (!input_ok(st.input, i)) {
      return CheckResult::fail(i + 1,
                               "input " + st.input.repr() + " is not a valid message");
    }
    cur = st.post;
  }
  return CheckResult::pass();
}

}  // namespace

CheckResult check_trace_with(const Vlsm& m, const Trace& tr, TraceMode mode,
                             const std::set<Value>& valid_msgs) {
  if (mode == TraceMode::Constrained) {
    return check_trace_impl(m, tr, [](const OptionMessage&, size_t) { return true; });
  }
  return check_trace_impl(m, tr, [&](const OptionMessage& in, size_t) {
    return !in.is_proper() || valid_msgs.count(in.message()) > 0;
  });
}

CheckResult check_trace(const Vlsm& m, const Trace& tr, TraceMode mode,
                        size_t depth, const Limits& limits) {
  if (mode == TraceMode::Constrained) {
    return check_trace_with(m, tr, mode, {});
  }
  ReachSet rs = reach(m, depth, {}, limits);
  std::set<Value> valid = rs.proper_message_set();
  return check_trace_with(m, tr, mode, valid);
}

CheckResult check_trace_self_seeded(const Vlsm& m, const Trace& tr,
                                    const std::set<Value>& valid_msgs) {
  std::set<Value> seen = valid_msgs;
  return check_trace_impl(m, tr, [&](const OptionMessage& in, size_t i) {
    bool ok = !in.is_proper() || seen.count(in.message()) > 0;
    // Outputs up to and including this step become available afterwards.
    if (tr.steps[i].output.is_proper()) seen.insert(tr.steps[i].output.message());
    return ok;
  });
}

}  // namespace vlsm
