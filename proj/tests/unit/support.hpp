#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// here deliberately avoid the library's reach/enumeration machinery: they
// recompute expectations from first principles so the two can disagree.

#include <map>
#include <set>
#include <utility>
#include <vector>

#include "vlsm/compose.hpp"
#include "vlsm/machine.hpp"
#include "vlsm/umo.hpp"

namespace vlsm::testing {

// ---- countdown oracles -----------------------------------------------------

struct CountdownBrute {
  std::set<std::pair<int64_t, int64_t>> states;
  std::set<int64_t> messages;  // proper only
};

// Constrained exploration: inputs range over all positive integers up to the
// largest second component seen (larger inputs are never constrained).
inline CountdownBrute countdown_brute_constrained(int64_t max_n, size_t depth) {
  CountdownBrute out;
  for (int64_t n = 0; n <= max_n; ++n) out.states.insert({n, n});
  for (size_t round = 0; round < depth; ++round) {
    CountdownBrute next = out;
    for (auto [n, i] : out.states) {
      for (int64_t j = 1; j <= i; ++j) {
        next.states.insert({n, i - j});
        next.messages.insert(2 * j);
      }
    }
    out = std::move(next);
  }
  return out;
}

// Valid exploration per the mutual fixpoint: inputs must already be valid
// messages; 2 is initially valid.
inline CountdownBrute countdown_brute_valid(int64_t max_n, size_t depth) {
  CountdownBrute out;
  for (int64_t n = 0; n <= max_n; ++n) out.states.insert({n, n});
  out.messages.insert(2);
  for (size_t round = 0; round < depth; ++round) {
    CountdownBrute next = out;
    for (auto [n, i] : out.states) {
      for (int64_t j : out.messages) {
        if (i >= j && j >= 1) {
          next.states.insert({n, i - j});
          next.messages.insert(2 * j);
        }
      }
    }
    out = std::move(next);
  }
  return out;
}

// ---- exhaustive trace search (observer family) -----------------------------

// Every trace reaching an observer state receives exactly the messages in its
// receive observations, so that finite pool makes the search exhaustive.
inline std::vector<Trace> all_traces_reaching(const Vlsm& component,
                                              const Value& target) {
  std::set<Value> received = received_messages(target);
  std::vector<Value> pool(received.begin(), received.end());
  size_t len = umo_obs(target).size();
  std::vector<Trace> found;

  std::vector<Value> labels{vsym("receive"), vsym("send")};
  std::function<void(Trace&)> go = [&](Trace& tr) {
    if (tr.steps.size() == len) {
      if (tr.final_state() == target) found.push_back(tr);
      return;
    }
    Value s = tr.final_state();
    for (const auto& l : labels) {
      std::vector<OptionMessage> inputs{OptionMessage::none()};
      for (const auto& m : pool) inputs.push_back(OptionMessage::proper(m));
      for (const auto& in : inputs) {
        if (!component.constraint(l, s, in)) continue;
        StepResult r = component.transition(l, s, in);
        tr.steps.push_back(TransitionRecord{l, s, in, r.post, r.output});
        go(tr);
        tr.steps.pop_back();
      }
    }
  };
  Trace tr{umo_initial(umo_addr(target)), {}};
  go(tr);
  return found;
}

// ---- abstract fixtures ------------------------------------------------------

// Atomic-message machine used by the request/response fixture: emits fixed
// messages in response to others, with single-symbol states.
struct AtomicSpec {
  int64_t address = 0;
  // (label symbol, pre state, required input or none, post state, output or none)
  struct Rule {
    std::string label;
    std::string pre;
    std::optional<std::string> input;
    std::string post;
    std::optional<std::string> output;
  };
  std::string initial;
  std::vector<Rule> rules;
};

// Message atoms are symbols; sender/dependency oracles come from the table.
inline Vlsm atomic_machine(const AtomicSpec& spec,
                           std::map<std::string, int64_t> senders) {
  Vlsm m;
  m.name = "atomic" + std::to_string(spec.address);
  Value init = vsym(spec.initial);
  m.initial_states = {init};
  m.is_initial_state = [init](const Value& s) { return s == init; };

  auto rules = std::make_shared<const std::vector<AtomicSpec::Rule>>(spec.rules);
  std::set<std::string> label_names;
  for (const auto& r : *rules) label_names.insert(r.label);
  std::vector<Value> labels;
  for (const auto& l : label_names) labels.push_back(vsym(l));
  auto label_vec = std::make_shared<const std::vector<Value>>(std::move(labels));

  m.is_label = [label_vec](const Value& l) {
    for (const auto& x : *label_vec) {
      if (x == l) return true;
    }
    return false;
  };
  m.enabled_labels = [label_vec](const Value&) { return *label_vec; };
  m.transition = [rules](const Value& l, const Value& s, const OptionMessage& in) {
    for (const auto& r : *rules) {
      if (vsym(r.label) != l || vsym(r.pre) != s) continue;
      bool want_input = r.input.has_value();
      if (want_input != in.is_proper()) continue;
      if (want_input && in.message() != vsym(*r.input)) continue;
      OptionMessage out = r.output ? OptionMessage::proper(vsym(*r.output))
                                   : OptionMessage::none();
      return StepResult{vsym(r.post), out};
    }
    return StepResult{s, OptionMessage::none()};
  };
  m.constraint = [rules](const Value& l, const Value& s, const OptionMessage& in) {
    for (const auto& r : *rules) {
      if (vsym(r.label) != l || vsym(r.pre) != s) continue;
      bool want_input = r.input.has_value();
      if (want_input != in.is_proper()) continue;
      if (want_input && in.message() != vsym(*r.input)) continue;
      return true;
    }
    return false;
  };

  auto sender_map = std::make_shared<const std::map<std::string, int64_t>>(
      std::move(senders));
  m.oracles.sender = [sender_map](const Value& msg) {
    auto it = sender_map->find(msg.as_sym());
    return it == sender_map->end() ? vint(0) : vint(it->second);
  };
  m.oracles.dependencies = [](const Value&) { return std::vector<Value>{}; };

  // Sent/observed oracles via the emission table: a state has sent m iff its
  // symbol records it (states are chosen so that each is reached uniquely).
  auto sent_rules = rules;
  m.oracles.has_been_sent = [sent_rules](const Value& s, const Value& msg) {
    // A message counts as sent in states reachable only after its emission;
    // encoded as "post state lists the message in its name" with a '+'.
    std::string tag = "+" + msg.as_sym();
    return s.as_sym().find(tag) != std::string::npos;
  };
  m.oracles.has_been_received = [](const Value&, const Value&) { return false; };
  m.oracles.observed_messages = [](const Value& s) {
    std::vector<Value> out;
    const std::string& name = s.as_sym();
    size_t pos = 0;
    while ((pos = name.find('+', pos)) != std::string::npos) {
      size_t end = name.find('+', pos + 1);
      std::string atom = name.substr(pos + 1, end == std::string::npos
                                                  ? std::string::npos
                                                  : end - pos - 1);
      out.push_back(vsym(atom));
      pos += 1;
    }
    return out;
  };
  // Emission recipes for the lift machinery: shortest rule path from the
  // initial state that outputs the message.
  auto init_copy = init;
  m.emission_recipe = [rules, init_copy](const Value& msg) -> std::optional<Trace> {
    // Breadth-first search over rule applications.
    struct Node {
      Value state;
      Trace trace;
    };
    std::vector<Node> frontier{{init_copy, Trace{init_copy, {}}}};
    std::set<Value> seen{init_copy};
    for (int depth = 0; depth < 8; ++depth) {
      std::vector<Node> next;
      for (const auto& node : frontier) {
        for (const auto& r : *rules) {
          if (vsym(r.pre) != node.state) continue;
          OptionMessage in = r.input ? OptionMessage::proper(vsym(*r.input))
                                     : OptionMessage::none();
          OptionMessage out = r.output ? OptionMessage::proper(vsym(*r.output))
                                       : OptionMessage::none();
          Trace tr = node.trace;
          tr.steps.push_back(
              TransitionRecord{vsym(r.label), node.state, in, vsym(r.post), out});
          if (out.is_proper() && out.message() == msg) return tr;
          if (seen.insert(vsym(r.post)).second) next.push_back({vsym(r.post), tr});
        }
      }
      frontier = std::move(next);
    }
    return std::nullopt;
  };
  return m;
}

}  // namespace vlsm::testing

namespace vlsm::testing {

// Builds a trace by replaying (label, input) choices through the transition
// function, without consulting the constraint.
inline Trace build_trace(const Vlsm& m, const Value& start,
                         const std::vector<std::pair<Value, OptionMessage>>& steps) {
  Trace tr{start, {}};
  Value cur = start;
  for (const auto& [l, in] : steps) {
    StepResult r = m.transition(l, cur, in);
    tr.steps.push_back(TransitionRecord{l, cur, in, r.post, r.output});
    cur = r.post;
  }
  return tr;
}

}  // namespace vlsm::testing

namespace vlsm::testing {

// Independent oracle for the two-countdown free composition: direct product
// exploration with a shared valid-message pool.
struct CountdownPairBrute {
  using St = std::pair<std::pair<int64_t, int64_t>, std::pair<int64_t, int64_t>>;
  std::set<St> states;
  std::set<int64_t> messages;
};

inline CountdownPairBrute countdown_pair_brute(int64_t max_n, size_t depth) {
  CountdownPairBrute out;
  for (int64_t a = 0; a <= max_n; ++a) {
    for (int64_t b = 0; b <= max_n; ++b) out.states.insert({{a, a}, {b, b}});
  }
  out.messages.insert(2);
  for (size_t round = 0; round < depth; ++round) {
    CountdownPairBrute next = out;
    for (const auto& st : out.states) {
      for (int64_t j : out.messages) {
        if (j >= 1 && st.first.second >= j) {
          next.states.insert({{st.first.first, st.first.second - j}, st.second});
          next.messages.insert(2 * j);
        }
        if (j >= 1 && st.second.second >= j) {
          next.states.insert({st.first, {st.second.first, st.second.second - j}});
          next.messages.insert(2 * j);
        }
      }
    }
    out = std::move(next);
  }
  return out;
}

// The ring refinement of the three-observer composition: component i may
// receive only from component (i mod 3) + 1.
inline CompositionConstraint ring_constraint() {
  return [](const Value& l, const Value&, const OptionMessage& in) {
    if (label_inner(l).as_sym() != "receive" || !in.is_proper()) return true;
    int64_t i = static_cast<int64_t>(label_component(l));
    return umo_addr(in.message()) == (i % 3) + 1;
  };
}

}  // namespace vlsm::testing
