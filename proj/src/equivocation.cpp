#include "vlsm/equivocation.hpp"

#include <algorithm>
#include <deque>

#include "vlsm/compose.hpp"

namespace vlsm {

bool happens_before(const Vlsm& m, const Value& m1, const Value& m2) {
  if (!m.oracles.dependencies) {
    throw std::domain_error("machine " + m.name + " has no dependencies oracle");
  }
  std::deque<Value> work{m2};
  std::set<Value> seen;
  size_t guard = 0;
  while (!work.empty()) {
    if (++guard > 100000) {
      throw std::runtime_error("dependency relation is not well-founded near " +
                               m2.repr());
    }
    Value cur = work.front();
    work.pop_front();
    for (const auto& d : m.oracles.dependencies(cur)) {
      if (d == m1) return true;
      if (seen.insert(d).second) work.push_back(d);
    }
  }
  return false;
}

bool incomparable(const Vlsm& m, const Value& m1, const Value& m2) {
  if (m1 == m2) return false;
  if (!(m.oracles.sender(m1) == m.oracles.sender(m2))) return false;
  return !happens_before(m, m1, m2) && !happens_before(m, m2, m1);
}

bool directly_observed(const Vlsm& m, const Value& state, const Value& msg) {
  const auto& sent = m.oracles.has_been_sent;
  const auto& recv = m.oracles.has_been_received;
  return (sent && sent(state, msg)) || (recv && recv(state, msg));
}

std::vector<Value> observed_closure(const Vlsm& m, const Value& state) {
  if (!m.oracles.observed_messages) {
    throw std::domain_error("machine " + m.name + " has no observed-messages oracle");
  }
  std::set<Value> seen;
  std::deque<Value> work;
  for (const auto& v : m.oracles.observed_messages(state)) {
    if (seen.insert(v).second) work.push_back(v);
  }
  while (!work.empty()) {
    Value cur = work.front();
    work.pop_front();
    if (!m.oracles.dependencies) continue;
    for (const auto& d : m.oracles.dependencies(cur)) {
      if (seen.insert(d).second) work.push_back(d);
    }
  }
  return std::vector<Value>(seen.begin(), seen.end());
}

bool indirectly_observed(const Vlsm& m, const Value& state, const Value& msg) {
  if (directly_observed(m, state, msg)) return true;
  for (const auto& v : m.oracles.observed_messages(state)) {
    if (happens_before(m, msg, v)) return true;
  }
  return false;
}

namespace {

EquivocationReport local_report(const Vlsm& component,
                                const std::vector<Value>& observed) {
  EquivocationReport rep;
  rep.scope = EquivocationReport::Scope::Local;
  for (size_t i = 0; i < observed.size(); ++i) {
    for (size_t k = i + 1; k < observed.size(); ++k) {
      if (!incomparable(component, observed[i], observed[k])) continue;
      Value a = component.oracles.sender(observed[i]);
      if (rep.equivocators.insert(a).second) {
        rep.local_witnesses.emplace(a, std::make_pair(observed[i], observed[k]));
      }
    }
  }
  return rep;
}

EquivocationReport global_report(const Vlsm& composite, const Value& sigma,
                                 const std::vector<Value>& observed) {
  EquivocationReport rep;
  rep.scope = EquivocationReport::Scope::Global;
  for (const auto& msg : observed) {
    if (composite.oracles.has_been_sent(sigma, msg)) continue;
    Value a = composite.oracles.sender(msg);
    if (rep.equivocators.insert(a).second) {
      rep.global_witnesses.emplace(a, msg);
    }
  }
  return rep;
}

}  // namespace

EquivocationReport local_equivocators(const Vlsm& component, const Value& state) {
  return local_report(component, observed_closure(component, state));
}

EquivocationReport local_equivocators_direct(const Vlsm& component,
                                             const Value& state) {
  return local_report(component, component.oracles.observed_messages(state));
}

EquivocationReport global_equivocators(const Vlsm& composite, const Value& sigma) {
  return global_report(composite, sigma, observed_closure(composite, sigma));
}

EquivocationReport global_equivocators_direct(const Vlsm& composite,
                                              const Value& sigma) {
  return global_report(composite, sigma, composite.oracles.observed_messages(sigma));
}

CheckResult check_full_node(const Vlsm& m, const Trace& trace) {
  const bool composite = !m.parts.empty();
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& st = trace.steps[i];
    if (!st.input.is_proper()) continue;
    const Vlsm* receiver = &m;
    Value receiver_state = st.pre;
    if (composite) {
      size_t j = label_component(st.label);
      receiver = &m.parts[j - 1];
      receiver_state = composite_part(st.pre, j);
    }
    if (!receiver->oracles.dependencies) continue;
    for (const auto& dep : receiver->oracles.dependencies(st.input.message())) {
      if (!indirectly_observed(*receiver, receiver_state, dep)) {
        return CheckResult::fail(
            i + 1, "dependency " + dep.repr() + " of the received message was not observed");
      }
    }
  }
  return CheckResult::pass();
}

Trace minimal_equivocation_trace(const Vlsm& composite, const Value& sigma) {
  const size_t n = composite.parts.size();
  if (n == 0) throw std::domain_error("minimal_equivocation_trace needs a composition");

  std::vector<Trace> pending;
  std::vector<size_t> next(n, 0);
  for (size_t j = 1; j <= n; ++j) {
    const auto& part = composite.parts[j - 1];
    if (!part.state_to_trace) {
      throw std::domain_error("component " + part.name + " cannot extract traces");
    }
    auto tr = part.state_to_trace(composite_part(sigma, j));
    if (!tr) throw std::domain_error("no trace reaches part " + std::to_string(j));
    pending.push_back(*tr);
  }

  std::vector<Value> start_parts;
  for (size_t j = 0; j < n; ++j) start_parts.push_back(pending[j].start);
  Value cur = composite_state(start_parts);
  Trace out{cur, {}};
  std::set<Value> current_eqv = global_equivocators(composite, cur).equivocators;

  size_t remaining = 0;
  for (size_t j = 0; j < n; ++j) remaining += pending[j].steps.size();

  while (remaining > 0) {
    // Among schedulable next steps, pick the one introducing the fewest new
    // globally evidenced equivocators, tie-broken by component index. Some
    // step is always schedulable: the earliest unscheduled step of any
    // linearization reaching sigma has all its enabling sends scheduled.
    size_t best = n;
    size_t best_new = 0;
    std::set<Value> best_eqv;
    for (size_t j = 0; j < n; ++j) {
      if (next[j] >= pending[j].steps.size()) continue;
      const TransitionRecord& st = pending[j].steps[next[j]];
      Value cl = composite_label(j + 1, st.label);
      if (!is_constrained(composite, cl, cur, st.input)) continue;
      StepResult r = composite.transition(cl, cur, st.input);
      std::set<Value> eqv = global_equivocators(composite, r.post).equivocators;
      size_t added = 0;
      for (const auto& a : eqv) {
        if (!current_eqv.count(a)) ++added;
      }
      if (best == n || added < best_new) {
        best = j;
        best_new = added;
        best_eqv = std::move(eqv);
      }
      if (best_new == 0) break;
    }
    if (best == n) {
      throw std::runtime_error("replay stalled; composite state is not constrained");
    }
    const TransitionRecord& st = pending[best].steps[next[best]++];
    Value cl = composite_label(best + 1, st.label);
    StepResult r = composite.transition(cl, cur, st.input);
    out.steps.push_back(TransitionRecord{cl, cur, st.input, r.post, r.output});
    cur = r.post;
    current_eqv = std::move(best_eqv);
    --remaining;
  }
  if (cur != sigma) {
    throw std::runtime_error("replay does not reach the requested composite state");
  }
  return out;
}

}  // namespace vlsm
