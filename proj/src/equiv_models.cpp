#include "vlsm/equiv_models.hpp"

#include <algorithm>
#include <memory>

#include "vlsm/equivocation.hpp"

namespace vlsm {

namespace {

const std::string kDuplicate = "duplicate";
const std::string kNewMachine = "new_machine";

bool action_is_duplicate(const Value& a) {
  return a.is_sym() && a.as_sym() == kDuplicate;
}

bool action_is_new_machine(const Value& a) {
  return a.is_list() && a.size() == 2 && a.at(0).is_sym() &&
         a.at(0).as_sym() == kNewMachine;
}

}  // namespace

Value equivocator_label_inner(size_t copy_index, Value inner) {
  return vlist({vint(static_cast<int64_t>(copy_index)), std::move(inner)});
}

Value equivocator_label_duplicate(size_t copy_index) {
  return vlist({vint(static_cast<int64_t>(copy_index)), vsym(kDuplicate)});
}

Value equivocator_label_new_machine(size_t copy_index, Value initial) {
  return vlist({vint(static_cast<int64_t>(copy_index)),
                vlist({vsym(kNewMachine), std::move(initial)})});
}

bool equivocator_action_is_inner(const Value& action) {
  return !action_is_duplicate(action) && !action_is_new_machine(action);
}

Vlsm equivocating(const Vlsm& component) {
  auto comp = std::make_shared<const Vlsm>(component);

  Vlsm out;
  out.name = component.name + "^e";
  for (const auto& s0 : component.initial_states) out.initial_states.push_back(vlist({s0}));
  out.is_initial_state = [comp](const Value& g) {
    return g.is_list() && g.size() == 1 && comp->is_initial_state(g.at(0));
  };
  out.initial_messages = component.initial_messages;

  out.is_label = [comp](const Value& l) {
    if (!l.is_list() || l.size() != 2 || !l.at(0).is_int() || l.at(0).as_int() < 1)
      return false;
    const Value& a = l.at(1);
    if (action_is_duplicate(a)) return true;
    if (action_is_new_machine(a)) return comp->is_initial_state(a.at(1));
    return comp->is_label(a);
  };

  out.enabled_labels = [comp](const Value& g) {
    std::vector<Value> labels;
    for (size_t i = 1; i <= g.size(); ++i) {
      for (const auto& l : comp->enabled_labels(g.at(i - 1))) {
        labels.push_back(equivocator_label_inner(i, l));
      }
      labels.push_back(equivocator_label_duplicate(i));
      for (const auto& s0 : comp->initial_states) {
        labels.push_back(equivocator_label_new_machine(i, s0));
      }
    }
    return labels;
  };

  out.transition = [comp](const Value& l, const Value& g, const OptionMessage& in) {
    size_t i = static_cast<size_t>(l.at(0).as_int());
    const Value& a = l.at(1);
    std::vector<Value> copies = g.items();
    if (i < 1 || i > copies.size()) return StepResult{g, OptionMessage::none()};
    if (action_is_duplicate(a)) {
      copies.insert(copies.begin() + i, copies[i - 1]);
      return StepResult{vlist(std::move(copies)), OptionMessage::none()};
    }
    if (action_is_new_machine(a)) {
      copies.insert(copies.begin() + i, a.at(1));
      return StepResult{vlist(std::move(copies)), OptionMessage::none()};
    }
    StepResult r = comp->transition(a, copies[i - 1], in);
    copies[i - 1] = r.post;
    return StepResult{vlist(std::move(copies)), r.output};
  };

  out.constraint = [comp](const Value& l, const Value& g, const OptionMessage& in) {
    if (!l.is_list() || l.size() != 2 || !l.at(0).is_int()) return false;
    int64_t i = l.at(0).as_int();
    if (i < 1 || i > static_cast<int64_t>(g.size())) return false;
    const Value& a = l.at(1);
    if (action_is_duplicate(a) || action_is_new_machine(a)) return !in.is_proper();
    return comp->constraint(a, g.at(static_cast<size_t>(i) - 1), in);
  };

  out.oracles.sender = component.oracles.sender;
  out.oracles.dependencies = component.oracles.dependencies;
  if (component.oracles.has_been_sent) {
    auto o = component.oracles.has_been_sent;
    out.oracles.has_been_sent = [o](const Value& g, const Value& m) {
      for (const auto& c : g.items()) {
        if (o(c, m)) return true;
      }
      return false;
    };
  }
  if (component.oracles.has_been_received) {
    auto o = component.oracles.has_been_received;
    out.oracles.has_been_received = [o](const Value& g, const Value& m) {
      for (const auto& c : g.items()) {
        if (o(c, m)) return true;
      }
      return false;
    };
  }
  if (component.oracles.observed_messages) {
    auto o = component.oracles.observed_messages;
    out.oracles.observed_messages = [o](const Value& g) {
      std::set<Value> seen;
      for (const auto& c : g.items()) {
        for (auto& m : o(c)) seen.insert(std::move(m));
      }
      return std::vector<Value>(seen.begin(), seen.end());
    };
  }
  return out;
}

namespace {

// Has the sender's own part sent the message? Vacuous for no-message.
bool sent_by_sender_part(const Vlsm& free_composite, const Value& sigma,
                         const OptionMessage& in) {
  if (!in.is_proper()) return true;
  if (!free_composite.oracles.sender) return false;
  Value a = free_composite.oracles.sender(in.message());
  if (!a.is_int()) return false;
  int64_t p = a.as_int();
  if (p < 1 || p > static_cast<int64_t>(free_composite.parts.size())) return false;
  const auto& o = free_composite.parts[static_cast<size_t>(p) - 1].oracles.has_been_sent;
  return o && o(sigma.at(static_cast<size_t>(p) - 1), in.message());
}

}  // namespace

Vlsm state_equiv_fixed(std::vector<Vlsm> components, const std::set<int64_t>& E,
                       CompositionConstraint extra_phi) {
  const size_t n = components.size();
  std::vector<Vlsm> parts;
  for (size_t i = 1; i <= n; ++i) {
    if (E.count(static_cast<int64_t>(i))) {
      parts.push_back(equivocating(components[i - 1]));
    } else {
      parts.push_back(components[i - 1]);
    }
  }
  Vlsm free = free_compose(std::move(parts), "state_equiv_fixed");
  auto free_ptr = std::make_shared<const Vlsm>(free);
  std::set<int64_t> eqv_set = E;

  CompositionConstraint phi = [free_ptr, eqv_set, extra_phi, n](
                                  const Value& l, const Value& sigma,
                                  const OptionMessage& in) {
    if (!sent_by_sender_part(*free_ptr, sigma, in)) return false;
    if (!extra_phi) return true;

    // Lift the plain composition constraint existentially over selections of
    // copies; the acting copy is pinned for inner actions of equivocators.
    size_t j = label_component(l);
    bool j_eqv = eqv_set.count(static_cast<int64_t>(j)) > 0;
    Value plain_inner;
    size_t acting_copy = 0;
    if (j_eqv) {
      const Value& el = label_inner(l);
      const Value& action = el.at(1);
      if (!equivocator_action_is_inner(action)) return true;
      plain_inner = action;
      acting_copy = static_cast<size_t>(el.at(0).as_int());
    } else {
      plain_inner = label_inner(l);
    }
    Value plain_label = composite_label(j, plain_inner);

    std::vector<std::vector<Value>> choices(n);
    for (size_t p = 1; p <= n; ++p) {
      const Value& part = composite_part(sigma, p);
      if (!eqv_set.count(static_cast<int64_t>(p))) {
        choices[p - 1] = {part};
      } else if (p == j && acting_copy >= 1 && acting_copy <= part.size()) {
        choices[p - 1] = {part.at(acting_copy - 1)};
      } else {
        choices[p - 1] = part.items();
      }
    }
    std::vector<Value> sel(n);
    std::function<bool(size_t)> pick = [&](size_t p) -> bool {
      if (p == n) return extra_phi(plain_label, vlist(sel), in);
      for (const auto& c : choices[p]) {
        sel[p] = c;
        if (pick(p + 1)) return true;
      }
      return false;
    };
    return pick(0);
  };
  return constrain(std::move(free), phi, "state_equiv_fixed");
}

Vlsm message_equiv_fixed(std::vector<Vlsm> components, const std::set<int64_t>& E) {
  Vlsm free = free_compose(std::move(components), "message_equiv_fixed");
  auto free_ptr = std::make_shared<const Vlsm>(free);
  std::set<int64_t> eqv_set = E;
  CompositionConstraint phi = [free_ptr, eqv_set](const Value&, const Value& sigma,
                                                  const OptionMessage& in) {
    if (!in.is_proper()) return true;
    if (sent_by_sender_part(*free_ptr, sigma, in)) return true;
    Value a = free_ptr->oracles.sender ? free_ptr->oracles.sender(in.message()) : Value();
    return a.is_int() && eqv_set.count(a.as_int()) > 0;
  };
  return constrain(std::move(free), phi, "message_equiv_fixed");
}

Vlsm no_equivocation_composition(std::vector<Vlsm> components) {
  return message_equiv_fixed(std::move(components), {});
}

Value state_reduct(const Value& gamma_state, const std::set<int64_t>& E, size_t n) {
  std::vector<Value> parts;
  for (size_t p = 1; p <= n; ++p) {
    const Value& part = composite_part(gamma_state, p);
    parts.push_back(E.count(static_cast<int64_t>(p)) ? part.at(0) : part);
  }
  return composite_state(std::move(parts));
}

Trace trace_reduct(const Trace& state_model_trace, const std::set<int64_t>& E,
                   size_t n) {
  Trace out;
  out.start = state_reduct(state_model_trace.start, E, n);
  for (const auto& st : state_model_trace.steps) {
    size_t j = label_component(st.label);
    Value plain_label;
    if (E.count(static_cast<int64_t>(j))) {
      const Value& el = label_inner(st.label);
      if (el.at(0).as_int() != 1) continue;
      if (!equivocator_action_is_inner(el.at(1))) continue;
      plain_label = composite_label(j, el.at(1));
    } else {
      plain_label = st.label;
    }
    out.steps.push_back(TransitionRecord{plain_label, state_reduct(st.pre, E, n),
                                         st.input, state_reduct(st.post, E, n),
                                         st.output});
  }
  return out;
}

namespace {

struct LiftContext {
  const std::vector<Vlsm>& components;
  const std::set<int64_t>& allowed;      // senders that may use side copies
  const std::set<int64_t>& transformed;  // parts that are equivocators in the target
  const Vlsm& target;
  Value cur;
  Trace out;
  std::set<Value> sent;
  size_t orig_step = 0;  // 1-based index of the step being lifted
  LiftOutcome failure;

  bool fail(const std::string& why) {
    failure.fail_step = orig_step;
    failure.reason = why;
    return false;
  }

  bool append(const Value& label, const OptionMessage& in) {
    if (!is_constrained(target, label, cur, in)) {
      return fail("constructed step " + label.repr() + " is not constrained");
    }
    StepResult r = target.transition(label, cur, in);
    out.steps.push_back(TransitionRecord{label, cur, in, r.post, r.output});
    if (r.output.is_proper()) sent.insert(r.output.message());
    cur = r.post;
    return true;
  }

  bool ensure_emitted(const Value& msg, size_t guard) {
    if (sent.count(msg)) return true;
    if (guard == 0) return fail("emission recursion too deep for " + msg.repr());
    if (!target.oracles.sender) return fail("no sender oracle");
    Value a = target.oracles.sender(msg);
    if (!a.is_int()) return fail("no sender for " + msg.repr());
    int64_t p = a.as_int();
    if (!allowed.count(p)) {
      return fail("message " + msg.repr() + " must be emitted by component " +
                  std::to_string(p) + ", which is not an allowed equivocator");
    }
    const Vlsm& comp = components.at(static_cast<size_t>(p) - 1);
    if (!comp.emission_recipe) return fail("component has no emission recipe");
    auto recipe = comp.emission_recipe(msg);
    if (!recipe) return fail("no emission recipe for " + msg.repr());

    for (const auto& st : recipe->steps) {
      if (st.input.is_proper() && !sent.count(st.input.message())) {
        if (!ensure_emitted(st.input.message(), guard - 1)) return false;
      }
    }
    // Spawn a fresh copy after the last one and replay the recipe on it.
    size_t jp = static_cast<size_t>(p);
    size_t len = composite_part(cur, jp).size();
    if (!append(composite_label(jp, equivocator_label_new_machine(len, recipe->start)),
                OptionMessage::none())) {
      return false;
    }
    size_t copy = len + 1;
    for (const auto& st : recipe->steps) {
      if (!append(composite_label(jp, equivocator_label_inner(copy, st.label)),
                  st.input)) {
        return false;
      }
    }
    if (!sent.count(msg)) return fail("recipe did not emit " + msg.repr());
    return true;
  }
};

}  // namespace

LiftOutcome lift_trace_impl(const Trace& message_model_trace,
                            const std::vector<Vlsm>& components,
                            const std::set<int64_t>& allowed,
                            const std::set<int64_t>& transformed,
                            const Vlsm& state_model) {
  const size_t n = components.size();
  std::vector<Value> start_parts;
  for (size_t p = 1; p <= n; ++p) {
    const Value& part = composite_part(message_model_trace.start, p);
    start_parts.push_back(transformed.count(static_cast<int64_t>(p)) ? vlist({part})
                                                                     : part);
  }
  LiftContext ctx{components, allowed, transformed, state_model,
                  composite_state(std::move(start_parts)),
                  Trace{},
                  {},
                  0,
                  {}};
  ctx.out.start = ctx.cur;

  for (size_t i = 0; i < message_model_trace.steps.size(); ++i) {
    ctx.orig_step = i + 1;
    const auto& st = message_model_trace.steps[i];
    if (st.input.is_proper() && !ctx.sent.count(st.input.message())) {
      if (!ctx.ensure_emitted(st.input.message(), 64)) return ctx.failure;
    }
    size_t j = label_component(st.label);
    Value label = transformed.count(static_cast<int64_t>(j))
                      ? composite_label(j, equivocator_label_inner(1, label_inner(st.label)))
                      : st.label;
    if (!ctx.append(label, st.input)) return ctx.failure;
  }
  LiftOutcome ok;
  ok.trace = std::move(ctx.out);
  return ok;
}

LiftOutcome lift_trace(const Trace& message_model_trace,
                       const std::vector<Vlsm>& components,
                       const std::set<int64_t>& E, const Vlsm& state_model) {
  return lift_trace_impl(message_model_trace, components, E, E, state_model);
}

Vlsm state_equiv_limited(std::vector<Vlsm> components, const WeightMap& w) {
  const size_t n = components.size();
  std::vector<Vlsm> parts;
  for (auto& c : components) parts.push_back(equivocating(c));
  Vlsm free = free_compose(std::move(parts), "state_equiv_limited");
  auto free_ptr = std::make_shared<const Vlsm>(free);
  WeightMap wm = w;
  CompositionConstraint phi = [free_ptr, wm, n](const Value& l, const Value& sigma,
                                                const OptionMessage& in) {
    if (!sent_by_sender_part(*free_ptr, sigma, in)) return false;
    StepResult r = free_ptr->transition(l, sigma, in);
    std::set<int64_t> forked;
    for (size_t p = 1; p <= n; ++p) {
      if (composite_part(r.post, p).size() > 1) forked.insert(static_cast<int64_t>(p));
    }
    return wm.weight_of(forked) < wm.threshold;
  };
  return constrain(std::move(free), phi, "state_equiv_limited");
}

Value annotated_state(Value sigma, const std::set<int64_t>& eqv) {
  std::vector<Value> es;
  for (int64_t a : eqv) es.push_back(vint(a));
  return vlist({std::move(sigma), vlist(std::move(es))});
}

const Value& annotated_base(const Value& s) { return s.at(0); }

std::set<int64_t> annotated_eqv(const Value& s) {
  std::set<int64_t> out;
  for (const auto& a : s.at(1).items()) out.insert(a.as_int());
  return out;
}

Vlsm message_equiv_limited(std::vector<Vlsm> components, const WeightMap& w) {
  Vlsm base = free_compose(std::move(components), "free");
  auto base_ptr = std::make_shared<const Vlsm>(base);
  WeightMap wm = w;

  auto next_eqv = [base_ptr](const Value& sigma, const std::set<int64_t>& eqv,
                             const OptionMessage& in) {
    std::set<int64_t> out = eqv;
    if (in.is_proper() && !base_ptr->oracles.has_been_sent(sigma, in.message())) {
      out.insert(base_ptr->oracles.sender(in.message()).as_int());
    }
    return out;
  };

  Vlsm out;
  out.name = "message_equiv_limited";
  for (const auto& s0 : base.initial_states) {
    out.initial_states.push_back(annotated_state(s0, {}));
  }
  out.is_initial_state = [base_ptr](const Value& s) {
    return s.is_list() && s.size() == 2 && s.at(1).is_list() && s.at(1).size() == 0 &&
           base_ptr->is_initial_state(s.at(0));
  };
  out.initial_messages = base.initial_messages;
  out.is_label = base.is_label;
  out.enabled_labels = [base_ptr](const Value& s) {
    return base_ptr->enabled_labels(annotated_base(s));
  };
  out.transition = [base_ptr, next_eqv](const Value& l, const Value& s,
                                        const OptionMessage& in) {
    StepResult r = base_ptr->transition(l, annotated_base(s), in);
    auto eqv = next_eqv(annotated_base(s), annotated_eqv(s), in);
    return StepResult{annotated_state(r.post, eqv), r.output};
  };
  out.constraint = [base_ptr, next_eqv, wm](const Value& l, const Value& s,
                                            const OptionMessage& in) {
    if (!base_ptr->constraint(l, annotated_base(s), in)) return false;
    auto eqv = next_eqv(annotated_base(s), annotated_eqv(s), in);
    return wm.weight_of(eqv) < wm.threshold;
  };
  out.oracles.sender = base.oracles.sender;
  out.oracles.dependencies = base.oracles.dependencies;
  out.oracles.has_been_sent = [base_ptr](const Value& s, const Value& m) {
    return base_ptr->oracles.has_been_sent(annotated_base(s), m);
  };
  out.oracles.has_been_received = [base_ptr](const Value& s, const Value& m) {
    return base_ptr->oracles.has_been_received(annotated_base(s), m);
  };
  out.oracles.observed_messages = [base_ptr](const Value& s) {
    return base_ptr->oracles.observed_messages(annotated_base(s));
  };
  return out;
}

Trace annotate_trace(const Vlsm& annotated_machine, const Trace& plain) {
  Trace out;
  out.start = annotated_state(plain.start, {});
  Value cur = out.start;
  for (const auto& st : plain.steps) {
    StepResult r = annotated_machine.transition(st.label, cur, st.input);
    out.steps.push_back(TransitionRecord{st.label, cur, st.input, r.post, r.output});
    cur = r.post;
  }
  return out;
}

Trace deannotate_trace(const Trace& annotated) {
  Trace out;
  out.start = annotated_base(annotated.start);
  for (const auto& st : annotated.steps) {
    out.steps.push_back(TransitionRecord{st.label, annotated_base(st.pre), st.input,
                                         annotated_base(st.post), st.output});
  }
  return out;
}

Trace embed_fixed_to_limited(const Trace& fixed_trace, const std::set<int64_t>& E,
                             size_t n) {
  auto map_state = [&](const Value& sigma) {
    std::vector<Value> parts;
    for (size_t p = 1; p <= n; ++p) {
      const Value& part = composite_part(sigma, p);
      parts.push_back(E.count(static_cast<int64_t>(p)) ? part : vlist({part}));
    }
    return composite_state(std::move(parts));
  };
  Trace out;
  out.start = map_state(fixed_trace.start);
  for (const auto& st : fixed_trace.steps) {
    size_t j = label_component(st.label);
    Value label = E.count(static_cast<int64_t>(j))
                      ? st.label
                      : composite_label(j, equivocator_label_inner(1, label_inner(st.label)));
    out.steps.push_back(TransitionRecord{label, map_state(st.pre), st.input,
                                         map_state(st.post), st.output});
  }
  return out;
}

std::optional<Trace> restrict_limited_to_fixed(const Trace& limited_trace,
                                               const std::set<int64_t>& E, size_t n) {
  auto map_state = [&](const Value& sigma) -> std::optional<Value> {
    std::vector<Value> parts;
    for (size_t p = 1; p <= n; ++p) {
      const Value& part = composite_part(sigma, p);
      if (E.count(static_cast<int64_t>(p))) {
        parts.push_back(part);
      } else {
        if (part.size() != 1) return std::nullopt;
        parts.push_back(part.at(0));
      }
    }
    return composite_state(std::move(parts));
  };
  Trace out;
  auto s0 = map_state(limited_trace.start);
  if (!s0) return std::nullopt;
  out.start = *s0;
  for (const auto& st : limited_trace.steps) {
    size_t j = label_component(st.label);
    Value label = st.label;
    if (!E.count(static_cast<int64_t>(j))) {
      const Value& el = label_inner(st.label);
      if (el.at(0).as_int() != 1 || !equivocator_action_is_inner(el.at(1))) {
        return std::nullopt;
      }
      label = composite_label(j, el.at(1));
    }
    auto pre = map_state(st.pre);
    auto post = map_state(st.post);
    if (!pre || !post) return std::nullopt;
    out.steps.push_back(TransitionRecord{label, *pre, st.input, *post, st.output});
  }
  return out;
}

namespace {

// Prunes the enumeration to steps whose receives satisfy the receiver-level
// full-node condition; the lifting theorems assume it of the components.
TraceEnumOptions full_node_pruned(size_t depth, const Limits& limits,
                                  const Vlsm& receiver_composite,
                                  std::function<Value(const Value&)> strip) {
  TraceEnumOptions opts;
  opts.max_steps = depth;
  opts.limits = limits;
  auto comp = std::make_shared<const Vlsm>(receiver_composite);
  opts.step_filter = [comp, strip](const Trace& prefix, const Value& label,
                                   const OptionMessage& input) {
    if (!input.is_proper()) return true;
    size_t j = label_component(label);
    const Vlsm& part = comp->parts[j - 1];
    if (!part.oracles.dependencies) return true;
    Value pre = strip ? strip(prefix.final_state()) : prefix.final_state();
    Value part_state = composite_part(pre, j);
    auto have = part.oracles.observed_messages ? part.oracles.observed_messages(part_state)
                                               : std::vector<Value>{};
    std::set<Value> have_set(have.begin(), have.end());
    for (const auto& dep : part.oracles.dependencies(input.message())) {
      if (!have_set.count(dep)) return false;
    }
    return true;
  };
  return opts;
}

}  // namespace

EquivalenceVerdict check_fixed_set_equivalence(const std::vector<Vlsm>& components,
                                               const std::set<int64_t>& E,
                                               size_t depth,
                                               const EquivalenceOptions& opts) {
  const size_t n = components.size();
  Vlsm msg_model = message_equiv_fixed(components, E);
  Vlsm state_model = state_equiv_fixed(components, E);

  ReachSet rs_msg = reach(msg_model, depth, {}, opts.limits);
  std::set<Value> msgs_m = rs_msg.proper_message_set();
  ReachSet rs_state = reach(state_model, depth, {}, opts.limits);
  std::set<Value> msgs_s = rs_state.proper_message_set();

  // Right-hand side: valid message-model traces (full-node-respecting).
  TraceEnumOptions menum = opts.full_node_filter
                               ? full_node_pruned(depth, opts.limits, msg_model, nullptr)
                               : TraceEnumOptions{depth, opts.limits, nullptr};
  std::vector<Trace> rhs;
  for_each_valid_trace(msg_model, menum, msgs_m, [&](const Trace& tr) {
    rhs.push_back(tr);
    return true;
  });
  std::set<Value> rhs_set = trace_set(rhs);

  EquivalenceVerdict verdict;

  // Reduct direction: every (full-node-respecting) reduct of a valid
  // state-model trace is a valid message-model trace.
  bool ok = true;
  TraceEnumOptions senum;
  senum.max_steps = depth;
  senum.limits = opts.limits;
  for_each_valid_trace(state_model, senum, msgs_s, [&](const Trace& tr) {
    Trace r = trace_reduct(tr, E, n);
    if (opts.full_node_filter && !check_full_node(msg_model, r).ok) return true;
    if (!rhs_set.count(r.encode())) {
      verdict.status = EquivalenceVerdict::Status::Counterexample;
      verdict.detail = "reduct of a valid state-model trace is not a valid "
                       "message-model trace";
      verdict.witness = r;
      ok = false;
      return false;
    }
    return true;
  });
  if (!ok) return verdict;

  // Lift direction: every message-model trace lifts, with identical reduct.
  for (const auto& tr : rhs) {
    LiftOutcome lift = lift_trace(tr, components, E, state_model);
    if (!lift.ok()) {
      verdict.status = EquivalenceVerdict::Status::Counterexample;
      verdict.detail = "valid message-model trace cannot be lifted: " + lift.reason;
      verdict.witness = tr;
      return verdict;
    }
    CheckResult cr = check_trace_self_seeded(state_model, *lift.trace, msgs_s);
    if (!cr.ok) {
      verdict.status = EquivalenceVerdict::Status::Counterexample;
      verdict.detail = "lifted trace is not valid in the state model: " + cr.reason;
      verdict.witness = *lift.trace;
      return verdict;
    }
    if (!(trace_reduct(*lift.trace, E, n).encode() == tr.encode())) {
      verdict.status = EquivalenceVerdict::Status::Counterexample;
      verdict.detail = "reduct of the lifted trace differs from the original";
      verdict.witness = tr;
      return verdict;
    }
  }
  verdict.status = EquivalenceVerdict::Status::Confirmed;
  verdict.detail = "fixed-set equivalence confirmed at depth " + std::to_string(depth);
  return verdict;
}

EquivalenceVerdict check_limited_equivalence(const std::vector<Vlsm>& components,
                                             const WeightMap& w, size_t depth,
                                             const EquivalenceOptions& opts) {
  const size_t n = components.size();
  std::set<int64_t> all;
  for (size_t p = 1; p <= n; ++p) all.insert(static_cast<int64_t>(p));

  Vlsm base = free_compose(components, "free");
  Vlsm state_lim = state_equiv_limited(components, w);
  Vlsm msg_lim = message_equiv_limited(components, w);

  ReachSet rs_msg = reach(msg_lim, depth, {}, opts.limits);
  std::set<Value> msgs_m = rs_msg.proper_message_set();
  ReachSet rs_state = reach(state_lim, depth, {}, opts.limits);
  std::set<Value> msgs_s = rs_state.proper_message_set();

  EquivalenceVerdict verdict;

  // Reduct direction: annotated reducts of valid state-model traces are
  // valid in the t-limited message model.
  bool ok = true;
  TraceEnumOptions senum;
  senum.max_steps = depth;
  senum.limits = opts.limits;
  for_each_valid_trace(state_lim, senum, msgs_s, [&](const Trace& tr) {
    Trace r = trace_reduct(tr, all, n);
    if (opts.full_node_filter && !check_full_node(base, r).ok) return true;
    Trace ann = annotate_trace(msg_lim, r);
    CheckResult cr = check_trace_with(msg_lim, ann, TraceMode::Valid, msgs_m);
    if (!cr.ok) {
      verdict.status = EquivalenceVerdict::Status::Counterexample;
      verdict.detail = "annotated reduct is not valid in the t-limited message "
                       "model: " + cr.reason;
      verdict.witness = r;
      ok = false;
      return false;
    }
    return true;
  });
  if (!ok) return verdict;

  // Lift direction: valid annotated traces lift through the fixed-set bridge
  // with the recorded equivocators as the allowed set.
  TraceEnumOptions menum =
      opts.full_node_filter
          ? full_node_pruned(depth, opts.limits, base,
                             [](const Value& s) { return annotated_base(s); })
          : TraceEnumOptions{depth, opts.limits, nullptr};
  for_each_valid_trace(msg_lim, menum, msgs_m, [&](const Trace& tr) {
    Trace plain = deannotate_trace(tr);
    std::set<int64_t> allowed = annotated_eqv(tr.final_state());
    LiftOutcome lift = lift_trace_impl(plain, components, allowed, all, state_lim);
    if (!lift.ok()) {
      verdict.status = EquivalenceVerdict::Status::Counterexample;
      verdict.detail = "valid t-limited message trace cannot be lifted: " + lift.reason;
      verdict.witness = tr;
      ok = false;
      return false;
    }
    CheckResult cr = check_trace_self_seeded(state_lim, *lift.trace, msgs_s);
    if (!cr.ok) {
      verdict.status = EquivalenceVerdict::Status::Counterexample;
      verdict.detail = "lifted trace is not valid in the t-limited state model: " +
                       cr.reason;
      verdict.witness = *lift.trace;
      ok = false;
      return false;
    }
    if (!(trace_reduct(*lift.trace, all, n).encode() == plain.encode())) {
      verdict.status = EquivalenceVerdict::Status::Counterexample;
      verdict.detail = "reduct of the lifted trace differs from the original";
      verdict.witness = tr;
      ok = false;
      return false;
    }
    return true;
  });
  if (!ok) return verdict;

  verdict.status = EquivalenceVerdict::Status::Confirmed;
  verdict.detail = "t-limited equivalence confirmed at depth " + std::to_string(depth);
  return verdict;
}

}  // namespace vlsm
