#include "vlsm/byzantine.hpp"

#include <algorithm>
#include <map>
#include <memory>

#include "vlsm/equivocation.hpp"

namespace vlsm {

Vlsm byzantine_component(int64_t address, std::vector<Value> universe,
                         const Oracles& message_oracles) {
  auto uni = std::make_shared<const std::vector<Value>>(std::move(universe));
  auto sender = message_oracles.sender;

  Vlsm m;
  m.name = "byzantine" + std::to_string(address);
  Value only_state = vsym("byz");
  m.initial_states = {only_state};
  m.is_initial_state = [only_state](const Value& s) { return s == only_state; };
  m.initial_messages = {};
  m.is_label = [uni](const Value& l) {
    return std::find(uni->begin(), uni->end(), l) != uni->end();
  };
  m.enabled_labels = [uni](const Value&) { return *uni; };
  m.transition = [](const Value& l, const Value& s, const OptionMessage&) {
    return StepResult{s, OptionMessage::proper(l)};
  };
  m.constraint = [sender, address](const Value& l, const Value&, const OptionMessage&) {
    return sender && sender(l).is_int() && sender(l).as_int() == address;
  };

  m.oracles.sender = message_oracles.sender;
  m.oracles.dependencies = message_oracles.dependencies;
  // Any message attributed to this address counts as sent: a Byzantine
  // component can emit it at any time, on any trace.
  m.oracles.has_been_sent = [sender, address](const Value&, const Value& msg) {
    return sender && sender(msg).is_int() && sender(msg).as_int() == address;
  };
  m.oracles.has_been_received = [](const Value&, const Value&) { return false; };
  m.oracles.observed_messages = [](const Value&) { return std::vector<Value>{}; };
  m.emission_recipe = [only_state, sender, address,
                       uni](const Value& msg) -> std::optional<Trace> {
    if (!sender || !sender(msg).is_int() || sender(msg).as_int() != address) {
      return std::nullopt;
    }
    if (std::find(uni->begin(), uni->end(), msg) == uni->end()) return std::nullopt;
    Trace tr{only_state, {}};
    tr.steps.push_back(TransitionRecord{msg, only_state, OptionMessage::none(),
                                        only_state, OptionMessage::proper(msg)});
    return tr;
  };
  return m;
}

Vlsm byzantine_composition(std::vector<Vlsm> components, const std::set<int64_t>& B,
                           const std::vector<Value>& universe) {
  const size_t n = components.size();
  Oracles msg_oracles;
  for (const auto& c : components) {
    if (c.oracles.sender) {
      msg_oracles = c.oracles;
      break;
    }
  }
  std::vector<Vlsm> parts;
  for (size_t i = 1; i <= n; ++i) {
    if (B.count(static_cast<int64_t>(i))) {
      parts.push_back(
          byzantine_component(static_cast<int64_t>(i), universe, msg_oracles));
    } else {
      parts.push_back(components[i - 1]);
    }
  }
  Vlsm free = free_compose(std::move(parts), "byzantine_composition");
  auto free_ptr = std::make_shared<const Vlsm>(free);
  std::set<int64_t> byz = B;
  CompositionConstraint phi = [free_ptr, byz](const Value& l, const Value& sigma,
                                              const OptionMessage& in) {
    if (!in.is_proper()) return true;
    size_t j = label_component(l);
    if (byz.count(static_cast<int64_t>(j))) return true;
    if (!free_ptr->oracles.sender) return false;
    Value a = free_ptr->oracles.sender(in.message());
    if (!a.is_int() || a.as_int() < 1 ||
        a.as_int() > static_cast<int64_t>(free_ptr->parts.size())) {
      return false;
    }
    size_t p = static_cast<size_t>(a.as_int());
    const auto& o = free_ptr->parts[p - 1].oracles.has_been_sent;
    return o && o(sigma.at(p - 1), in.message());
  };
  return constrain(std::move(free), phi, "byzantine_composition");
}

std::vector<Trace> exposed_traces(const Vlsm& composition, size_t j, size_t depth,
                                  const Limits& limits) {
  Vlsm proj = induced_projection(composition, j, depth, limits);
  std::set<Value> valid(proj.initial_messages.begin(), proj.initial_messages.end());
  return collect_valid_traces(proj, depth, valid, limits);
}

std::optional<Trace> find_full_node_violation(const Vlsm& component, size_t depth,
                                              const std::vector<Value>& pool,
                                              const Limits& limits) {
  std::optional<Trace> found;
  TraceEnumOptions opts;
  opts.max_steps = depth;
  opts.limits = limits;
  for_each_constrained_trace(component, opts, pool, [&](const Trace& tr) {
    if (!tr.steps.empty() && !check_full_node(component, tr).ok) {
      found = tr;
      return false;
    }
    return true;
  });
  return found;
}

namespace {

std::string describe_counterexample(const std::string& who,
                                    const ValidatorCounterexample& ce) {
  return who + " is not a validator: no lift for (" + ce.state.repr() + ", " +
         ce.label.repr() + ", " + ce.input.repr() + ")";
}

}  // namespace

EquivalenceVerdict check_fixed_byzantine(const std::vector<Vlsm>& components,
                                         const std::set<int64_t>& B, size_t depth,
                                         const ByzantineCheckOptions& opts) {
  const size_t n = components.size();
  EquivalenceVerdict verdict;

  // Precondition gate: honest components must validate their inputs against
  // the composition. Components that accept junk (no full-node discipline,
  // no structural validation) fail here.
  Vlsm free = free_compose(components, "free");
  for (size_t j = 1; j <= n; ++j) {
    if (B.count(static_cast<int64_t>(j))) continue;
    ValidatorOptions vopts;
    vopts.probes = opts.probes;
    vopts.limits = opts.limits;
    ValidatorVerdict vv = is_validator(free, j, depth, vopts);
    if (!vv.confirmed) {
      verdict.status = EquivalenceVerdict::Status::PreconditionFailed;
      verdict.detail = describe_counterexample(
          "component " + std::to_string(j), *vv.counterexample);
      ReachSet rs = reach(free, depth, {}, opts.limits);
      std::vector<Value> pool = rs.proper_messages();
      pool.insert(pool.end(), opts.probes.begin(), opts.probes.end());
      auto viol = find_full_node_violation(components[j - 1], depth, pool, opts.limits);
      if (viol) {
        auto cr = check_full_node(components[j - 1], *viol);
        verdict.detail += "; full-node check fails at step " +
                          std::to_string(cr.fail_index) + " of a depth-" +
                          std::to_string(viol->steps.size()) + " constrained trace";
        verdict.witness = *viol;
      }
      return verdict;
    }
  }

  // The Byzantine label universe: everything the equivocation model can
  // produce at this depth.
  Vlsm eqv_model = message_equiv_fixed(components, B);
  ReachSet rs_eqv = reach(eqv_model, depth, {}, opts.limits);
  Vlsm byz_model = byzantine_composition(components, B, rs_eqv.proper_messages());

  for (size_t j = 1; j <= n; ++j) {
    if (B.count(static_cast<int64_t>(j))) continue;
    auto byz_traces = exposed_traces(byz_model, j, depth, opts.limits);
    auto eqv_traces = exposed_traces(eqv_model, j, depth, opts.limits);
    std::set<Value> lhs = trace_set(byz_traces);
    std::set<Value> rhs = trace_set(eqv_traces);
    if (lhs != rhs) {
      verdict.status = EquivalenceVerdict::Status::Counterexample;
      verdict.detail = "exposed traces of component " + std::to_string(j) +
                       " differ between the Byzantine and equivocation models";
      for (const auto& tr : byz_traces) {
        if (!rhs.count(tr.encode())) {
          verdict.witness = tr;
          break;
        }
      }
      if (!verdict.witness) {
        for (const auto& tr : eqv_traces) {
          if (!lhs.count(tr.encode())) {
            verdict.witness = tr;
            break;
          }
        }
      }
      return verdict;
    }
  }
  verdict.status = EquivalenceVerdict::Status::Confirmed;
  verdict.detail = "fixed-set Byzantine equivalence confirmed at depth " +
                   std::to_string(depth);
  return verdict;
}

namespace {

// Message validity in the annotated t-limited model: reach membership first,
// then a solo emission replay that lets the annotation absorb phantoms.
struct AnnotatedValidity {
  const Vlsm& annotated;
  const std::vector<Vlsm>& components;
  const ReachSet& rs;
  std::map<Value, bool> memo;

  bool valid(const Value& msg, size_t guard = 32) {
    if (rs.has_message(OptionMessage::proper(msg))) return true;
    auto it = memo.find(msg);
    if (it != memo.end()) return it->second;
    if (guard == 0) return false;
    memo[msg] = false;
    if (!annotated.oracles.sender) return false;
    Value a = annotated.oracles.sender(msg);
    if (!a.is_int() || a.as_int() < 1 ||
        a.as_int() > static_cast<int64_t>(components.size())) {
      return false;
    }
    size_t p = static_cast<size_t>(a.as_int());
    const Vlsm& comp = components[p - 1];
    if (!comp.emission_recipe) return false;
    auto recipe = comp.emission_recipe(msg);
    if (!recipe) return false;

    std::vector<Value> parts;
    for (size_t k = 0; k < components.size(); ++k) {
      if (components[k].initial_states.empty()) return false;
      parts.push_back(k + 1 == p ? recipe->start
                                 : components[k].initial_states.front());
    }
    Value cur = annotated_state(composite_state(parts), {});
    for (const auto& st : recipe->steps) {
      if (st.input.is_proper() && !valid(st.input.message(), guard - 1)) return false;
      Value cl = composite_label(p, st.label);
      if (!is_constrained(annotated, cl, cur, st.input)) return false;
      cur = annotated.transition(cl, cur, st.input).post;
    }
    memo[msg] = true;
    return true;
  }
};

}  // namespace

std::optional<std::string> t_limited_validator_flaw(
    const std::vector<Vlsm>& components, const WeightMap& w, size_t depth,
    const ByzantineCheckOptions& opts) {
  const size_t n = components.size();
  Vlsm annotated = message_equiv_limited(components, w);
  // Embedding witnesses interleave the component's own steps with the
  // emissions that make its inputs valid, so search a little deeper.
  ReachSet rs = reach(annotated, depth + 2, {}, opts.limits);
  AnnotatedValidity av{annotated, components, rs, {}};

  std::set<Value> pool_set;
  for (const auto& m : rs.proper_messages()) pool_set.insert(m);
  for (const auto& m : opts.probes) pool_set.insert(m);
  std::vector<Value> pool(pool_set.begin(), pool_set.end());

  for (size_t i = 1; i <= n; ++i) {
    const Vlsm& comp = components[i - 1];
    std::vector<OptionMessage> inputs;
    inputs.push_back(OptionMessage::none());
    for (const auto& m : pool) inputs.push_back(OptionMessage::proper(m));

    // Whatever the component's own constraint accepts must be producible
    // within the weight budget of the annotated model.
    auto check_state = [&](const Value& s) -> std::optional<std::string> {
      std::vector<Value> labels = comp.enabled_labels(s);
      std::sort(labels.begin(), labels.end());
      for (const auto& l : labels) {
        for (const auto& in : inputs) {
          if (!in.is_proper()) continue;
          if (!comp.constraint(l, s, in)) continue;
          if (!av.valid(in.message())) {
            return "component " + std::to_string(i) +
                   " accepts an input that is not valid in the t-limited "
                   "message model: " + in.message().repr();
          }
        }
      }
      return std::nullopt;
    };

    std::optional<std::string> flaw;
    std::set<Value> seen;
    for (size_t len = 0; len <= depth && !flaw; ++len) {
      TraceEnumOptions eopts;
      eopts.max_steps = len;
      eopts.limits = opts.limits;
      for_each_constrained_trace(comp, eopts, pool, [&](const Trace& tr) {
        if (tr.steps.size() != len) return true;
        if (!seen.insert(tr.final_state()).second) return true;
        flaw = check_state(tr.final_state());
        return !flaw.has_value();
      });
    }
    if (flaw) return flaw;
  }
  return std::nullopt;
}

namespace {

// Replays an annotated-model trace inside a Byzantine composition: honest
// steps are kept, faulty sends become Byzantine emissions, faulty receives
// disappear.
std::optional<Trace> byzantine_witness(const Vlsm& byz_model, const Trace& plain,
                                       const std::set<int64_t>& B) {
  if (byz_model.initial_states.empty()) return std::nullopt;
  Value cur = byz_model.initial_states.front();
  Trace out{cur, {}};
  for (const auto& st : plain.steps) {
    size_t j = label_component(st.label);
    if (B.count(static_cast<int64_t>(j))) {
      if (!st.output.is_proper()) continue;  // faulty receive: no effect
      Value cl = composite_label(j, st.output.message());
      if (!is_constrained(byz_model, cl, cur, OptionMessage::none())) {
        return std::nullopt;
      }
      StepResult r = byz_model.transition(cl, cur, OptionMessage::none());
      out.steps.push_back(
          TransitionRecord{cl, cur, OptionMessage::none(), r.post, r.output});
      cur = r.post;
      continue;
    }
    if (!is_constrained(byz_model, st.label, cur, st.input)) return std::nullopt;
    StepResult r = byz_model.transition(st.label, cur, st.input);
    out.steps.push_back(TransitionRecord{st.label, cur, st.input, r.post, r.output});
    cur = r.post;
  }
  return out;
}

std::vector<std::set<int64_t>> limited_subsets(size_t n, const WeightMap& w) {
  std::vector<std::set<int64_t>> out;
  size_t count = size_t{1} << n;
  for (size_t bits = 0; bits < count; ++bits) {
    std::set<int64_t> B;
    for (size_t i = 0; i < n; ++i) {
      if (bits & (size_t{1} << i)) B.insert(static_cast<int64_t>(i + 1));
    }
    if (w.weight_of(B) < w.threshold) out.push_back(B);
  }
  return out;
}

}  // namespace

EquivalenceVerdict check_limited_byzantine(const std::vector<Vlsm>& components,
                                           const WeightMap& w, size_t depth,
                                           const ByzantineCheckOptions& opts) {
  const size_t n = components.size();
  EquivalenceVerdict verdict;

  if (auto flaw = t_limited_validator_flaw(components, w, depth, opts)) {
    verdict.status = EquivalenceVerdict::Status::PreconditionFailed;
    verdict.detail = *flaw;
    std::vector<Value> pool = opts.probes;
    for (size_t i = 0; i < n && !verdict.witness; ++i) {
      if (auto viol = find_full_node_violation(components[i], depth, pool, opts.limits)) {
        verdict.detail += "; full-node check fails on a depth-" +
                          std::to_string(viol->steps.size()) + " trace of component " +
                          std::to_string(i + 1);
        verdict.witness = *viol;
      }
    }
    return verdict;
  }

  Vlsm annotated = message_equiv_limited(components, w);
  ReachSet rs_ann = reach(annotated, depth, {}, opts.limits);
  std::set<Value> msgs_ann = rs_ann.proper_message_set();

  // Non-equivocating projections of the annotated model, per component, with
  // one originating trace each for the witness construction.
  std::vector<std::map<Value, Trace>> rhs(n);
  TraceEnumOptions aopts;
  aopts.max_steps = depth;
  aopts.limits = opts.limits;
  for_each_valid_trace(annotated, aopts, msgs_ann, [&](const Trace& tr) {
    std::set<int64_t> eqv = annotated_eqv(tr.final_state());
    Trace plain = deannotate_trace(tr);
    for (size_t j = 1; j <= n; ++j) {
      if (eqv.count(static_cast<int64_t>(j))) continue;
      Trace pj = project_trace(plain, j);
      rhs[j - 1].emplace(pj.encode(), plain);
    }
    return true;
  });

  auto subsets = limited_subsets(n, w);
  std::map<Value, Vlsm> byz_models;  // keyed by encoded B

  auto byz_for = [&](const std::set<int64_t>& B) -> const Vlsm& {
    std::vector<Value> key;
    for (int64_t b : B) key.push_back(vint(b));
    Value k = vlist(key);
    auto it = byz_models.find(k);
    if (it == byz_models.end()) {
      it = byz_models
               .emplace(k, byzantine_composition(components, B,
                                                 rs_ann.proper_messages()))
               .first;
    }
    return it->second;
  };

  // Byzantine projections are covered by the annotated model.
  for (const auto& B : subsets) {
    const Vlsm& byz = byz_for(B);
    ReachSet rs_byz = reach(byz, depth, {}, opts.limits);
    std::set<Value> msgs_byz = rs_byz.proper_message_set();
    TraceEnumOptions bopts;
    bopts.max_steps = depth;
    bopts.limits = opts.limits;
    // Byzantine transitions ignore their input, so restricting them to the
    // no-message input is a sound symmetry reduction for projections.
    std::set<int64_t> Bcopy = B;
    bopts.step_filter = [Bcopy](const Trace&, const Value& label,
                                const OptionMessage& input) {
      size_t j = label_component(label);
      return !Bcopy.count(static_cast<int64_t>(j)) || !input.is_proper();
    };
    bool ok = true;
    for_each_valid_trace(byz, bopts, msgs_byz, [&](const Trace& tr) {
      for (size_t j = 1; j <= n; ++j) {
        if (B.count(static_cast<int64_t>(j))) continue;
        Trace pj = project_trace(tr, j);
        if (!rhs[j - 1].count(pj.encode())) {
          verdict.status = EquivalenceVerdict::Status::Counterexample;
          verdict.detail = "Byzantine projection of component " + std::to_string(j) +
                           " is not a t-limited equivocation behaviour";
          verdict.witness = pj;
          ok = false;
          return false;
        }
      }
      return true;
    });
    if (!ok) return verdict;
  }

  // Annotated projections are realizable against Byzantine adversaries.
  for (size_t j = 1; j <= n; ++j) {
    for (const auto& [enc, plain] : rhs[j - 1]) {
      // The adversary set: every component that steps outside j's projection
      // could be faulty; use the senders recorded as equivocating on the
      // originating trace.
      Trace ann = annotate_trace(annotated, plain);
      std::set<int64_t> B = annotated_eqv(ann.final_state());
      B.erase(static_cast<int64_t>(j));
      if (!(w.weight_of(B) < w.threshold)) continue;
      const Vlsm& byz = byz_for(B);
      auto witness = byzantine_witness(byz, plain, B);
      if (!witness) {
        verdict.status = EquivalenceVerdict::Status::Counterexample;
        verdict.detail = "t-limited equivocation behaviour of component " +
                         std::to_string(j) + " has no Byzantine realization";
        verdict.witness = plain;
        return verdict;
      }
      std::set<Value> seed;
      for (const auto& m : rs_ann.proper_messages()) {
        Value a = annotated.oracles.sender(m);
        if (a.is_int() && B.count(a.as_int())) seed.insert(m);
      }
      CheckResult cr = check_trace_self_seeded(byz, *witness, seed);
      if (!cr.ok) {
        verdict.status = EquivalenceVerdict::Status::Counterexample;
        verdict.detail = "Byzantine realization of a t-limited behaviour is not "
                         "valid: " + cr.reason;
        verdict.witness = *witness;
        return verdict;
      }
      if (!(project_trace(*witness, j).encode() ==
            project_trace(plain, j).encode())) {
        verdict.status = EquivalenceVerdict::Status::Counterexample;
        verdict.detail = "Byzantine realization changes the projection of "
                         "component " + std::to_string(j);
        verdict.witness = *witness;
        return verdict;
      }
    }
  }

  verdict.status = EquivalenceVerdict::Status::Confirmed;
  verdict.detail = "t-limited Byzantine equivalence confirmed at depth " +
                   std::to_string(depth);
  return verdict;
}

}  // namespace vlsm
