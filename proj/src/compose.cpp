#include "vlsm/compose.hpp"

#include <algorithm>
#include <cassert>
#include <memory>

namespace vlsm {

Value composite_state(std::vector<Value> parts) { return vlist(std::move(parts)); }

const Value& composite_part(const Value& state, size_t index1) {
  return state.at(index1 - 1);
}

Value with_composite_part(const Value& state, size_t index1, Value part) {
  std::vector<Value> xs = state.items();
  xs.at(index1 - 1) = std::move(part);
  return vlist(std::move(xs));
}

Value composite_label(size_t index1, Value inner) {
  return vlist({vint(static_cast<int64_t>(index1)), std::move(inner)});
}

size_t label_component(const Value& label) {
  return static_cast<size_t>(label.at(0).as_int());
}

const Value& label_inner(const Value& label) { return label.at(1); }

namespace {

bool composite_label_shape(const Value& l, size_t n) {
  return l.is_list() && l.size() == 2 && l.at(0).is_int() && l.at(0).as_int() >= 1 &&
         l.at(0).as_int() <= static_cast<int64_t>(n);
}

void product_states(const std::vector<Vlsm>& parts, size_t i, std::vector<Value>& acc,
                    std::vector<Value>& out) {
  if (i == parts.size()) {
    out.push_back(vlist(acc));
    return;
  }
  for (const auto& s : parts[i].initial_states) {
    acc.push_back(s);
    product_states(parts, i + 1, acc, out);
    acc.pop_back();
  }
}

}  // namespace

Vlsm free_compose(std::vector<Vlsm> components, const std::string& name) {
  if (components.empty()) {
    throw std::domain_error("free composition needs at least one component");
  }
  auto ps = std::make_shared<const std::vector<Vlsm>>(std::move(components));
  const size_t n = ps->size();

  Vlsm out;
  out.name = name.empty() ? "composite" : name;
  out.parts = *ps;

  std::vector<Value> acc;
  product_states(*ps, 0, acc, out.initial_states);

  out.is_initial_state = [ps, n](const Value& s) {
    if (!s.is_list() || s.size() != n) return false;
    for (size_t j = 0; j < n; ++j) {
      if (!(*ps)[j].is_initial_state(s.at(j))) return false;
    }
    return true;
  };

  std::set<Value> m0;
  for (const auto& c : *ps) m0.insert(c.initial_messages.begin(), c.initial_messages.end());
  out.initial_messages.assign(m0.begin(), m0.end());

  out.is_label = [ps, n](const Value& l) {
    if (!composite_label_shape(l, n)) return false;
    return (*ps)[label_component(l) - 1].is_label(label_inner(l));
  };

  out.enabled_labels = [ps, n](const Value& s) {
    std::vector<Value> labels;
    for (size_t j = 1; j <= n; ++j) {
      for (const auto& l : (*ps)[j - 1].enabled_labels(composite_part(s, j))) {
        labels.push_back(composite_label(j, l));
      }
    }
    return labels;
  };

  out.transition = [ps](const Value& l, const Value& s, const OptionMessage& in) {
    size_t j = label_component(l);
    StepResult r = (*ps)[j - 1].transition(label_inner(l), composite_part(s, j), in);
    return StepResult{with_composite_part(s, j, std::move(r.post)), r.output};
  };

  out.constraint = [ps, n](const Value& l, const Value& s, const OptionMessage& in) {
    if (!composite_label_shape(l, n)) return false;
    size_t j = label_component(l);
    return (*ps)[j - 1].constraint(label_inner(l), composite_part(s, j), in);
  };

  for (const auto& c : *ps) {
    if (c.oracles.sender && !out.oracles.sender) out.oracles.sender = c.oracles.sender;
    if (c.oracles.dependencies && !out.oracles.dependencies)
      out.oracles.dependencies = c.oracles.dependencies;
  }
  out.oracles.has_been_sent = [ps, n](const Value& s, const Value& msg) {
    for (size_t j = 0; j < n; ++j) {
      const auto& o = (*ps)[j].oracles.has_been_sent;
      if (o && o(s.at(j), msg)) return true;
    }
    return false;
  };
  out.oracles.has_been_received = [ps, n](const Value& s, const Value& msg) {
    for (size_t j = 0; j < n; ++j) {
      const auto& o = (*ps)[j].oracles.has_been_received;
      if (o && o(s.at(j), msg)) return true;
    }
    return false;
  };
  out.oracles.observed_messages = [ps, n](const Value& s) {
    std::set<Value> seen;
    for (size_t j = 0; j < n; ++j) {
      const auto& o = (*ps)[j].oracles.observed_messages;
      if (!o) continue;
      for (auto& m : o(s.at(j))) seen.insert(std::move(m));
    }
    return std::vector<Value>(seen.begin(), seen.end());
  };
  return out;
}

Vlsm constrain(Vlsm composite, CompositionConstraint phi, const std::string& name) {
  auto base = composite.constraint;
  composite.constraint = [base, phi](const Value& l, const Value& s,
                                     const OptionMessage& in) {
    return base(l, s, in) && phi(l, s, in);
  };
  if (!name.empty()) composite.name = name;
  return composite;
}

Trace project_trace(const Trace& composite_trace, size_t j) {
  Trace out;
  out.start = composite_part(composite_trace.start, j);
  for (const auto& st : composite_trace.steps) {
    if (label_component(st.label) != j) continue;
    out.steps.push_back(TransitionRecord{label_inner(st.label),
                                         composite_part(st.pre, j), st.input,
                                         composite_part(st.post, j), st.output});
  }
  return out;
}

Vlsm induced_projection(const Vlsm& composite, size_t j, size_t depth,
                        const Limits& limits) {
  Vlsm out = composite.parts.at(j - 1);
  ReachSet rs = reach(composite, depth, {}, limits);
  out.initial_messages = rs.proper_messages();
  out.name = "proj" + std::to_string(j) + "(" + composite.name + ")";
  return out;
}

SoloEmissionIndex::SoloEmissionIndex(const Vlsm& composite, size_t depth,
                                     const Limits& limits)
    : composite_(composite),
      depth_(depth),
      limits_(limits),
      reach_(reach(composite, depth, {}, limits)) {}

bool SoloEmissionIndex::message_valid(const Value& msg) {
  if (reach_.has_message(OptionMessage::proper(msg))) return true;
  return emit_check(msg, 64);
}

std::optional<Trace> SoloEmissionIndex::solo_witness(const Value& msg) {
  if (!emit_check(msg, 64)) return std::nullopt;
  auto it = witness_memo_.find(msg);
  if (it == witness_memo_.end()) return std::nullopt;
  return it->second;
}

bool SoloEmissionIndex::emit_check(const Value& msg, size_t recursion_guard) {
  auto it = memo_.find(msg);
  if (it != memo_.end()) return it->second;
  if (recursion_guard == 0) return false;
  memo_[msg] = false;  // breaks dependency cycles

  if (!composite_.oracles.sender) return false;
  Value addr = composite_.oracles.sender(msg);
  if (!addr.is_int() || addr.as_int() < 1 ||
      addr.as_int() > static_cast<int64_t>(composite_.parts.size())) {
    return false;
  }
  size_t p = static_cast<size_t>(addr.as_int());
  const Vlsm& comp = composite_.parts[p - 1];
  if (!comp.emission_recipe) return false;
  auto recipe = comp.emission_recipe(msg);
  if (!recipe) return false;
  if (recipe->steps.empty() ||
      recipe->steps.back().output != OptionMessage::proper(msg)) {
    return false;
  }

  // Replay the component recipe with all other parts idle at their first
  // initial state; every input must itself be valid.
  std::vector<Value> parts;
  for (size_t k = 0; k < composite_.parts.size(); ++k) {
    if (composite_.parts[k].initial_states.empty()) return false;
    parts.push_back(k + 1 == p ? recipe->start
                               : composite_.parts[k].initial_states.front());
  }
  if (!comp.is_initial_state(recipe->start)) return false;
  Value sigma = composite_state(parts);
  Trace witness{sigma, {}};
  for (const auto& st : recipe->steps) {
    if (st.input.is_proper()) {
      bool in_ok = reach_.has_message(st.input) ||
                   emit_check(st.input.message(), recursion_guard - 1);
      if (!in_ok) return false;
    }
    Value cl = composite_label(p, st.label);
    if (!is_constrained(composite_, cl, sigma, st.input)) return false;
    StepResult r = composite_.transition(cl, sigma, st.input);
    if (composite_part(r.post, p) != st.post || !(r.output == st.output)) return false;
    witness.steps.push_back(TransitionRecord{cl, sigma, st.input, r.post, r.output});
    sigma = r.post;
  }
  memo_[msg] = true;
  witness_memo_[msg] = std::move(witness);
  return true;
}

ValidatorVerdict is_validator(const Vlsm& composite, size_t j, size_t depth,
                              const ValidatorOptions& opts) {
  if (composite.parts.empty()) {
    throw std::domain_error("is_validator requires a composition");
  }
  const Vlsm& comp = composite.parts.at(j - 1);

  SoloEmissionIndex idx(composite, depth, opts.limits);
  std::set<Value> pool_set;
  for (const auto& m : idx.reach_set().proper_messages()) pool_set.insert(m);
  for (const auto& m : opts.probes) pool_set.insert(m);
  std::vector<Value> pool(pool_set.begin(), pool_set.end());

  // Fallback index over valid composite states, keyed by part j.
  std::map<Value, std::vector<Value>> by_part;
  for (const auto& sigma : idx.reach_set().states) {
    by_part[composite_part(sigma, j)].push_back(sigma);
  }

  ValidatorVerdict verdict;
  verdict.depth = depth;

  auto solo_embed_valid = [&](const Trace& comp_tr) -> std::optional<Trace> {
    std::vector<Value> parts;
    for (size_t k = 0; k < composite.parts.size(); ++k) {
      if (composite.parts[k].initial_states.empty()) return std::nullopt;
      parts.push_back(k + 1 == j ? comp_tr.start
                                 : composite.parts[k].initial_states.front());
    }
    Value sigma = composite_state(parts);
    Trace out{sigma, {}};
    for (const auto& st : comp_tr.steps) {
      if (st.input.is_proper() && !idx.message_valid(st.input.message())) {
        return std::nullopt;
      }
      Value cl = composite_label(j, st.label);
      if (!is_constrained(composite, cl, sigma, st.input)) return std::nullopt;
      StepResult r = composite.transition(cl, sigma, st.input);
      out.steps.push_back(TransitionRecord{cl, sigma, st.input, r.post, r.output});
      sigma = r.post;
    }
    return out;
  };

  std::vector<OptionMessage> inputs;
  inputs.push_back(OptionMessage::none());
  for (const auto& m : pool) inputs.push_back(OptionMessage::proper(m));

  // Checks every constrained transition from one constrained state; returns
  // false on the first failure.
  auto check_state = [&](const Value& s, const Trace& tr_s) {
    std::optional<Trace> solo = solo_embed_valid(tr_s);
    std::vector<Value> labels = comp.enabled_labels(s);
    std::sort(labels.begin(), labels.end());
    for (const auto& l : labels) {
      for (const auto& in : inputs) {
        if (!comp.constraint(l, s, in)) continue;

        bool lifted = false;
        Trace witness;
        bool input_valid = !in.is_proper() || idx.message_valid(in.message());
        if (input_valid && solo) {
          Value cl = composite_label(j, l);
          if (is_constrained(composite, cl, solo->final_state(), in)) {
            lifted = true;
            if (opts.collect_witnesses) {
              witness = *solo;
              StepResult r = composite.transition(cl, solo->final_state(), in);
              witness.steps.push_back(
                  TransitionRecord{cl, solo->final_state(), in, r.post, r.output});
            }
          }
        }
        if (!lifted && input_valid) {
          auto it = by_part.find(s);
          if (it != by_part.end()) {
            for (const auto& sigma : it->second) {
              if (is_constrained(composite, composite_label(j, l), sigma, in)) {
                lifted = true;
                break;
              }
            }
          }
        }
        if (!lifted) {
          verdict.counterexample = ValidatorCounterexample{s, l, in};
          return false;
        }
        if (opts.collect_witnesses) {
          if (!witness.steps.empty()) {
            verdict.witnesses.push_back(LiftWitness{s, l, in, witness});
          } else {
            ++verdict.unwitnessed;
          }
        }
      }
    }
    return true;
  };

  // Enumerate constrained states breadth-first by trace length, checking each
  // new state as it appears so failures surface without materializing the
  // whole state set.
  std::set<Value> seen;
  for (size_t len = 0; len <= depth; ++len) {
    bool ok = true;
    TraceEnumOptions eopts;
    eopts.max_steps = len;
    eopts.limits = opts.limits;
    for_each_constrained_trace(comp, eopts, pool, [&](const Trace& tr) {
      if (tr.steps.size() != len) return true;
      if (!seen.insert(tr.final_state()).second) return true;
      if (!check_state(tr.final_state(), tr)) {
        ok = false;
        return false;
      }
      return true;
    });
    if (!ok) {
      verdict.confirmed = false;
      return verdict;
    }
  }
  verdict.confirmed = true;
  return verdict;
}

Vlsm induced_validator(const Vlsm& composite, size_t j, size_t depth,
                       const Limits& limits) {
  auto idx = std::make_shared<SoloEmissionIndex>(composite, depth, limits);
  auto comp_ptr = std::make_shared<const Vlsm>(composite);
  auto by_part = std::make_shared<std::map<Value, std::vector<Value>>>();
  for (const auto& sigma : idx->reach_set().states) {
    (*by_part)[composite_part(sigma, j)].push_back(sigma);
  }

  Vlsm out = composite.parts.at(j - 1);
  out.name = "validator" + std::to_string(j) + "(" + composite.name + ")";
  out.constraint = [idx, comp_ptr, by_part, j](const Value& l, const Value& s,
                                               const OptionMessage& in) {
    if (in.is_proper() && !idx->message_valid(in.message())) return false;
    auto it = by_part->find(s);
    if (it == by_part->end()) return false;
    for (const auto& sigma : it->second) {
      if (is_constrained(*comp_ptr, composite_label(j, l), sigma, in)) return true;
    }
    return false;
  };
  return out;
}

}  // namespace vlsm
