#include "vlsm/umo.hpp"

#include <algorithm>
#include <deque>

#include "vlsm/compose.hpp"

namespace vlsm {

Rational WeightMap::weight_of(const std::set<int64_t>& addrs) const {
  Rational sum{0};
  for (int64_t a : addrs) {
    auto it = weight.find(a);
    if (it != weight.end()) sum += it->second;
  }
  return sum;
}

WeightMap WeightMap::uniform(int64_t n, Rational w, Rational t) {
  WeightMap wm;
  wm.threshold = t;
  for (int64_t a = 1; a <= n; ++a) wm.weight[a] = w;
  return wm;
}

Value umo_state(int64_t addr, std::vector<Value> obs) {
  return vlist({vint(addr), vlist(std::move(obs))});
}

Value umo_initial(int64_t addr) { return umo_state(addr, {}); }

Value umo_observation(const std::string& kind, Value msg) {
  return vlist({vsym(kind), std::move(msg)});
}

bool is_umo_state(const Value& v) {
  if (!v.is_list() || v.size() != 2 || !v.at(0).is_int() || !v.at(1).is_list())
    return false;
  for (const auto& ob : v.at(1).items()) {
    if (!ob.is_list() || ob.size() != 2 || !ob.at(0).is_sym()) return false;
    const std::string& k = ob.at(0).as_sym();
    if (k != "send" && k != "receive") return false;
    if (!is_umo_state(ob.at(1))) return false;
  }
  return true;
}

int64_t umo_addr(const Value& v) { return v.at(0).as_int(); }

const std::vector<Value>& umo_obs(const Value& v) { return v.at(1).items(); }

Value umo_append(const Value& state, const Value& observation) {
  std::vector<Value> obs = umo_obs(state);
  obs.push_back(observation);
  return umo_state(umo_addr(state), std::move(obs));
}

namespace {

const std::string kSend = "send";
const std::string kReceive = "receive";

bool obs_kind_is(const Value& ob, const std::string& k) {
  return ob.at(0).as_sym() == k;
}
const Value& obs_msg(const Value& ob) { return ob.at(1); }

}  // namespace

std::set<Value> sent_messages(const Value& state) {
  std::set<Value> out;
  for (const auto& ob : umo_obs(state)) {
    if (obs_kind_is(ob, kSend)) out.insert(obs_msg(ob));
  }
  return out;
}

std::set<Value> received_messages(const Value& state) {
  std::set<Value> out;
  for (const auto& ob : umo_obs(state)) {
    if (obs_kind_is(ob, kReceive)) out.insert(obs_msg(ob));
  }
  return out;
}

std::set<Value> messages(const Value& state) {
  std::set<Value> out = sent_messages(state);
  auto r = received_messages(state);
  out.insert(r.begin(), r.end());
  return out;
}

namespace {

size_t umo_node_count(const Value& v) {
  size_t sz = 1;
  for (const auto& ob : umo_obs(v)) sz += 1 + umo_node_count(ob.at(1));
  return sz;
}

}  // namespace

std::vector<Value> umo_structural_states(int64_t n, size_t max_nodes) {
  std::set<Value> all;
  if (max_nodes >= 1) {
    for (int64_t a = 1; a <= n; ++a) all.insert(umo_initial(a));
  }
  // Every state arises by appending one observation to a smaller state, so a
  // pairwise-extension fixpoint enumerates the full size-bounded universe.
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Value> cur(all.begin(), all.end());
    for (const auto& s : cur) {
      size_t ssz = umo_node_count(s);
      for (const auto& m : cur) {
        size_t total = ssz + 1 + umo_node_count(m);
        if (total > max_nodes) continue;
        for (const char* kind : {"send", "receive"}) {
          if (all.insert(umo_append(s, umo_observation(kind, m))).second) {
            changed = true;
          }
        }
      }
    }
  }
  return std::vector<Value>(all.begin(), all.end());
}

Value countdown_state(int64_t n, int64_t i) { return vlist({vint(n), vint(i)}); }

Vlsm countdown(int64_t max_initial) {
  Vlsm m;
  m.name = "countdown";
  for (int64_t n = 0; n <= max_initial; ++n) {
    m.initial_states.push_back(countdown_state(n, n));
  }
  m.is_initial_state = [](const Value& s) {
    return s.is_list() && s.size() == 2 && s.at(0).is_int() && s.at(1).is_int() &&
           s.at(0) == s.at(1) && s.at(0).as_int() >= 0;
  };
  m.initial_messages = {vint(2)};
  m.is_label = [](const Value& l) { return l.is_sym() && l.as_sym() == "d"; };
  m.enabled_labels = [](const Value&) { return std::vector<Value>{vsym("d")}; };
  m.transition = [](const Value&, const Value& s, const OptionMessage& in) {
    if (!in.is_proper()) return StepResult{s, OptionMessage::none()};
    int64_t j = in.message().as_int();
    return StepResult{countdown_state(s.at(0).as_int(), s.at(1).as_int() - j),
                      OptionMessage::proper(vint(2 * j))};
  };
  m.constraint = [](const Value&, const Value& s, const OptionMessage& in) {
    if (!in.is_proper() || !in.message().is_int()) return false;
    int64_t j = in.message().as_int();
    return s.at(1).as_int() >= j && j >= 1;
  };
  return m;
}

namespace {

StepResult umo_transition(const Value& l, const Value& s, const OptionMessage& in) {
  const std::string& lab = l.as_sym();
  if (lab == kSend) {
    if (in.is_proper()) return StepResult{s, in};
    return StepResult{umo_append(s, umo_observation(kSend, s)),
                      OptionMessage::proper(s)};
  }
  if (!in.is_proper()) return StepResult{s, OptionMessage::none()};
  return StepResult{umo_append(s, umo_observation(kReceive, in.message())),
                    OptionMessage::none()};
}

bool umo_beta(const Value& l, const OptionMessage& in) {
  const std::string& lab = l.as_sym();
  return (lab == kSend && !in.is_proper()) || (lab == kReceive && in.is_proper());
}

Vlsm observer_base(int64_t address, const std::string& name) {
  Vlsm m;
  m.name = name + std::to_string(address);
  m.initial_states = {umo_initial(address)};
  m.is_initial_state = [address](const Value& s) {
    return is_umo_state(s) && umo_addr(s) == address && umo_obs(s).empty();
  };
  m.is_label = [](const Value& l) {
    return l.is_sym() && (l.as_sym() == kSend || l.as_sym() == kReceive);
  };
  m.enabled_labels = [](const Value&) {
    return std::vector<Value>{vsym(kReceive), vsym(kSend)};
  };
  m.transition = [](const Value& l, const Value& s, const OptionMessage& in) {
    return umo_transition(l, s, in);
  };

  m.oracles.sender = [](const Value& msg) { return vint(umo_addr(msg)); };
  m.oracles.dependencies = [](const Value& msg) {
    auto ms = messages(msg);
    return std::vector<Value>(ms.begin(), ms.end());
  };
  m.oracles.has_been_sent = [](const Value& s, const Value& msg) {
    for (const auto& ob : umo_obs(s)) {
      if (obs_kind_is(ob, kSend) && obs_msg(ob) == msg) return true;
    }
    return false;
  };
  m.oracles.has_been_received = [](const Value& s, const Value& msg) {
    for (const auto& ob : umo_obs(s)) {
      if (obs_kind_is(ob, kReceive) && obs_msg(ob) == msg) return true;
    }
    return false;
  };
  m.oracles.observed_messages = [](const Value& s) {
    auto ms = messages(s);
    return std::vector<Value>(ms.begin(), ms.end());
  };

  m.state_to_trace = [](const Value& s) -> std::optional<Trace> {
    if (!is_umo_state(s)) return std::nullopt;
    return extract_trace(s);
  };
  // Emitting a message means sending from the state that equals the message:
  // replay its history, then send once more.
  m.emission_recipe = [address](const Value& msg) -> std::optional<Trace> {
    if (!is_umo_state(msg) || umo_addr(msg) != address) return std::nullopt;
    Trace tr;
    try {
      tr = extract_trace(msg);
    } catch (const ExtractionError&) {
      return std::nullopt;
    }
    StepResult r = umo_transition(vsym(kSend), msg, OptionMessage::none());
    tr.steps.push_back(
        TransitionRecord{vsym(kSend), msg, OptionMessage::none(), r.post, r.output});
    return tr;
  };
  return m;
}

}  // namespace

Vlsm umo_component(int64_t address) {
  Vlsm m = observer_base(address, "umo");
  m.constraint = [](const Value& l, const Value&, const OptionMessage& in) {
    return umo_beta(l, in);
  };
  return m;
}

namespace {

bool mo_msg_valid_uncached(const Value& msg, int64_t n) {
  if (!is_umo_state(msg)) return false;
  int64_t j = umo_addr(msg);
  const auto& obs = umo_obs(msg);
  if (obs.empty()) return j >= 1 && j <= n;
  // Check the prefix, then the final observation.
  std::vector<Value> prefix(obs.begin(), obs.end() - 1);
  if (!mo_msg_valid(umo_state(j, prefix), n)) return false;
  const Value& last = obs.back();
  const Value& mp = obs_msg(last);
  if (obs_kind_is(last, kSend)) {
    return umo_addr(mp) == j && umo_obs(mp) == prefix;
  }
  return mo_msg_valid(mp, n);
}

}  // namespace

bool mo_msg_valid(const Value& msg, int64_t n) {
  thread_local std::map<std::pair<Value, int64_t>, bool> memo;
  auto key = std::make_pair(msg, n);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  bool ok = mo_msg_valid_uncached(msg, n);
  memo.emplace(std::move(key), ok);
  return ok;
}

Vlsm mo_component(int64_t address, int64_t n) {
  Vlsm m = observer_base(address, "mo");
  m.constraint = [n](const Value& l, const Value&, const OptionMessage& in) {
    if (!umo_beta(l, in)) return false;
    if (l.as_sym() == kReceive) return mo_msg_valid(in.message(), n);
    return true;
  };
  return m;
}

bool psi_full_node(const Value& state, const Value& msg) {
  auto have = messages(state);
  for (const auto& dep : messages(msg)) {
    if (!have.count(dep)) return false;
  }
  return true;
}

bool psi_no_self_equiv(const Value& state, const Value& msg) {
  if (umo_addr(msg) != umo_addr(state)) return true;
  return sent_messages(state).count(msg) > 0;
}

namespace {

bool elmo_msg_valid_full_uncached(const Value& msg, int64_t n) {
  if (!is_umo_state(msg)) return false;
  int64_t j = umo_addr(msg);
  const auto& obs = umo_obs(msg);
  if (obs.empty()) return j >= 1 && j <= n;
  std::vector<Value> prefix_obs(obs.begin(), obs.end() - 1);
  Value prefix = umo_state(j, prefix_obs);
  if (!elmo_msg_valid_full(prefix, n)) return false;
  const Value& last = obs.back();
  const Value& mp = obs_msg(last);
  if (obs_kind_is(last, kSend)) {
    return umo_addr(mp) == j && umo_obs(mp) == prefix_obs;
  }
  return psi_full_node(prefix, mp) && psi_no_self_equiv(prefix, mp);
}

}  // namespace

bool elmo_msg_valid_full(const Value& msg, int64_t n) {
  thread_local std::map<std::pair<Value, int64_t>, bool> memo;
  auto key = std::make_pair(msg, n);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  bool ok = elmo_msg_valid_full_uncached(msg, n);
  memo.emplace(std::move(key), ok);
  return ok;
}

bool umo_happens_before(const Value& m1, const Value& m2) {
  // Least transitive relation with m1 < m2 whenever m1 is observed in m2.
  std::deque<Value> work{m2};
  std::set<Value> seen;
  while (!work.empty()) {
    Value cur = work.front();
    work.pop_front();
    for (const auto& m : messages(cur)) {
      if (m == m1) return true;
      if (seen.insert(m).second) work.push_back(m);
    }
  }
  return false;
}

bool umo_incomparable(const Value& m1, const Value& m2) {
  return umo_addr(m1) == umo_addr(m2) && m1 != m2 && !umo_happens_before(m1, m2) &&
         !umo_happens_before(m2, m1);
}

std::set<int64_t> local_equivocators_full(const Value& state) {
  const auto& obs = umo_obs(state);
  std::set<int64_t> out;
  std::set<Value> received_so_far;
  for (const auto& ob : obs) {
    if (!obs_kind_is(ob, kReceive)) continue;
    const Value& m = obs_msg(ob);
    for (const auto& mp : received_so_far) {
      if (umo_incomparable(m, mp)) {
        out.insert(umo_addr(m));
        break;
      }
    }
    received_so_far.insert(m);
  }
  return out;
}

Vlsm elmo_component(int64_t address, int64_t n, const WeightMap& w) {
  Vlsm m = observer_base(address, "elmo");
  WeightMap wm = w;
  m.constraint = [n, wm](const Value& l, const Value& s, const OptionMessage& in) {
    if (!umo_beta(l, in)) return false;
    if (l.as_sym() != kReceive) return true;
    const Value& msg = in.message();
    if (!is_umo_state(msg)) return false;
    if (!psi_full_node(s, msg)) return false;
    if (!elmo_msg_valid_full(msg, n)) return false;
    if (!psi_no_self_equiv(s, msg)) return false;
    Value post = umo_append(s, umo_observation(kReceive, msg));
    return wm.weight_of(local_equivocators_full(post)) < wm.threshold;
  };
  return m;
}

Vlsm umo_protocol(int64_t n) {
  std::vector<Vlsm> cs;
  for (int64_t i = 1; i <= n; ++i) cs.push_back(umo_component(i));
  return free_compose(std::move(cs), "umo_protocol");
}

Vlsm mo_protocol(int64_t n) {
  std::vector<Vlsm> cs;
  for (int64_t i = 1; i <= n; ++i) cs.push_back(mo_component(i, n));
  return free_compose(std::move(cs), "mo_protocol");
}

std::set<int64_t> global_equivocators_full(const Vlsm& composite, const Value& sigma) {
  std::set<int64_t> out;
  if (!composite.oracles.observed_messages || !composite.oracles.has_been_sent)
    return out;
  for (const auto& m : composite.oracles.observed_messages(sigma)) {
    if (!composite.oracles.has_been_sent(sigma, m)) {
      out.insert(composite.oracles.sender(m).as_int());
    }
  }
  return out;
}

Vlsm elmo_protocol(int64_t n, const WeightMap& w) {
  std::vector<Vlsm> cs;
  for (int64_t i = 1; i <= n; ++i) cs.push_back(elmo_component(i, n, w));
  Vlsm free = free_compose(std::move(cs), "elmo_protocol");
  auto free_ptr = std::make_shared<const Vlsm>(free);
  WeightMap wm = w;
  CompositionConstraint phi = [free_ptr, wm](const Value& l, const Value& sigma,
                                             const OptionMessage& in) {
    if (!in.is_proper()) return true;
    if (label_inner(l).as_sym() != "receive") return true;
    StepResult r = free_ptr->transition(l, sigma, in);
    return wm.weight_of(global_equivocators_full(*free_ptr, r.post)) < wm.threshold;
  };
  return constrain(std::move(free), phi, "elmo_protocol");
}

Trace extract_trace(const Value& state) {
  if (!is_umo_state(state)) throw ExtractionError(0, "not an observer state");
  Value cur = umo_initial(umo_addr(state));
  Trace tr{cur, {}};
  const auto& obs = umo_obs(state);
  for (size_t i = 0; i < obs.size(); ++i) {
    const Value& ob = obs[i];
    TransitionRecord st;
    if (obs_kind_is(ob, kSend)) {
      if (obs_msg(ob) != cur) {
        throw ExtractionError(i, "send observation does not match the prefix state");
      }
      StepResult r = umo_transition(vsym(kSend), cur, OptionMessage::none());
      st = TransitionRecord{vsym(kSend), cur, OptionMessage::none(), r.post, r.output};
    } else {
      OptionMessage in = OptionMessage::proper(obs_msg(ob));
      StepResult r = umo_transition(vsym(kReceive), cur, in);
      st = TransitionRecord{vsym(kReceive), cur, in, r.post, r.output};
    }
    tr.steps.push_back(st);
    cur = st.post;
  }
  if (cur != state) throw ExtractionError(obs.size(), "replay does not reach the state");
  return tr;
}

Trace extract_composite_trace(const Vlsm& composite, const Value& sigma) {
  const size_t n = composite.parts.size();
  std::vector<Trace> pending;
  std::vector<size_t> next(n, 0);
  for (size_t j = 1; j <= n; ++j) {
    const auto& part = composite.parts[j - 1];
    if (!part.state_to_trace) {
      throw ExtractionError(j, "component cannot extract traces from states");
    }
    auto tr = part.state_to_trace(composite_part(sigma, j));
    if (!tr) throw ExtractionError(j, "component state is not constrained");
    pending.push_back(*tr);
  }

  std::vector<Value> start_parts;
  for (size_t j = 0; j < n; ++j) start_parts.push_back(pending[j].start);
  Value cur = composite_state(start_parts);
  Trace out{cur, {}};

  std::set<Value> emitted;
  auto runnable = [&](size_t j) -> const TransitionRecord* {
    if (next[j] >= pending[j].steps.size()) return nullptr;
    return &pending[j].steps[next[j]];
  };

  while (true) {
    // Prefer a step whose proper input was already sent in the prefix; fall
    // back to the lowest-indexed pending step (a free composition accepts any
    // interleaving).
    size_t pick = n;
    for (size_t j = 0; j < n; ++j) {
      const TransitionRecord* st = runnable(j);
      if (st && (!st->input.is_proper() || emitted.count(st->input.message()))) {
        pick = j;
        break;
      }
    }
    if (pick == n) {
      for (size_t j = 0; j < n; ++j) {
        if (runnable(j)) {
          pick = j;
          break;
        }
      }
    }
    if (pick == n) break;

    const TransitionRecord& st = pending[pick].steps[next[pick]++];
    Value cl = composite_label(pick + 1, st.label);
    StepResult r = composite.transition(cl, cur, st.input);
    out.steps.push_back(TransitionRecord{cl, cur, st.input, r.post, r.output});
    if (r.output.is_proper()) emitted.insert(r.output.message());
    cur = r.post;
  }
  if (cur != sigma) {
    throw ExtractionError(0, "interleaving does not reach the composite state");
  }
  return out;
}

}  // namespace vlsm
