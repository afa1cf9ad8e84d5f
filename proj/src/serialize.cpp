#include "vlsm/serialize.hpp"

#include <fstream>

#include "vlsm/byzantine.hpp"
#include "vlsm/equiv_models.hpp"

namespace vlsm {

json value_to_json(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Int:
      return json(v.as_int());
    case Value::Kind::Sym:
      return json(v.as_sym());
    case Value::Kind::List:
      if (is_umo_state(v)) {
        json obs = json::array();
        for (const auto& ob : umo_obs(v)) {
          obs.push_back(json{{"kind", ob.at(0).as_sym()},
                             {"msg", value_to_json(ob.at(1))}});
        }
        return json{{"addr", umo_addr(v)}, {"obs", obs}};
      } else {
        json arr = json::array();
        for (const auto& x : v.items()) arr.push_back(value_to_json(x));
        return arr;
      }
  }
  throw ParseError("unreachable value kind");
}

json option_message_to_json(const OptionMessage& m) {
  if (!m.is_proper()) return json(nullptr);
  return value_to_json(m.message());
}

Value value_from_json(const json& j) {
  if (j.is_number_integer()) return vint(j.get<int64_t>());
  if (j.is_string()) return vsym(j.get<std::string>());
  if (j.is_array()) {
    std::vector<Value> xs;
    for (const auto& x : j) xs.push_back(value_from_json(x));
    return vlist(std::move(xs));
  }
  if (j.is_object()) {
    if (!j.contains("addr") || !j.contains("obs")) {
      throw ParseError("object value must have addr and obs fields");
    }
    std::vector<Value> obs;
    for (const auto& ob : j.at("obs")) {
      std::string kind = ob.at("kind").get<std::string>();
      if (kind != "send" && kind != "receive") {
        throw ParseError("observation kind must be send or receive");
      }
      obs.push_back(umo_observation(kind, value_from_json(ob.at("msg"))));
    }
    return umo_state(j.at("addr").get<int64_t>(), std::move(obs));
  }
  throw ParseError("unsupported JSON value: " + j.dump());
}

OptionMessage option_message_from_json(const json& j) {
  if (j.is_null()) return OptionMessage::none();
  return OptionMessage::proper(value_from_json(j));
}

json trace_to_json(const Trace& tr) {
  json steps = json::array();
  for (const auto& st : tr.steps) {
    steps.push_back(json{{"label", value_to_json(st.label)},
                         {"input", option_message_to_json(st.input)},
                         {"post", value_to_json(st.post)},
                         {"output", option_message_to_json(st.output)}});
  }
  return json{{"start", value_to_json(tr.start)}, {"steps", steps}};
}

Trace trace_from_json(const json& j) {
  if (!j.is_object() || !j.contains("start") || !j.contains("steps")) {
    throw ParseError("trace file must have start and steps fields");
  }
  Trace tr;
  tr.start = value_from_json(j.at("start"));
  Value cur = tr.start;
  for (const auto& st : j.at("steps")) {
    TransitionRecord rec;
    rec.label = value_from_json(st.at("label"));
    rec.pre = cur;
    rec.input = option_message_from_json(st.at("input"));
    rec.post = value_from_json(st.at("post"));
    rec.output = option_message_from_json(st.at("output"));
    cur = rec.post;
    tr.steps.push_back(std::move(rec));
  }
  return tr;
}

json report_to_json(const EquivocationReport& rep) {
  json eqs = json::array();
  for (const auto& a : rep.equivocators) eqs.push_back(value_to_json(a));
  json witnesses = json::object();
  for (const auto& [a, pair] : rep.local_witnesses) {
    witnesses[a.repr()] =
        json{{"pair", json::array({value_to_json(pair.first),
                                   value_to_json(pair.second)})}};
  }
  for (const auto& [a, msg] : rep.global_witnesses) {
    witnesses[a.repr()] = json{{"message", value_to_json(msg)}};
  }
  return json{{"scope", rep.scope == EquivocationReport::Scope::Local ? "local"
                                                                      : "global"},
              {"equivocators", eqs},
              {"witnesses", witnesses}};
}

std::string rational_to_string(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

Rational rational_from_string(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      return Rational(std::stoll(s));
    }
    int64_t num = std::stoll(s.substr(0, slash));
    int64_t den = std::stoll(s.substr(slash + 1));
    return Rational(num, den);
  } catch (const std::exception&) {
    throw ParseError("bad rational: " + s);
  }
}

std::string dump_canonical(const json& j) { return j.dump(2) + "\n"; }

namespace {

Rational rational_field(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<int64_t>());
  if (j.is_string()) return rational_from_string(j.get<std::string>());
  throw ParseError("rationals must be integers or \"p/q\" strings");
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  Scenario sc;
  if (!j.is_object() || !j.contains("protocol")) {
    throw ParseError("scenario must be an object with a protocol field");
  }
  sc.protocol = j.at("protocol").get<std::string>();
  if (sc.protocol != "countdown" && sc.protocol != "umo" && sc.protocol != "mo" &&
      sc.protocol != "elmo") {
    throw ParseError("unknown protocol: " + sc.protocol);
  }
  sc.n = j.value("n", sc.protocol == "countdown" ? int64_t{6} : int64_t{2});
  if (sc.n < 1) throw ParseError("n must be positive");
  if (j.contains("weights")) {
    for (const auto& [k, v] : j.at("weights").items()) {
      sc.weights[std::stoll(k)] = rational_field(v);
    }
  }
  if (j.contains("threshold")) sc.threshold = rational_field(j.at("threshold"));
  if (j.contains("adversary")) {
    const json& adv = j.at("adversary");
    sc.adversary = adv.value("kind", "none");
    if (adv.contains("set")) {
      for (const auto& x : adv.at("set")) sc.adversary_set.insert(x.get<int64_t>());
    }
    if (adv.contains("t")) sc.threshold = rational_field(adv.at("t"));
  }
  static const std::set<std::string> kinds{"none", "fixed_equivocators", "limited",
                                           "byzantine", "byzantine_limited"};
  if (!kinds.count(sc.adversary)) {
    throw ParseError("unknown adversary kind: " + sc.adversary);
  }
  for (int64_t a : sc.adversary_set) {
    if (a < 1 || a > sc.n) throw ParseError("adversary set outside 1..n");
  }
  sc.depth = j.value("depth", size_t{3});
  if (j.contains("cap")) sc.limits.max_visited = j.at("cap").get<size_t>();

  bool needs_weights = sc.protocol == "elmo" || sc.adversary == "limited" ||
                       sc.adversary == "byzantine_limited";
  if (needs_weights && !sc.threshold) {
    throw ParseError("scenario requires weights and a threshold");
  }
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario parse error: ") + e.what());
  }
  return scenario_from_json(j);
}

WeightMap scenario_weights(const Scenario& sc) {
  WeightMap wm;
  wm.threshold = sc.threshold.value_or(Rational(1));
  for (int64_t a = 1; a <= sc.n; ++a) {
    auto it = sc.weights.find(a);
    wm.weight[a] = it == sc.weights.end() ? Rational(1) : it->second;
  }
  return wm;
}

std::vector<Vlsm> scenario_components(const Scenario& sc) {
  std::vector<Vlsm> cs;
  if (sc.protocol == "countdown") return cs;
  for (int64_t i = 1; i <= sc.n; ++i) {
    if (sc.protocol == "umo") {
      cs.push_back(umo_component(i));
    } else if (sc.protocol == "mo") {
      cs.push_back(mo_component(i, sc.n));
    } else {
      cs.push_back(elmo_component(i, sc.n, scenario_weights(sc)));
    }
  }
  return cs;
}

Vlsm build_scenario_machine(const Scenario& sc) {
  if (sc.protocol == "countdown") return countdown(sc.n);
  std::vector<Vlsm> cs = scenario_components(sc);
  if (sc.adversary == "none") {
    if (sc.protocol == "elmo") return elmo_protocol(sc.n, scenario_weights(sc));
    return free_compose(std::move(cs), sc.protocol + "_protocol");
  }
  if (sc.adversary == "fixed_equivocators") {
    return message_equiv_fixed(std::move(cs), sc.adversary_set);
  }
  if (sc.adversary == "limited") {
    return message_equiv_limited(std::move(cs), scenario_weights(sc));
  }
  if (sc.adversary == "byzantine" || sc.adversary == "byzantine_limited") {
    Vlsm eqv = message_equiv_fixed(cs, sc.adversary_set);
    ReachSet rs = reach(eqv, sc.depth, {}, sc.limits);
    return byzantine_composition(std::move(cs), sc.adversary_set,
                                 rs.proper_messages());
  }
  throw ParseError("unsupported adversary kind: " + sc.adversary);
}

}  // namespace vlsm
