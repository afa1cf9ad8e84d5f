#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "vlsm/equivocation.hpp"
#include "vlsm/umo.hpp"

namespace vlsm {

using json = nlohmann::ordered_json;

// Canonical JSON forms. Observer-family states render as
// {"addr": i, "obs": [{"kind": "send"|"receive", "msg": ...}, ...]},
// recursively; other values render as numbers, strings, and arrays. The
// no-message slot renders as null. Keys are emitted in a fixed order and
// rationals as "p/q" strings, so serialize-parse-serialize is the identity.
json value_to_json(const Value& v);
json option_message_to_json(const OptionMessage& m);
Value value_from_json(const json& j);
OptionMessage option_message_from_json(const json& j);

// Traces omit the pre-states; parsing re-chains them from the start state.
json trace_to_json(const Trace& tr);
Trace trace_from_json(const json& j);

json report_to_json(const EquivocationReport& rep);

std::string rational_to_string(const Rational& r);
Rational rational_from_string(const std::string& s);

// Byte-stable rendering used for every file the tools write.
std::string dump_canonical(const json& j);

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// A self-contained description of a machine and analysis bounds, loaded from
// a scenario file.
struct Scenario {
  std::string protocol;  // countdown | umo | mo | elmo
  int64_t n = 0;
  std::map<int64_t, Rational> weights;
  std::optional<Rational> threshold;
  std::string adversary = "none";  // none | fixed_equivocators | limited |
                                   // byzantine | byzantine_limited
  std::set<int64_t> adversary_set;
  size_t depth = 3;
  Limits limits;
};

Scenario scenario_from_json(const json& j);
Scenario load_scenario_file(const std::string& path);

// The machine whose traces the scenario describes (protocol plus adversary
// wrapping). Byzantine wrappings draw their message universe from the
// matching equivocation model at the scenario depth.
Vlsm build_scenario_machine(const Scenario& sc);

// The underlying component list (empty for countdown).
std::vector<Vlsm> scenario_components(const Scenario& sc);

WeightMap scenario_weights(const Scenario& sc);

}  // namespace vlsm
