#include <doctest.h>

#include "support.hpp"
#include "vlsm/serialize.hpp"

using namespace vlsm;
using namespace vlsm::testing;

TEST_CASE("observer states round-trip through the object form") {
  Value m1 = umo_initial(1);
  Value s = umo_state(2, {umo_observation("send", umo_initial(2)),
                          umo_observation("receive", m1)});
  json j = value_to_json(s);
  CHECK(j.contains("addr"));
  CHECK(j.at("addr") == 2);
  CHECK(j.at("obs").size() == 2);
  CHECK(value_from_json(j) == s);
  // byte stability
  CHECK(dump_canonical(j) == dump_canonical(value_to_json(value_from_json(j))));
}

TEST_CASE("plain values serialize as scalars and arrays") {
  CHECK(value_to_json(vint(7)) == json(7));
  CHECK(value_to_json(vsym("d")) == json("d"));
  Value cd = countdown_state(4, 2);
  json j = value_to_json(cd);
  CHECK(j.is_array());
  CHECK(value_from_json(j) == cd);
}

TEST_CASE("no message serializes as null") {
  CHECK(option_message_to_json(OptionMessage::none()).is_null());
  CHECK(option_message_from_json(json(nullptr)) == OptionMessage::none());
  CHECK(option_message_from_json(json(3)) == OptionMessage::proper(vint(3)));
}

TEST_CASE("traces round-trip and re-chain their pre-states") {
  Vlsm d = countdown();
  Trace tr = build_trace(d, countdown_state(5, 5),
                         {{vsym("d"), OptionMessage::proper(vint(2))},
                          {vsym("d"), OptionMessage::proper(vint(2))}});
  json j = trace_to_json(tr);
  Trace back = trace_from_json(j);
  CHECK(back.encode() == tr.encode());
  std::string once = dump_canonical(j);
  std::string twice = dump_canonical(trace_to_json(back));
  CHECK(once == twice);
}

TEST_CASE("rationals render as p/q strings") {
  CHECK(rational_to_string(Rational(3, 6)) == "1/2");
  CHECK(rational_from_string("1/2") == Rational(1, 2));
  CHECK(rational_from_string("4") == Rational(4));
  CHECK_THROWS_AS(rational_from_string("x/y"), ParseError);
}

TEST_CASE("scenario parsing") {
  SUBCASE("a full elmo scenario") {
    json j{{"protocol", "elmo"},
           {"n", 2},
           {"depth", 3},
           {"weights", {{"1", "1"}, {"2", "1/1"}}},
           {"threshold", "2"},
           {"adversary", {{"kind", "none"}}}};
    Scenario sc = scenario_from_json(j);
    CHECK(sc.protocol == "elmo");
    CHECK(sc.n == 2);
    CHECK(scenario_weights(sc).threshold == Rational(2));
    Vlsm m = build_scenario_machine(sc);
    CHECK(m.parts.size() == 2);
  }
  SUBCASE("elmo without a threshold is a usage error") {
    json j{{"protocol", "elmo"}, {"n", 2}};
    CHECK_THROWS_AS(scenario_from_json(j), ParseError);
  }
  SUBCASE("adversary sets outside the component range are rejected") {
    json j{{"protocol", "mo"},
           {"n", 2},
           {"adversary", {{"kind", "fixed_equivocators"}, {"set", {3}}}}};
    CHECK_THROWS_AS(scenario_from_json(j), ParseError);
  }
  SUBCASE("unknown protocols are rejected") {
    json j{{"protocol", "nope"}};
    CHECK_THROWS_AS(scenario_from_json(j), ParseError);
  }
  SUBCASE("the fixed-equivocator scenario builds the message model") {
    json j{{"protocol", "mo"},
           {"n", 2},
           {"adversary", {{"kind", "fixed_equivocators"}, {"set", {2}}}}};
    Scenario sc = scenario_from_json(j);
    Vlsm m = build_scenario_machine(sc);
    Value s0 = composite_state({umo_initial(1), umo_initial(2)});
    CHECK(is_constrained(m, composite_label(1, vsym("receive")), s0,
                         OptionMessage::proper(umo_initial(2))));
    CHECK_FALSE(is_constrained(m, composite_label(2, vsym("receive")), s0,
                               OptionMessage::proper(umo_initial(1))));
  }
}

TEST_CASE("equivocation reports serialize with their witnesses") {
  Vlsm comp1 = mo_component(1, 2);
  Value m2 = umo_initial(2);
  Value m3 = umo_state(2, {umo_observation("receive", umo_initial(1))});
  Value s = umo_state(1, {umo_observation("receive", m2),
                          umo_observation("receive", m3)});
  EquivocationReport rep = local_equivocators(comp1, s);
  json j = report_to_json(rep);
  CHECK(j.at("scope") == "local");
  CHECK(j.at("equivocators").size() == 1);
  CHECK(j.at("witnesses").size() == 1);
}
