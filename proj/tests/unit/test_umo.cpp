#include <doctest.h>

#include <algorithm>

#include "support.hpp"
#include "vlsm/equiv_models.hpp"
#include "vlsm/reach.hpp"
#include "vlsm/umo.hpp"

using namespace vlsm;
using namespace vlsm::testing;

namespace {

Value obs_send(const Value& m) { return umo_observation("send", m); }
Value obs_recv(const Value& m) { return umo_observation("receive", m); }
OptionMessage some(const Value& m) { return OptionMessage::proper(m); }

// The three-step component run of address 2: two sends, then a receive of a
// message no composition can emit.
struct Worked {
  Value s1 = umo_initial(2);
  Value s2 = umo_state(2, {obs_send(umo_initial(2))});
  Value m1 = umo_state(1, {obs_send(umo_initial(1)), obs_send(umo_initial(2))});
  Value last = umo_state(2, {obs_send(umo_initial(2)),
                             obs_send(umo_state(2, {obs_send(umo_initial(2))})),
                             obs_recv(umo_state(1, {obs_send(umo_initial(1)),
                                                    obs_send(umo_initial(2))}))});
};

}  // namespace

TEST_CASE("countdown characterizations at desk scale") {
  Vlsm d = countdown();
  SUBCASE("constrained states are exactly the n >= i >= 0 pairs") {
    CountdownBrute brute = countdown_brute_constrained(6, 6);
    std::set<std::pair<int64_t, int64_t>> expect;
    for (int64_t n = 0; n <= 6; ++n) {
      for (int64_t i = 0; i <= n; ++i) expect.insert({n, i});
    }
    CHECK(brute.states == expect);
    // and the library agrees, over the pool of all candidate inputs
    std::vector<Value> pool;
    for (int64_t j = 1; j <= 6; ++j) pool.push_back(vint(j));
    std::set<Value> got = constrained_states(d, 6, pool);
    std::set<std::pair<int64_t, int64_t>> got_pairs;
    for (const auto& s : got) got_pairs.insert({s.at(0).as_int(), s.at(1).as_int()});
    CHECK(got_pairs == expect);
  }
  SUBCASE("constrained messages are positive evens") {
    CountdownBrute brute = countdown_brute_constrained(6, 6);
    for (int64_t m : brute.messages) {
      CHECK(m > 0);
      CHECK(m % 2 == 0);
    }
    CHECK(brute.messages.count(2));
    CHECK(brute.messages.count(12));
  }
  SUBCASE("valid states have matching parity") {
    ReachSet rs = reach(d, 5, {vint(2)});
    for (const auto& s : rs.states) {
      CHECK((s.at(0).as_int() - s.at(1).as_int()) % 2 == 0);
      CHECK(s.at(1).as_int() >= 0);
    }
    // every matching-parity pair below the bound is reached
    CountdownBrute oracle = countdown_brute_valid(6, 5);
    for (int64_t n = 0; n <= 6; ++n) {
      for (int64_t i = n % 2; i <= n; i += 2) {
        CHECK(oracle.states.count({n, i}));
        CHECK(rs.states.count(countdown_state(n, i)));
      }
    }
  }
  SUBCASE("valid messages are the powers of two producible in bound") {
    ReachSet rs = reach(d, 5, {vint(2)});
    std::set<int64_t> got;
    for (const auto& m : rs.proper_messages()) got.insert(m.as_int());
    CHECK(got == std::set<int64_t>{2, 4, 8});
  }
}

TEST_CASE("observer component transitions") {
  Vlsm u2 = umo_component(2);
  Worked w;
  SUBCASE("send with no input appends and emits the pre-state") {
    StepResult r = apply(u2, vsym("send"), w.s1, OptionMessage::none());
    CHECK(r.post == w.s2);
    CHECK(r.output == some(w.s1));
  }
  SUBCASE("send with a proper input is inert and unconstrained") {
    StepResult r = apply(u2, vsym("send"), w.s1, some(w.m1));
    CHECK(r.post == w.s1);
    CHECK(r.output == some(w.m1));
    CHECK_FALSE(is_constrained(u2, vsym("send"), w.s1, some(w.m1)));
  }
  SUBCASE("receive records the message and emits nothing") {
    StepResult r = apply(u2, vsym("receive"), w.s1, some(w.m1));
    CHECK(r.post == umo_state(2, {obs_recv(w.m1)}));
    CHECK_FALSE(r.output.is_proper());
    CHECK(is_constrained(u2, vsym("receive"), w.s1, some(w.m1)));
  }
  SUBCASE("receive of no message is inert and unconstrained") {
    StepResult r = apply(u2, vsym("receive"), w.s1, OptionMessage::none());
    CHECK(r.post == w.s1);
    CHECK_FALSE(is_constrained(u2, vsym("receive"), w.s1, OptionMessage::none()));
  }
  SUBCASE("the worked three-step run is a constrained trace") {
    Trace tr = build_trace(u2, w.s1,
                           {{vsym("send"), OptionMessage::none()},
                            {vsym("send"), OptionMessage::none()},
                            {vsym("receive"), some(w.m1)}});
    CHECK(tr.final_state() == w.last);
    CHECK(check_trace(u2, tr, TraceMode::Constrained).ok);
  }
}

TEST_CASE("observation projections") {
  Worked w;
  CHECK(sent_messages(umo_initial(7)).empty());
  CHECK(received_messages(umo_initial(7)).empty());
  CHECK(messages(umo_initial(7)).empty());

  CHECK(sent_messages(w.last) == std::set<Value>{w.s1, w.s2});
  CHECK(received_messages(w.last) == std::set<Value>{w.m1});
  std::set<Value> all{w.s1, w.s2, w.m1};
  CHECK(messages(w.last) == all);
}

TEST_CASE("trace extraction from component states") {
  Worked w;
  SUBCASE("initial state extracts the empty trace") {
    Trace tr = extract_trace(umo_initial(2));
    CHECK(tr.steps.empty());
    CHECK(tr.start == umo_initial(2));
  }
  SUBCASE("single send") {
    Trace tr = extract_trace(w.s2);
    REQUIRE(tr.steps.size() == 1);
    CHECK(tr.steps[0].label == vsym("send"));
    CHECK(tr.final_state() == w.s2);
    // exhaustively, this is the only constrained trace reaching it
    auto all = all_traces_reaching(umo_component(2), w.s2);
    REQUIRE(all.size() == 1);
    CHECK(all[0].encode() == tr.encode());
  }
  SUBCASE("the worked state extracts its three-step run, uniquely") {
    Trace tr = extract_trace(w.last);
    CHECK(tr.steps.size() == 3);
    CHECK(tr.final_state() == w.last);
    CHECK(check_trace(umo_component(2), tr, TraceMode::Constrained).ok);
    auto all = all_traces_reaching(umo_component(2), w.last);
    REQUIRE(all.size() == 1);
    CHECK(all[0].encode() == tr.encode());
  }
  SUBCASE("malformed send observation raises an extraction error") {
    Value bad = umo_state(2, {obs_send(umo_initial(1))});
    CHECK_THROWS_AS(extract_trace(bad), ExtractionError);
  }
}

TEST_CASE("message validity of the MO family") {
  SUBCASE("empty states are valid iff the address is in range") {
    CHECK(mo_msg_valid(umo_initial(1), 3));
    CHECK(mo_msg_valid(umo_initial(3), 3));
    CHECK_FALSE(mo_msg_valid(umo_initial(4), 3));
  }
  SUBCASE("the worked junk message is rejected") {
    Worked w;
    CHECK_FALSE(mo_msg_valid(w.m1, 3));
  }
  SUBCASE("a self-consistent send history is accepted") {
    CHECK(mo_msg_valid(umo_state(1, {obs_send(umo_initial(1))}), 2));
  }
  SUBCASE("MO components refuse junk that UMO accepts") {
    Worked w;
    Vlsm m2 = mo_component(2, 3);
    Vlsm u2 = umo_component(2);
    Value s = umo_state(2, {obs_send(umo_initial(2))});
    CHECK(is_constrained(u2, vsym("receive"), s, some(w.m1)));
    CHECK_FALSE(is_constrained(m2, vsym("receive"), s, some(w.m1)));
  }
}

TEST_CASE("ELMO receive validity") {
  WeightMap w1 = WeightMap::uniform(2, Rational(1), Rational(1));
  WeightMap w2 = WeightMap::uniform(2, Rational(1), Rational(2));
  Value m2 = umo_initial(2);
  Value m3 = umo_state(2, {obs_recv(umo_initial(1))});

  SUBCASE("full-node: dependencies must be observed first") {
    CHECK_FALSE(psi_full_node(umo_initial(1), m3));
    Value s = umo_state(1, {obs_send(umo_initial(1))});
    CHECK(psi_full_node(s, m3));
    Vlsm e1 = elmo_component(1, 2, w2);
    CHECK_FALSE(is_constrained(e1, vsym("receive"), umo_initial(1), some(m3)));
  }
  SUBCASE("no self equivocation: own messages must have been sent") {
    Vlsm e1 = elmo_component(1, 2, w2);
    CHECK_FALSE(is_constrained(e1, vsym("receive"), umo_initial(1), some(umo_initial(1))));
    CHECK_FALSE(psi_no_self_equiv(umo_initial(1), umo_initial(1)));
    CHECK(psi_no_self_equiv(umo_initial(1), umo_initial(2)));
  }
  SUBCASE("threshold 1 rejects the first evidenced equivocator") {
    // after observing m2 and one of its sender's incomparable messages
    Value s = umo_state(1, {obs_send(umo_initial(1)), obs_recv(m2)});
    Vlsm tight = elmo_component(1, 2, w1);
    Vlsm loose = elmo_component(1, 2, w2);
    CHECK(umo_incomparable(m2, m3));
    CHECK_FALSE(is_constrained(tight, vsym("receive"), s, some(m3)));
    CHECK(is_constrained(loose, vsym("receive"), s, some(m3)));
  }
}

TEST_CASE("locally evidenced equivocators") {
  Value m1 = umo_initial(1);
  Value m2 = umo_initial(2);
  Value m3 = umo_state(2, {obs_recv(m1)});
  SUBCASE("initial state has none") {
    CHECK(local_equivocators_full(umo_initial(1)).empty());
  }
  SUBCASE("incomparable pair from one sender is evidence") {
    Value s = umo_state(1, {obs_send(m1), obs_recv(m2), obs_recv(m3)});
    CHECK(local_equivocators_full(s) == std::set<int64_t>{2});
  }
  SUBCASE("comparable messages from one sender are not") {
    Value m2b = umo_state(2, {obs_send(m2)});  // m2 < m2b
    CHECK(umo_happens_before(m2, m2b));
    Value s = umo_state(1, {obs_recv(m2), obs_recv(m2b)});
    CHECK(local_equivocators_full(s).empty());
  }
}

TEST_CASE("happens-before on family messages") {
  Value m1 = umo_initial(1);
  Value m2 = umo_state(2, {obs_recv(m1)});
  Value m3 = umo_state(1, {obs_recv(m2), obs_send(m1)});
  CHECK(umo_happens_before(m1, m2));
  CHECK(umo_happens_before(m1, m3));  // transitively through m2
  CHECK(umo_happens_before(m2, m3));
  CHECK_FALSE(umo_happens_before(m3, m1));
  CHECK_FALSE(umo_happens_before(m1, m1));
}

TEST_CASE("the free composition trace of three observers") {
  Vlsm proto = umo_protocol(3);
  Value m1 = umo_initial(1);
  Value m2 = umo_initial(2);
  Trace tr = build_trace(
      proto, composite_state({umo_initial(1), umo_initial(2), umo_initial(3)}),
      {{composite_label(1, vsym("send")), OptionMessage::none()},
       {composite_label(2, vsym("send")), OptionMessage::none()},
       {composite_label(3, vsym("receive")), some(m1)}});
  CHECK(check_trace(proto, tr, TraceMode::Constrained).ok);
  CHECK(tr.steps[0].output == some(m1));
  CHECK(tr.steps[1].output == some(m2));
  CHECK(composite_part(tr.final_state(), 3) == umo_state(3, {obs_recv(m1)}));

  SUBCASE("projection on the receiver keeps its single step") {
    Trace p3 = project_trace(tr, 3);
    REQUIRE(p3.steps.size() == 1);
    CHECK(p3.steps[0].label == vsym("receive"));
    CHECK(p3.start == umo_initial(3));
  }
  SUBCASE("projections partition the steps") {
    size_t total = 0;
    for (size_t j = 1; j <= 3; ++j) total += project_trace(tr, j).steps.size();
    CHECK(total == tr.steps.size());
  }
  SUBCASE("composite extraction reaches the final state") {
    Trace ex = extract_composite_trace(proto, tr.final_state());
    CHECK(ex.final_state() == tr.final_state());
    CHECK(check_trace(proto, ex, TraceMode::Constrained).ok);
  }
}

TEST_CASE("all-initial composite extracts the empty trace") {
  Vlsm proto = umo_protocol(2);
  Trace ex = extract_composite_trace(
      proto, composite_state({umo_initial(1), umo_initial(2)}));
  CHECK(ex.steps.empty());
}

TEST_CASE("dependency-aware interleaving beats naive concatenation") {
  // Part 1 received a message part 2 sent: under the no-message-equivocation
  // constraint the receive must come second.
  std::vector<Vlsm> cs{mo_component(1, 2), mo_component(2, 2)};
  Vlsm model = no_equivocation_composition(cs);
  Value m2 = umo_initial(2);
  Value sigma = composite_state(
      {umo_state(1, {obs_recv(m2)}), umo_state(2, {obs_send(m2)})});

  Trace naive{composite_state({umo_initial(1), umo_initial(2)}), {}};
  {
    Value cur = naive.start;
    for (auto [j, l, in] :
         {std::tuple<size_t, std::string, OptionMessage>{1, "receive", some(m2)},
          {2, "send", OptionMessage::none()}}) {
      Value cl = composite_label(j, vsym(l));
      StepResult r = model.transition(cl, cur, in);
      naive.steps.push_back(TransitionRecord{cl, cur, in, r.post, r.output});
      cur = r.post;
    }
    CHECK(cur == sigma);
  }
  CHECK_FALSE(check_trace(model, naive, TraceMode::Constrained).ok);

  Trace ex = extract_composite_trace(model, sigma);
  CHECK(ex.final_state() == sigma);
  CHECK(check_trace(model, ex, TraceMode::Constrained).ok);
  CHECK(label_component(ex.steps[0].label) == 2);  // the send is scheduled first
}

TEST_CASE("structural state pools") {
  auto pool = umo_structural_states(2, 3);
  CHECK(pool.size() == 10);  // 2 empty states + 2*2*2 one-observation states
  for (const auto& s : pool) CHECK(is_umo_state(s));
  // includes junk no honest run produces
  bool has_junk = false;
  for (const auto& s : pool) {
    if (!umo_obs(s).empty()) {
      try {
        extract_trace(s);
      } catch (const ExtractionError&) {
        has_junk = true;
      }
    }
  }
  CHECK(has_junk);
}

TEST_CASE("protocol constructors wire addresses to parts") {
  Vlsm mo = mo_protocol(2);
  REQUIRE(mo.parts.size() == 2);
  CHECK(mo.oracles.sender(umo_initial(2)) == vint(2));
  WeightMap w = WeightMap::uniform(2, Rational(1), Rational(2));
  Vlsm elmo = elmo_protocol(2, w);
  REQUIRE(elmo.parts.size() == 2);
  // a receive pushing global equivocation weight to 1 stays under t=2
  Value m2 = umo_initial(2);
  Value s0 = composite_state({umo_initial(1), umo_initial(2)});
  CHECK(is_constrained(elmo, composite_label(1, vsym("receive")), s0, some(m2)));
  WeightMap tight = WeightMap::uniform(2, Rational(1), Rational(1));
  Vlsm elmo1 = elmo_protocol(2, tight);
  CHECK_FALSE(is_constrained(elmo1, composite_label(1, vsym("receive")), s0, some(m2)));
}
