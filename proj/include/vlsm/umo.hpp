#pragma once

#include <boost/rational.hpp>
#include <map>
#include <set>
#include <vector>

#include "vlsm/machine.hpp"

namespace vlsm {

using Rational = boost::rational<int64_t>;

// Positive per-address weights and a positive equivocation threshold.
// Exact rationals: the threshold comparisons are strict and must not be
// flipped by rounding.
struct WeightMap {
  std::map<int64_t, Rational> weight;
  Rational threshold{1};

  Rational weight_of(const std::set<int64_t>& addrs) const;
  static WeightMap uniform(int64_t n, Rational w, Rational t);
};

// States of the message-observer family are <address, observation list>
// pairs; each observation is (send|receive, message) and messages are states.
Value umo_state(int64_t addr, std::vector<Value> obs);
Value umo_initial(int64_t addr);
Value umo_observation(const std::string& kind, Value msg);
bool is_umo_state(const Value& v);
int64_t umo_addr(const Value& v);
const std::vector<Value>& umo_obs(const Value& v);
Value umo_append(const Value& state, const Value& observation);

std::set<Value> sent_messages(const Value& state);
std::set<Value> received_messages(const Value& state);
std::set<Value> messages(const Value& state);

// All states over addresses 1..n whose encoding has at most max_nodes nodes
// (a node per state constructor). Used as structural probe pools in bounded
// checks; includes states no honest run can produce.
std::vector<Value> umo_structural_states(int64_t n, size_t max_nodes);

// The single-label countdown machine: states <n, i>, initial <n, n>,
// messages are integers with 2 initial, a transition subtracts the input and
// emits its double. The initial-state enumerator is bounded; the predicates
// are not.
Vlsm countdown(int64_t max_initial = 6);
Value countdown_state(int64_t n, int64_t i);

Vlsm umo_component(int64_t address);
Vlsm mo_component(int64_t address, int64_t n);
Vlsm elmo_component(int64_t address, int64_t n, const WeightMap& w);

// Free compositions of the component families; the ELMO protocol is
// additionally constrained so the weight of globally evidenced equivocators
// stays below the threshold after every receive.
Vlsm umo_protocol(int64_t n);
Vlsm mo_protocol(int64_t n);
Vlsm elmo_protocol(int64_t n, const WeightMap& w);

// The unique constrained trace encoded in a constrained component state:
// replays the observation list left to right. Throws ExtractionError if some
// send observation does not match its prefix state.
Trace extract_trace(const Value& state);

// A constrained composite trace reaching the composite state, built by
// dependency-aware round-robin over the per-component extractions: a pending
// step is preferred when its input was already sent in the composite prefix.
Trace extract_composite_trace(const Vlsm& composite, const Value& sigma);

// Structural message validity of the MO family (terminating recursion on the
// observation list).
bool mo_msg_valid(const Value& msg, int64_t n);

// ELMO receive validity pieces.
bool psi_full_node(const Value& state, const Value& msg);
bool psi_no_self_equiv(const Value& state, const Value& msg);
bool elmo_msg_valid_full(const Value& msg, int64_t n);

// Locally evidenced equivocators: walk the observation list; a trailing
// receive whose message is incomparable with an earlier received message of
// the same sender evidences that sender.
std::set<int64_t> local_equivocators_full(const Value& state);

// Happens-before on family messages: transitive closure of direct
// observation containment.
bool umo_happens_before(const Value& m1, const Value& m2);
bool umo_incomparable(const Value& m1, const Value& m2);

// Globally evidenced equivocators of a composite state under the full-node
// simplification: senders of directly observed messages nobody has sent.
std::set<int64_t> global_equivocators_full(const Vlsm& composite, const Value& sigma);

}  // namespace vlsm
