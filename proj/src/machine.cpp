#include "vlsm/machine.hpp"

namespace vlsm {

Value Trace::encode() const {
  std::vector<Value> xs;
  xs.push_back(start);
  for (const auto& st : steps) {
    xs.push_back(vlist(
        {st.label, st.pre, st.input.encode(), st.post, st.output.encode()}));
  }
  return vlist(std::move(xs));
}

StepResult apply(const Vlsm& m, const Value& label, const Value& state,
                 const OptionMessage& input) {
  if (!m.is_label(label)) {
    throw std::domain_error("unknown label " + label.repr() + " for machine " +
                            m.name);
  }
  return m.transition(label, state, input);
}

bool is_constrained(const Vlsm& m, const Value& label, const Value& state,
                    const OptionMessage& input) {
  if (!m.is_label(label)) return false;
  return m.constraint(label, state, input);
}

}  // namespace vlsm
