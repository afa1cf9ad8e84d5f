#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace vlsm {

// Structured immutable value. Every domain object in the library -- states,
// labels, messages, composite tuples, copy lists -- is encoded as a Value,
// which gives structural equality, a total order for canonical iteration,
// and uniform serialization.
class Value {
 public:
  enum class Kind { Int = 0, Sym = 1, List = 2 };

  Value() : rep_(int64_t{0}) {}

  static Value integer(int64_t v) { return Value(Rep{v}); }
  static Value symbol(std::string s) { return Value(Rep{std::move(s)}); }
  static Value list(std::vector<Value> xs) {
    return Value(Rep{std::make_shared<const std::vector<Value>>(std::move(xs))});
  }

  Kind kind() const { return static_cast<Kind>(rep_.index()); }
  bool is_int() const { return kind() == Kind::Int; }
  bool is_sym() const { return kind() == Kind::Sym; }
  bool is_list() const { return kind() == Kind::List; }

  int64_t as_int() const { return std::get<int64_t>(rep_); }
  const std::string& as_sym() const { return std::get<std::string>(rep_); }
  const std::vector<Value>& items() const {
    return *std::get<std::shared_ptr<const std::vector<Value>>>(rep_);
  }
  size_t size() const { return items().size(); }
  const Value& at(size_t i) const { return items().at(i); }

  bool operator==(const Value& o) const;
  bool operator!=(const Value& o) const { return !(*this == o); }
  std::strong_ordering operator<=>(const Value& o) const;
  bool operator<(const Value& o) const { return (*this <=> o) < 0; }

  // Debug rendering as an s-expression.
  std::string repr() const;

 private:
  using Rep =
      std::variant<int64_t, std::string, std::shared_ptr<const std::vector<Value>>>;
  explicit Value(Rep r) : rep_(std::move(r)) {}
  Rep rep_;
};

inline Value vint(int64_t v) { return Value::integer(v); }
inline Value vsym(std::string s) { return Value::symbol(std::move(s)); }
inline Value vlist(std::vector<Value> xs) { return Value::list(std::move(xs)); }

// A message slot: either no message or a proper message value.
class OptionMessage {
 public:
  OptionMessage() = default;

  static OptionMessage none() { return OptionMessage(); }
  static OptionMessage proper(Value m) {
    OptionMessage om;
    om.msg_ = std::move(m);
    return om;
  }

  bool is_proper() const { return msg_.has_value(); }
  const Value& message() const { return msg_.value(); }

  bool operator==(const OptionMessage& o) const { return msg_ == o.msg_; }
  bool operator!=(const OptionMessage& o) const { return !(*this == o); }
  bool operator<(const OptionMessage& o) const {
    if (!msg_.has_value()) return o.msg_.has_value();
    if (!o.msg_.has_value()) return false;
    return *msg_ < *o.msg_;
  }

  // Canonical Value encoding, used wherever option messages participate in
  // ordered sets or serialized traces.
  Value encode() const {
    if (!is_proper()) return vsym("none");
    return vlist({message()});
  }

  std::string repr() const { return is_proper() ? msg_->repr() : "(none)"; }

 private:
  std::optional<Value> msg_;
};

}  // namespace vlsm
