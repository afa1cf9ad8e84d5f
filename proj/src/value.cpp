#include "vlsm/value.hpp"

#include <algorithm>

namespace vlsm {

bool Value::operator==(const Value& o) const {
  if (rep_.index() != o.rep_.index()) return false;
  switch (kind()) {
    case Kind::Int:
      return as_int() == o.as_int();
    case Kind::Sym:
      return as_sym() == o.as_sym();
    case Kind::List: {
      const auto& a = std::get<std::shared_ptr<const std::vector<Value>>>(rep_);
      const auto& b = std::get<std::shared_ptr<const std::vector<Value>>>(o.rep_);
      if (a == b) return true;
      return *a == *b;
    }
  }
  return false;
}

std::strong_ordering Value::operator<=>(const Value& o) const {
  if (auto c = rep_.index() <=> o.rep_.index(); c != 0) return c;
  switch (kind()) {
    case Kind::Int:
      return as_int() <=> o.as_int();
    case Kind::Sym:
      return as_sym() <=> o.as_sym();
    case Kind::List: {
      const auto& a = items();
      const auto& b = o.items();
      size_t n = std::min(a.size(), b.size());
      for (size_t i = 0; i < n; ++i) {
        if (auto c = a[i] <=> b[i]; c != 0) return c;
      }
      return a.size() <=> b.size();
    }
  }
  return std::strong_ordering::equal;
}

std::string Value::repr() const {
  switch (kind()) {
    case Kind::Int:
      return std::to_string(as_int());
    case Kind::Sym:
      return as_sym();
    case Kind::List: {
      std::string out = "(";
      const auto& xs = items();
      for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += " ";
        out += xs[i].repr();
      }
      out += ")";
      return out;
    }
  }
  return "?";
}

}  // namespace vlsm
