#include "rme/value.hpp"

#include <sstream>

namespace rme {

std::string Value::to_string() const {
  std::ostringstream os;
  if (is_null()) {
    os << "null";
  } else if (is_boolean()) {
    os << (as_boolean() ? "true" : "false");
  } else if (is_integer()) {
    os << as_integer();
  } else if (is_symbol()) {
    os << '\'' << as_symbol();
  } else {
    os << '(';
    const auto& items = as_tuple();
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) os << ' ';
      os << items[i].to_string();
    }
    os << ')';
  }
  return os.str();
}

const char* op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::Read: return "read";
    case OpKind::Fas: return "fas";
    case OpKind::Fai: return "fai";
    case OpKind::Cas: return "cas";
  }
  return "?";
}

OpResult apply_op(const Value& current, const Operation& op) {
  switch (op.kind) {
    case OpKind::Read:
      return {current, current};
    case OpKind::Fas:
      return {op.arg0, current};
    case OpKind::Fai:
      if (current.is_integer()) {
        return {Value::integer(current.as_integer() + 1), current};
      }
      return {current, current};
    case OpKind::Cas:
      if (current == op.arg0) {
        return {op.arg1, Value::boolean(true)};
      }
      return {current, Value::boolean(false)};
  }
  return {current, current};
}

}  // namespace rme
