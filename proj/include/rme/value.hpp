#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace rme {

// Register contents: structured terms. Booleans never live in registers in the
// shipped algorithms; they exist so CAS responses share the same carrier type.
class Value {
 public:
  struct Null {
    bool operator==(const Null&) const = default;
    auto operator<=>(const Null&) const = default;
  };

  Value() : rep_(Null{}) {}

  static Value null() { return Value(); }
  static Value boolean(bool b) { return Value(Rep(b)); }
  static Value integer(std::int64_t v) { return Value(Rep(v)); }
  static Value symbol(std::string name) { return Value(Rep(std::move(name))); }
  static Value tuple(std::vector<Value> items) { return Value(Rep(std::move(items))); }

  bool is_null() const { return std::holds_alternative<Null>(rep_); }
  bool is_boolean() const { return std::holds_alternative<bool>(rep_); }
  bool is_integer() const { return std::holds_alternative<std::int64_t>(rep_); }
  bool is_symbol() const { return std::holds_alternative<std::string>(rep_); }
  bool is_tuple() const { return std::holds_alternative<std::vector<Value>>(rep_); }

  bool as_boolean() const { return std::get<bool>(rep_); }
  std::int64_t as_integer() const { return std::get<std::int64_t>(rep_); }
  const std::string& as_symbol() const { return std::get<std::string>(rep_); }
  const std::vector<Value>& as_tuple() const { return std::get<std::vector<Value>>(rep_); }

  bool operator==(const Value&) const = default;
  auto operator<=>(const Value&) const = default;

  std::string to_string() const;

 private:
  using Rep = std::variant<Null, bool, std::int64_t, std::string, std::vector<Value>>;
  explicit Value(Rep rep) : rep_(std::move(rep)) {}
  Rep rep_;
};

enum class OpKind { Read, Fas, Fai, Cas };

const char* op_kind_name(OpKind k);

// The four primitive operations. Write is subsumed by Fas.
struct Operation {
  OpKind kind = OpKind::Read;
  Value arg0;  // Fas: new value; Cas: expected value
  Value arg1;  // Cas: new value

  static Operation read() { return {OpKind::Read, {}, {}}; }
  static Operation fas(Value v) { return {OpKind::Fas, std::move(v), {}}; }
  static Operation fai() { return {OpKind::Fai, {}, {}}; }
  static Operation cas(Value expected, Value next) {
    return {OpKind::Cas, std::move(expected), std::move(next)};
  }

  bool operator==(const Operation&) const = default;
};

// Pure register semantics: applies op to the current value, yields the new
// value and the response. Fai on a non-integer leaves the value alone and
// returns it; Cas on mismatch leaves the value alone and returns false.
struct OpResult {
  Value new_value;
  Value response;
};
OpResult apply_op(const Value& current, const Operation& op);

}  // namespace rme
