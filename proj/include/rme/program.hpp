#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rme/types.hpp"
#include "rme/value.hpp"

namespace rme {

// What a process would do on its next normal step.
struct PendingAction {
  enum class Kind { MemOp, EnterCS, LeaveCS, CompleteSuperPassage };
  Kind kind = Kind::MemOp;
  Operation op;      // valid when kind == MemOp
  RegisterId reg = -1;  // valid when kind == MemOp

  static PendingAction mem(Operation o, RegisterId r) {
    return {Kind::MemOp, std::move(o), r};
  }
  static PendingAction enter_cs() { return {Kind::EnterCS, {}, -1}; }
  static PendingAction leave_cs() { return {Kind::LeaveCS, {}, -1}; }
  static PendingAction complete() { return {Kind::CompleteSuperPassage, {}, -1}; }
};

// Serializable per-process program state: a control point plus value slots.
struct LocalState {
  int pc = 0;
  std::vector<Value> vars;

  bool operator==(const LocalState&) const = default;
  auto operator<=>(const LocalState&) const = default;
};

// A deterministic per-process state machine. pending() must be a pure
// function of the state; advance() consumes the response of the pending
// action (Value::null() for section transitions).
class Program {
 public:
  virtual ~Program() = default;
  virtual LocalState initial_state() const { return LocalState{}; }
  virtual LocalState recover_state() const = 0;
  virtual PendingAction pending(const LocalState& s) const = 0;
  virtual LocalState advance(const LocalState& s, const Value& response) const = 0;
};

struct RegisterInfo {
  RegisterId id = -1;
  std::string name;
  std::optional<ProcessId> owner;  // DSM segment assignment; fixed per run
  Value initial;
};

// A concrete n-process algorithm: its register table plus one program per pid.
struct AlgorithmInstance {
  std::string name;
  int n = 0;
  std::vector<RegisterInfo> registers;
  std::vector<std::shared_ptr<const Program>> programs;  // index pid-1

  const Program& program(ProcessId p) const { return *programs.at(p - 1); }
};

}  // namespace rme
