#include "rme/algorithms.hpp"

#include <map>

namespace rme {

namespace {

const Value kWait = Value::symbol("wait");
const Value kGo = Value::symbol("go");
const Value kLocked = Value::symbol("locked");
const Value kUnlocked = Value::symbol("unlocked");

// Test-and-set style lock. Acquisition: CAS(lock, null, pid) with a read spin
// on failure. Recover reads the lock register; if it still holds our pid we
// re-enter the critical section, otherwise we restart the entry protocol.
// Safe under at most one crash per process (exercised exhaustively in tests).
class CasOwnerLock : public Program {
 public:
  CasOwnerLock(ProcessId pid, RegisterId lock, RegisterId a1)
      : pid_(pid), lock_(lock), a1_(a1) {}

  LocalState recover_state() const override { return {9, {}}; }

  PendingAction pending(const LocalState& s) const override {
    switch (s.pc) {
      case 0: return PendingAction::mem(Operation::cas(Value::null(), Value::integer(pid_)), lock_);
      case 1: return PendingAction::mem(Operation::read(), lock_);
      case 3: return PendingAction::enter_cs();
      case 4: return PendingAction::mem(Operation::fas(Value::integer(pid_)), a1_);
      case 5: return PendingAction::leave_cs();
      case 6: return PendingAction::mem(Operation::fas(Value::null()), lock_);
      case 7: return PendingAction::complete();
      case 9: return PendingAction::mem(Operation::read(), lock_);
      default: throw RmeError(ErrorCode::ProgramFault, "cas-owner-lock: bad pc");
    }
  }

  LocalState advance(const LocalState& s, const Value& r) const override {
    switch (s.pc) {
      case 0: return {r == Value::boolean(true) ? 3 : 1, {}};
      case 1: return {r.is_null() ? 0 : 1, {}};
      case 3: return {4, {}};
      case 4: return {5, {}};
      case 5: return {6, {}};
      case 6: return {7, {}};
      case 7: return {8, {}};
      case 9: return {r == Value::integer(pid_) ? 3 : 0, {}};
      default: throw RmeError(ErrorCode::ProgramFault, "cas-owner-lock: bad pc");
    }
  }

 private:
  ProcessId pid_;
  RegisterId lock_, a1_;
};

// FAS-built queue lock in the CLH style: mark the own slot locked, swap into
// the tail, spin on the predecessor's slot. Recover restarts the entry
// protocol from scratch, which makes the lock crash-fragile on purpose: a
// crashed waiter re-marks its slot and re-enqueues, stranding its successor.
class FasQueueLock : public Program {
 public:
  FasQueueLock(ProcessId pid, RegisterId tail, RegisterId a1,
               std::vector<RegisterId> slots)
      : pid_(pid), tail_(tail), a1_(a1), slots_(std::move(slots)) {}

  LocalState recover_state() const override { return {8, {}}; }

  PendingAction pending(const LocalState& s) const override {
    switch (s.pc) {
      case 0: return PendingAction::mem(Operation::fas(kLocked), slots_[pid_ - 1]);
      case 1: return PendingAction::mem(Operation::fas(Value::integer(pid_)), tail_);
      case 2: {
        ProcessId prev = static_cast<ProcessId>(s.vars.at(0).as_integer());
        return PendingAction::mem(Operation::read(), slots_[prev - 1]);
      }
      case 3: return PendingAction::enter_cs();
      case 4: return PendingAction::mem(Operation::fas(Value::integer(pid_)), a1_);
      case 5: return PendingAction::leave_cs();
      case 6: return PendingAction::mem(Operation::fas(kUnlocked), slots_[pid_ - 1]);
      case 7: return PendingAction::complete();
      case 8: return PendingAction::mem(Operation::read(), slots_[pid_ - 1]);
      default: throw RmeError(ErrorCode::ProgramFault, "fas-queue-lock: bad pc");
    }
  }

  LocalState advance(const LocalState& s, const Value& r) const override {
    switch (s.pc) {
      case 0: return {1, {}};
      case 1:
        if (r.is_null()) return {3, {}};
        return {2, {r}};
      case 2: return {r == kUnlocked ? 3 : 2, s.vars};
      case 3: return {4, {}};
      case 4: return {5, {}};
      case 5: return {6, {}};
      case 6: return {7, {}};
      case 7: return {8, {}};
      case 8: return {0, {}};
      default: throw RmeError(ErrorCode::ProgramFault, "fas-queue-lock: bad pc");
    }
  }

 private:
  ProcessId pid_;
  RegisterId tail_, a1_;
  std::vector<RegisterId> slots_;
};

// MCS-style queue lock where every waiter spins on a register it owns, so in
// the DSM model the entry protocol performs three local steps before its
// first remote access. Hand-off goes through the successor's flag via FAS.
// Recover restarts the entry protocol (crash-fragile like any bare FAS queue).
class DsmLocalSpinLock : public Program {
 public:
  DsmLocalSpinLock(ProcessId pid, RegisterId tail, RegisterId a1,
                   std::vector<RegisterId> flags, std::vector<RegisterId> nexts)
      : pid_(pid), tail_(tail), a1_(a1), flags_(std::move(flags)), nexts_(std::move(nexts)) {}

  LocalState recover_state() const override { return {14, {}}; }

  PendingAction pending(const LocalState& s) const override {
    switch (s.pc) {
      case 0: return PendingAction::mem(Operation::fas(kWait), flags_[pid_ - 1]);
      case 1: return PendingAction::mem(Operation::fas(Value::null()), nexts_[pid_ - 1]);
      case 2: return PendingAction::mem(Operation::read(), flags_[pid_ - 1]);
      case 3: return PendingAction::mem(Operation::fas(Value::integer(pid_)), tail_);
      case 4: {
        ProcessId prev = static_cast<ProcessId>(s.vars.at(0).as_integer());
        return PendingAction::mem(Operation::fas(Value::integer(pid_)), nexts_[prev - 1]);
      }
      case 5: return PendingAction::mem(Operation::read(), flags_[pid_ - 1]);
      case 6: return PendingAction::enter_cs();
      case 7: return PendingAction::mem(Operation::fas(Value::integer(pid_)), a1_);
      case 8: return PendingAction::leave_cs();
      case 9: return PendingAction::mem(Operation::read(), nexts_[pid_ - 1]);
      case 10: return PendingAction::mem(Operation::cas(Value::integer(pid_), Value::null()), tail_);
      case 11: return PendingAction::mem(Operation::read(), nexts_[pid_ - 1]);
      case 12: {
        ProcessId succ = static_cast<ProcessId>(s.vars.at(0).as_integer());
        return PendingAction::mem(Operation::fas(kGo), flags_[succ - 1]);
      }
      case 13: return PendingAction::complete();
      case 14: return PendingAction::mem(Operation::read(), flags_[pid_ - 1]);
      default: throw RmeError(ErrorCode::ProgramFault, "dsm-local-spin-lock: bad pc");
    }
  }

  LocalState advance(const LocalState& s, const Value& r) const override {
    switch (s.pc) {
      case 0: return {1, {}};
      case 1: return {2, {}};
      case 2: return {3, {}};
      case 3:
        if (r.is_null()) return {6, {}};
        return {4, {r}};
      case 4: return {5, {}};
      case 5: return {r == kGo ? 6 : 5, {}};
      case 6: return {7, {}};
      case 7: return {8, {}};
      case 8: return {9, {}};
      case 9:
        if (r.is_null()) return {10, {}};
        return {12, {r}};
      case 10: return {r == Value::boolean(true) ? 13 : 11, {}};
      case 11:
        if (r.is_null()) return {11, {}};
        return {12, {r}};
      case 12: return {13, {}};
      case 13: return {13, {}};
      case 14: return {0, {}};
      default: throw RmeError(ErrorCode::ProgramFault, "dsm-local-spin-lock: bad pc");
    }
  }

 private:
  ProcessId pid_;
  RegisterId tail_, a1_;
  std::vector<RegisterId> flags_, nexts_;
};

// Deliberately broken: performs the acquisition CAS but ignores the response
// and walks into the critical section regardless. Exists so negative paths
// (mutual-exclusion detection, counterexample traces) have a target.
class BrokenLock : public Program {
 public:
  BrokenLock(ProcessId pid, RegisterId lock, RegisterId a1)
      : pid_(pid), lock_(lock), a1_(a1) {}

  LocalState recover_state() const override { return {6, {}}; }

  PendingAction pending(const LocalState& s) const override {
    switch (s.pc) {
      case 0: return PendingAction::mem(Operation::cas(Value::null(), Value::integer(pid_)), lock_);
      case 1: return PendingAction::enter_cs();
      case 2: return PendingAction::mem(Operation::fas(Value::integer(pid_)), a1_);
      case 3: return PendingAction::leave_cs();
      case 4: return PendingAction::mem(Operation::fas(Value::null()), lock_);
      case 5: return PendingAction::complete();
      case 6: return PendingAction::mem(Operation::read(), lock_);
      default: throw RmeError(ErrorCode::ProgramFault, "broken-lock: bad pc");
    }
  }

  LocalState advance(const LocalState& s, const Value&) const override {
    switch (s.pc) {
      case 6: return {0, {}};
      default: return {s.pc + 1, {}};
    }
  }

 private:
  ProcessId pid_;
  RegisterId lock_, a1_;
};

}  // namespace

std::vector<AlgorithmDescriptor> sample_algorithms() {
  return {
      {"cas-owner-lock",
       "CAS acquisition with read spin; Recover resumes the CS when it still "
       "holds the lock, else restarts entry",
       true},
      {"fas-queue-lock",
       "FAS/CLH queue lock with restart-on-recover; crash-fragile by design",
       false},
      {"dsm-local-spin-lock",
       "MCS-style queue lock spinning on owned registers; FAS hand-off; "
       "restart-on-recover",
       false},
      {"broken-lock",
       "ignores the CAS response and enters the CS regardless; violates "
       "mutual exclusion (negative-testing sample)",
       false},
  };
}

AlgorithmInstance make_algorithm(const std::string& name, int n) {
  if (n < 1) throw RmeError(ErrorCode::Usage, "need at least one process");
  AlgorithmInstance a;
  a.name = name;
  a.n = n;
  auto add_reg = [&a](const std::string& rname, std::optional<ProcessId> owner,
                      Value init) {
    RegisterId id = static_cast<RegisterId>(a.registers.size());
    a.registers.push_back(RegisterInfo{id, rname, owner, std::move(init)});
    return id;
  };

  if (name == "cas-owner-lock" || name == "broken-lock") {
    RegisterId lock = add_reg("lock", std::nullopt, Value::null());
    RegisterId a1 = add_reg("a1", std::nullopt, Value::null());
    for (ProcessId p = 1; p <= n; ++p) {
      if (name == "cas-owner-lock") {
        a.programs.push_back(std::make_shared<CasOwnerLock>(p, lock, a1));
      } else {
        a.programs.push_back(std::make_shared<BrokenLock>(p, lock, a1));
      }
    }
    return a;
  }
  if (name == "fas-queue-lock") {
    RegisterId tail = add_reg("tail", std::nullopt, Value::null());
    RegisterId a1 = add_reg("a1", std::nullopt, Value::null());
    std::vector<RegisterId> slots;
    for (ProcessId p = 1; p <= n; ++p) {
      slots.push_back(add_reg("slot[" + std::to_string(p) + "]", p, kUnlocked));
    }
    for (ProcessId p = 1; p <= n; ++p) {
      a.programs.push_back(std::make_shared<FasQueueLock>(p, tail, a1, slots));
    }
    return a;
  }
  if (name == "dsm-local-spin-lock") {
    RegisterId tail = add_reg("tail", std::nullopt, Value::null());
    RegisterId a1 = add_reg("a1", std::nullopt, Value::null());
    std::vector<RegisterId> flags, nexts;
    for (ProcessId p = 1; p <= n; ++p) {
      flags.push_back(add_reg("flag[" + std::to_string(p) + "]", p, Value::null()));
    }
    for (ProcessId p = 1; p <= n; ++p) {
      nexts.push_back(add_reg("next[" + std::to_string(p) + "]", p, Value::null()));
    }
    for (ProcessId p = 1; p <= n; ++p) {
      a.programs.push_back(std::make_shared<DsmLocalSpinLock>(p, tail, a1, flags, nexts));
    }
    return a;
  }
  throw RmeError(ErrorCode::UnknownAlgorithm, "unknown algorithm: " + name);
}

int log2_ceil(int n) {
  int bits = 0;
  for (int v = 1; v < n; v <<= 1) ++bits;
  return bits < 1 ? 1 : bits;
}

AssumptionReport check_assumptions(const ExecutionTrace& trace, int n, int budget) {
  AssumptionReport rep;
  rep.a2_budget = budget > 0 ? budget : log2_ceil(n);
  rep.a2_max = max_passage_rmrs(trace);
  rep.a2_ok = rep.a2_max <= rep.a2_budget;

  std::map<ProcessId, bool> in_cs;
  std::map<ProcessId, bool> cs_had_rmr;
  std::map<ProcessId, int> super_passages;
  std::map<ProcessId, bool> started;
  for (const auto& ev : trace.events) {
    switch (ev.kind) {
      case Event::Kind::MemOp:
        if (!started[ev.pid]) {
          started[ev.pid] = true;
          super_passages[ev.pid] += 1;
        }
        if (in_cs[ev.pid] && ev.rmr) cs_had_rmr[ev.pid] = true;
        break;
      case Event::Kind::EnterCS:
        if (!started[ev.pid]) {
          started[ev.pid] = true;
          super_passages[ev.pid] += 1;
        }
        in_cs[ev.pid] = true;
        cs_had_rmr[ev.pid] = false;
        break;
      case Event::Kind::LeaveCS:
        if (!cs_had_rmr[ev.pid]) rep.a1_ok = false;
        in_cs[ev.pid] = false;
        break;
      case Event::Kind::Complete:
        started[ev.pid] = false;  // a later restart would be a second super-passage
        break;
      case Event::Kind::Crash:
        in_cs[ev.pid] = false;
        break;
    }
  }
  for (const auto& [pid, count] : super_passages) {
    if (count > 1) rep.a3_ok = false;
  }
  return rep;
}

}  // namespace rme
