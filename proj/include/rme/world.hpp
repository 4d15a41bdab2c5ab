#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rme/program.hpp"
#include "rme/types.hpp"

namespace rme {

// Full system snapshot. Treated as immutable once a phase hands it out;
// simulation clones and advances copies.
struct Configuration {
  std::vector<Value> reg_values;                      // by register id
  std::vector<LocalState> proc_state;                 // by pid-1
  std::vector<Section> section;                       // by pid-1
  std::vector<bool> started;                          // left the remainder section
  std::vector<std::set<RegisterId>> valid_cache;      // CC only, by pid-1
  std::vector<std::optional<ProcessId>> last_accessor;  // by register id
  std::set<ProcessId> finished;                       // completed super-passage
  std::vector<int> crash_count;                       // by pid-1
  std::vector<bool> cs_rmr_flag;  // incurred an RMR since entering the CS

  bool is_finished(ProcessId p) const { return finished.count(p) > 0; }
  // Processes currently holding the CS section label.
  std::vector<ProcessId> in_critical_section() const;
  // Canonical serialization: equal configurations produce equal strings.
  std::string canonical_key() const;

  bool operator==(const Configuration&) const = default;
};

struct Event {
  enum class Kind { MemOp, EnterCS, LeaveCS, Complete, Crash };
  Kind kind = Kind::MemOp;
  ProcessId pid = 0;
  Operation op;        // MemOp only
  RegisterId reg = -1;  // MemOp only
  bool rmr = false;     // MemOp only; pure function of model+pre-config+op
  Value response;       // MemOp only
  Section section_after = Section::Remainder;

  bool operator==(const Event&) const = default;
};

struct ExecutionTrace {
  std::vector<Event> events;

  bool operator==(const ExecutionTrace&) const = default;
};

struct ExecResult {
  Configuration config;
  ExecutionTrace trace;
};

// Like ExecResult but with a pre-step snapshot per executed step, for checks
// that need to look at caches or values mid-schedule.
struct ExecTrail {
  std::vector<Configuration> before;  // before[i] = configuration before step i
  Configuration final;
  ExecutionTrace trace;
};

// Deterministic semantics of one algorithm instance under one cost model.
class World {
 public:
  World(MemoryModel model, AlgorithmInstance algo, bool crash_clears_cache = true);

  MemoryModel model() const { return model_; }
  const AlgorithmInstance& algo() const { return algo_; }
  int n() const { return algo_.n; }
  int register_count() const { return static_cast<int>(algo_.registers.size()); }
  std::optional<ProcessId> owner(RegisterId r) const { return algo_.registers.at(r).owner; }
  bool crash_clears_cache() const { return crash_clears_cache_; }

  Configuration initial_config() const;

  // True iff performing op on reg from config would cost an RMR for pid.
  bool rmr_of(const Configuration& config, ProcessId pid, const Operation& op,
              RegisterId reg) const;

  // The action pid would perform on its next normal step. Side-effect free.
  PendingAction pending(const Configuration& config, ProcessId pid) const;

  // Executes a single step in place and returns the event.
  Event step(Configuration& config, Step s) const;

  ExecResult execute(const Configuration& start, const Schedule& schedule) const;
  ExecResult execute(const Schedule& schedule) const;  // from the initial configuration
  ExecTrail execute_trail(const Configuration& start, const Schedule& schedule) const;

 private:
  MemoryModel model_;
  AlgorithmInstance algo_;
  bool crash_clears_cache_;
};

// Number of RMR-flagged events of pid in the trace.
int rmr_count(const ExecutionTrace& trace, ProcessId pid);

// Largest RMR count incurred within a single passage of any process, where a
// passage runs from leaving the remainder (or restarting after a crash) to
// the next crash or super-passage completion.
int max_passage_rmrs(const ExecutionTrace& trace);

}  // namespace rme
