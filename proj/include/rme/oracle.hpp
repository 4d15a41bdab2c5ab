#pragma once

#include <optional>

#include "rme/compliance.hpp"
#include "rme/schedule_array.hpp"
#include "rme/world.hpp"

namespace rme {

struct ExplorationBounds {
  int max_depth = 60;
  int max_crashes_per_process = 1;
  int fairness_window = 200;   // round-robin budget used to triage stalls
  long node_cap = 2'000'000;   // visited-configuration cap
};

struct SafetyReport {
  long states_explored = 0;
  bool mutual_exclusion_ok = true;
  std::optional<Schedule> mutual_exclusion_witness;
  bool a1_ok = true;  // every completed CS visit incurred an RMR
  std::optional<Schedule> a1_witness;
  long depth_bound_hits = 0;  // frontier states cut off at max_depth
  // Depth-bound states from which a fair round-robin continuation finished
  // nobody within the fairness window: a bounded no-progress signal.
  long no_progress_states = 0;

  bool all_ok() const { return mutual_exclusion_ok && a1_ok; }
  json to_json() const;
};

// Exhaustive interleaving exploration with crash injection, memoized on
// canonical configurations. Throws STATE_SPACE_OVERFLOW past the node cap.
SafetyReport explore(const World& world, const ExplorationBounds& bounds);

// Recounts per-process RMRs from a raw trace, rebuilding cache validity and
// ownership from scratch and ignoring the trace's own rmr flags.
std::map<ProcessId, int> recount_rmr(const ExecutionTrace& trace, MemoryModel model,
                                     const World& world);

// Definition-level compliance re-derivation for tiny arrays (<= 512 entries):
// a deliberately plain second implementation used to cross-check the checker.
ComplianceReport compliance_by_definition(const World& world, const ScheduleArray& array);

}  // namespace rme
