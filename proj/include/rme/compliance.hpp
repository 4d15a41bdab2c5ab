#pragma once

#include <array>
#include <optional>
#include <string>

#include "rme/schedule_array.hpp"
#include "rme/world.hpp"

namespace rme {

// The ten row invariants, numbered as the checker reports them:
//   I1  every entry's schedule only steps processes in its own subset
//   I2  the non-empty keys form exactly the interval [F(A[smax]), smax]
//       for a unique maximal subset smax
//   I3  each process's state (program state + section) agrees with the
//       maximal entry in every entry containing it
//   I4  the finished set is identical across entries
//   I5  each register's value depends only on whether the entry contains
//       the register's last accessor in the maximal entry
//   I6  nobody crashes twice, and non-finished processes never crash
//   I7  non-finished processes never enter the critical section
//   I8  (DSM) registers owned by active processes are touched only by
//       their owner
//   I9  (CC) each active process holds the same valid-cache set in every
//       entry containing it
//   I10 every active process incurs at least `round` RMRs in every entry
enum class Invariant {
  StepsWithinSubset = 1,
  UniqueMaxInterval = 2,
  StatesAgree = 3,
  FinishedAgree = 4,
  ValuesAgree = 5,
  CrashBudget = 6,
  NoCriticalSection = 7,
  DsmOwnerOnly = 8,
  CacheSetsAgree = 9,
  RmrFloor = 10,
};

enum class VerdictKind { Pass, Fail, Skipped };

struct Verdict {
  VerdictKind kind = VerdictKind::Pass;
  json witness;  // concrete counterexample, replayable through the core model

  bool pass() const { return kind == VerdictKind::Pass; }
};

enum class ComplianceMode { Exhaustive, Sampled };

struct ComplianceOptions {
  ComplianceMode mode = ComplianceMode::Exhaustive;
  int sample_size = 64;        // random interval subsets added in sampled mode
  long max_subsets = 1 << 16;  // exhaustive cap; beyond it, degrade to sampled
  std::uint64_t seed = 0x5eedULL;
};

struct ComplianceReport {
  int round = 0;
  ComplianceMode mode = ComplianceMode::Exhaustive;
  bool degraded = false;  // exhaustive was requested but the cap forced sampling
  long entries_total = 0;
  long entries_executed = 0;
  std::array<Verdict, 10> verdicts;
  std::optional<json> execution_error;  // an entry failed to replay at all

  const Verdict& verdict(Invariant i) const {
    return verdicts[static_cast<int>(i) - 1];
  }
  bool all_pass() const;
  json to_json() const;
};

// Locates the unique maximal non-empty key and the finished set of its
// entry, verifying the interval structure. Throws NO_UNIQUE_SMAX (the I2
// failure witness) when the structure is violated. Fills the array's caches.
struct SmaxInfo {
  SubsetKey smax = 0;
  SubsetKey fmax = 0;
};
SmaxInfo find_smax(const World& world, ScheduleArray& array);

// Runs a single invariant check (mode: every entry is executed).
Verdict check_invariant(const World& world, const ScheduleArray& array, Invariant which);

// Runs all ten checks at the array's round index.
ComplianceReport check_compliance(const World& world, const ScheduleArray& array,
                                  const ComplianceOptions& opts = {});

}  // namespace rme
