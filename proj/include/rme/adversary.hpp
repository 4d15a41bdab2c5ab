#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rme/algorithms.hpp"
#include "rme/compliance.hpp"
#include "rme/schedule_array.hpp"
#include "rme/world.hpp"

namespace rme {

struct AdversaryConfig {
  int n = 4;
  int k = 1;
  MemoryModel model = MemoryModel::CC;
  std::string algorithm = "cas-owner-lock";
  int max_rounds = 64;
  long min_active = -1;        // -1 selects max(1, k^3)
  long step_budget = 100000;   // solo quiet runs and completion discovery
  bool seeded_random = false;  // tie-breaks; default is smallest-id
  std::uint64_t seed = 0;
  enum class Verify { EachRound, FinalOnly, Off } verify = Verify::EachRound;
  ComplianceMode verify_mode = ComplianceMode::Exhaustive;
  int sample_size = 64;
  long max_subsets = 1 << 16;
  int a2_budget = 0;  // 0 selects ceil(log2 n)
  bool crash_clears_cache = true;
  // Group-size knobs for desk-scale experiments; 0 derives from k.
  int q1 = 0, q3 = 0, q5 = 0, qbeta = 0;

  long effective_min_active() const;
  int effective_a2_budget() const;
};

struct Quotas {
  int q1 = 2;     // initial group size
  int q3 = 2;     // size after the ownership/history filter
  int q5 = 2;     // size after the operation-type filter
  int qbeta = 3;  // minimum surviving group size for a beta pick
};
Quotas derive_quotas(const AdversaryConfig& cfg);

// Resolves "arbitrary" choices: smallest element by default, or seeded-random
// when fuzzing. Deterministic for a fixed (mode, seed).
class TieBreaker {
 public:
  TieBreaker(bool random, std::uint64_t seed) : random_(random), rng_(seed) {}

  template <typename T>
  T pick(const std::vector<T>& sorted_nonempty) {
    if (!random_) return sorted_nonempty.front();
    return sorted_nonempty[rng_() % sorted_nonempty.size()];
  }

  // Identity in smallest-id mode; a shuffle when fuzzing. Callers take a
  // prefix of the result wherever an arbitrary subset is needed.
  template <typename T>
  std::vector<T> arrange(std::vector<T> sorted) {
    if (random_) std::shuffle(sorted.begin(), sorted.end(), rng_);
    return sorted;
  }

 private:
  bool random_;
  std::mt19937_64 rng_;
};

// ---------------------------------------------------------------------------
// Pure contention layer: everything below operates on a snapshot of who is
// poised on what, independent of the schedule-array machinery, so the same
// code drives real rounds and large synthetic fixtures.

struct PoisedProcess {
  ProcessId pid = 0;
  RegisterId reg = -1;
  OpKind kind = OpKind::Read;
  Value cas_expected;  // valid when kind == Cas
  Value cas_new;       // valid when kind == Cas
};

struct ContentionSnapshot {
  int n = 0;
  int k = 1;
  std::vector<PoisedProcess> poised;  // active processes, ascending pid
  std::map<RegisterId, ProcessId> owner;
  std::map<RegisterId, std::set<ProcessId>> accessors;  // everyone who ever touched R
  std::map<RegisterId, std::optional<ProcessId>> last;  // last toucher of R
  std::map<RegisterId, Value> values;                   // current register values

  const PoisedProcess& poised_of(ProcessId p) const;
};

struct DecisionResult {
  std::map<RegisterId, std::set<ProcessId>> by_register;
  std::set<ProcessId> high, low;
  bool low_branch = true;  // taken when |low| >= |high|
};
DecisionResult decision_phase(const ContentionSnapshot& snap);

enum class EdgeTag { SameRegister, OwnedBy, PreviouslyAccessed };
const char* edge_tag_name(EdgeTag t);

struct ConflictEdge {
  ProcessId a = 0, b = 0;  // a < b
  EdgeTag tag = EdgeTag::SameRegister;
};

struct ConflictGraph {
  std::vector<ProcessId> vertices;  // ascending
  std::vector<ConflictEdge> edges;  // deduplicated
};
ConflictGraph build_conflict_graph(const ContentionSnapshot& snap,
                                   const std::set<ProcessId>& low);

// Greedy minimum-degree elimination; meets the |V|/(avg_degree+1) floor.
std::set<ProcessId> greedy_independent_set(const ConflictGraph& g);

struct Group {
  std::vector<ProcessId> members;  // ascending
  RegisterId target = -1;
};

struct FilterChain {
  std::set<ProcessId> h1, h2, h3, h4, h5;
  OpKind plurality_op = OpKind::Read;
  std::vector<Group> groups;  // surviving groups; their members partition h5
  int group_count() const { return static_cast<int>(groups.size()); }
};
// Shrinks the high-contention set through the five filters. Throws
// HIGH_DEGENERATE when no group survives.
FilterChain high_filter_chain(const ContentionSnapshot& snap,
                              const std::set<ProcessId>& high, const Quotas& q,
                              TieBreaker& tb);

struct AlphaSelection {
  std::vector<ProcessId> alpha1, alpha2;  // per group
  std::vector<Value> target_value;        // register value right before group j steps
  std::set<ProcessId> alpha_set;
  Schedule alpha_schedule;
};
// `values` are the register contents at the configuration the alphas will
// run from; they are evolved group by group to drive the CAS rule.
AlphaSelection select_alphas(const FilterChain& chain, const ContentionSnapshot& snap,
                             std::map<RegisterId, Value> values, TieBreaker& tb);

struct BetaSelection {
  std::set<ProcessId> disturbed;  // dropped: the completion touched their registers
  std::set<ProcessId> h6;
  std::vector<std::vector<ProcessId>> surviving_members;  // per group, within h6
  std::vector<std::optional<ProcessId>> beta1;            // per group
  std::set<ProcessId> beta_set;                           // alphas plus betas
};
BetaSelection compute_disturbed_and_betas(
    const FilterChain& chain, const AlphaSelection& alphas,
    const std::set<RegisterId>& completion_regs,
    const std::map<RegisterId, std::optional<ProcessId>>& last_at_group_row,
    const ContentionSnapshot& snap, const Quotas& q, TieBreaker& tb);

// The per-group step fragment substituted for group j when its beta process
// is present in the entry's subset.
Schedule beta_fragment(int j, const FilterChain& chain, const AlphaSelection& alphas,
                       const BetaSelection& betas, const ContentionSnapshot& snap);

// ---------------------------------------------------------------------------
// Round reporting

struct BoundCheck {
  bool applicable = false;  // preconditions held, so the bound was asserted
  bool holds = true;
  long long lhs = 0, rhs = 0;
  std::string expr;

  json to_json() const;
};

enum class Branch { Low, High, HighFallbackLow, Terminated };
const char* branch_name(Branch b);

struct RoundReport {
  int round = 0;
  Branch branch = Branch::Terminated;
  std::string termination_reason;

  long size_high = 0, size_low = 0;
  long size_h1 = 0, size_h2 = 0, size_h3 = 0, size_h4 = 0, size_h5 = 0, size_h6 = 0;
  long size_iset = 0, size_alpha = 0, size_beta = 0, size_disturbed = 0;
  long conflict_edges = 0;
  long n_active = 0;       // n_i after the round
  long n_active_prev = 0;  // n_{i-1}

  BoundCheck edge_bound;    // edges <= 3 k |L| B
  BoundCheck iset_bound;    // |I| * 7 k B >= |L|
  BoundCheck dsize_bound;   // |D| <= 2 |alpha| B
  BoundCheck beta_bound;    // |beta \ alpha| * 1024 k > 5 |H|   (paper-faithful only)
  BoundCheck shrink_bound;  // informational: n_i >= n_{i-1}/(7 k B) - 1 on Low rounds

  bool a2_held = false;
  AssumptionReport assumptions;
  std::optional<ComplianceReport> compliance;

  json to_json() const;
};

struct FinalWitness {
  int rounds_completed = 0;
  std::vector<ProcessId> active_pids;
  std::map<ProcessId, int> rmr_counts;
  bool rmr_floor_ok = true;   // every active has >= rounds_completed RMRs
  bool zero_crash_ok = true;  // every active has crash_count == 0
  bool never_cs_ok = true;    // no active ever held the CS section

  bool ok() const { return rmr_floor_ok && zero_crash_ok && never_cs_ok; }
  json to_json() const;
};

struct RunResult {
  std::vector<RoundReport> rounds;
  std::vector<ScheduleArray> rows;  // rows[0] is the base row
  std::optional<ComplianceReport> base_compliance;
  FinalWitness witness;
  std::optional<ErrorCode> error_code;
  json error;  // null when the run ended cleanly

  bool clean() const { return !error_code.has_value(); }
  bool all_compliance_pass() const;
  int rounds_completed() const;
  json to_json(const AdversaryConfig& cfg) const;
  std::string to_csv() const;
};

// ---------------------------------------------------------------------------

class Adversary {
 public:
  explicit Adversary(const AdversaryConfig& cfg);

  const World& world() const { return world_; }
  const AdversaryConfig& config() const { return cfg_; }

  ScheduleArray base_row() const;

  // Termination test against the previous round's row. `report` must carry
  // the row's compliance verdict when verification is on.
  bool should_terminate(const ScheduleArray& prev, bool prev_compliant,
                        long n_prev, std::string* reason) const;

  // Longest RMR-free solo continuation of p after its minimal entry.
  Schedule compute_sigma_p(const ScheduleArray& prev, ProcessId p) const;

  // Appends every active process's quiet run to every entry and asserts the
  // quiet-segment properties. No critical-section eviction yet.
  ScheduleArray setup_phase(const ScheduleArray& prev) const;

  // Removes the (at most one) active critical-section occupant by dropping
  // every entry that contains it.
  ScheduleArray cs_eviction(const ScheduleArray& array) const;

  // Poise/ownership/history snapshot at the end of the maximal entry.
  ContentionSnapshot snapshot(const ScheduleArray& array) const;

  ScheduleArray low_phase(const ScheduleArray& array, const std::set<ProcessId>& iset) const;

  ScheduleArray high_phase(const ScheduleArray& array, const DecisionResult& decision,
                           RoundReport& report) const;

  RunResult run() const;

 private:
  AdversaryConfig cfg_;
  World world_;
  Quotas quotas_;
};

}  // namespace rme
