#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "rme/json_io.hpp"
#include "rme/types.hpp"

namespace rme {

// Process subsets as bitmasks: bit p-1 set iff process p is in the set.
// Mask form caps n at 64.
using SubsetKey = std::uint64_t;

inline SubsetKey pid_bit(ProcessId p) { return SubsetKey{1} << (p - 1); }
inline bool mask_contains(SubsetKey m, ProcessId p) { return (m & pid_bit(p)) != 0; }
inline int mask_size(SubsetKey m) { return std::popcount(m); }

SubsetKey mask_of(const std::set<ProcessId>& s);
std::vector<ProcessId> pids_of(SubsetKey m);

// All subsets S with lo ⊆ S ⊆ hi, ascending by mask value.
std::vector<SubsetKey> interval_subsets(SubsetKey lo, SubsetKey hi);

// One row of the construction: a sparse map from process subsets to
// schedules; absent keys mean ⊥. round is the compliance index the row is
// expected to satisfy.
struct ScheduleArray {
  int n = 0;
  int round = 0;
  std::map<SubsetKey, Schedule> entries;

  // Caches filled in by find_smax; 0 is a valid value, so validity is
  // tracked separately.
  SubsetKey smax = 0;
  SubsetKey fmax = 0;
  bool caches_valid = false;

  bool has(SubsetKey s) const { return entries.count(s) > 0; }
  const Schedule& at(SubsetKey s) const { return entries.at(s); }
};

json schedule_array_to_json(const ScheduleArray& a, MemoryModel model,
                            const std::string& algorithm);
struct LoadedArray {
  ScheduleArray array;
  MemoryModel model = MemoryModel::CC;
  std::string algorithm;
};
LoadedArray schedule_array_from_json(const json& j);

}  // namespace rme
