#include "rme/schedule_array.hpp"

namespace rme {

SubsetKey mask_of(const std::set<ProcessId>& s) {
  SubsetKey m = 0;
  for (ProcessId p : s) m |= pid_bit(p);
  return m;
}

std::vector<ProcessId> pids_of(SubsetKey m) {
  std::vector<ProcessId> out;
  for (ProcessId p = 1; p <= 64; ++p) {
    if (mask_contains(m, p)) out.push_back(p);
  }
  return out;
}

std::vector<SubsetKey> interval_subsets(SubsetKey lo, SubsetKey hi) {
  std::vector<SubsetKey> out;
  const SubsetKey free = hi & ~lo;
  // Enumerate submasks of `free` in increasing order.
  SubsetKey sub = 0;
  while (true) {
    out.push_back(lo | sub);
    if (sub == free) break;
    sub = (sub - free) & free;  // next submask
  }
  return out;
}

json schedule_array_to_json(const ScheduleArray& a, MemoryModel model,
                            const std::string& algorithm) {
  json entries = json::array();
  for (const auto& [mask, sched] : a.entries) {
    entries.push_back(json{{"subset_mask", mask}, {"schedule", schedule_to_json(sched)}});
  }
  json j;
  j["schema_version"] = 1;
  j["n"] = a.n;
  j["i"] = a.round;
  j["model"] = memory_model_name(model);
  j["algorithm"] = algorithm;
  if (a.caches_valid) {
    j["smax"] = a.smax;
    j["fmax"] = a.fmax;
  }
  j["entries"] = std::move(entries);
  return j;
}

LoadedArray schedule_array_from_json(const json& j) {
  LoadedArray out;
  try {
    out.array.n = j.at("n").get<int>();
    out.array.round = j.at("i").get<int>();
    out.model = parse_memory_model(j.at("model").get<std::string>());
    out.algorithm = j.at("algorithm").get<std::string>();
    for (const auto& e : j.at("entries")) {
      out.array.entries[e.at("subset_mask").get<SubsetKey>()] =
          schedule_from_json(e.at("schedule"));
    }
  } catch (const json::exception& e) {
    throw RmeError(ErrorCode::ParseError, std::string("bad schedule array: ") + e.what());
  }
  if (out.array.n < 1 || out.array.n > 64) {
    throw RmeError(ErrorCode::ParseError, "schedule array: n out of range");
  }
  return out;
}

}  // namespace rme
