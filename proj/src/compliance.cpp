#include "rme/compliance.hpp"

#include <algorithm>
#include <random>

namespace rme {

namespace {

json state_to_json(const LocalState& s) {
  json vars = json::array();
  for (const auto& v : s.vars) vars.push_back(value_to_json(v));
  return json{{"pc", s.pc}, {"vars", std::move(vars)}};
}

struct EntryExec {
  SubsetKey mask = 0;
  Configuration config;
  // Digests of the trace; the raw trace is only kept implicitly via replay.
  std::map<ProcessId, int> crash_counts;
  std::set<ProcessId> entered_cs;
  std::map<ProcessId, int> rmrs;
  std::vector<std::pair<ProcessId, RegisterId>> accesses;  // MemOp events in order
};

struct CheckContext {
  const World* world = nullptr;
  const ScheduleArray* array = nullptr;
  SubsetKey smax = 0;
  SubsetKey fmax = 0;
  bool smax_ok = false;
  json smax_witness;
  std::map<SubsetKey, EntryExec> executed;
  std::optional<json> execution_error;

  const EntryExec& smax_entry() const { return executed.at(smax); }
};

EntryExec digest(const World& world, SubsetKey mask, const Schedule& sched) {
  EntryExec e;
  e.mask = mask;
  ExecResult r = world.execute(sched);
  for (const auto& ev : r.trace.events) {
    switch (ev.kind) {
      case Event::Kind::Crash:
        e.crash_counts[ev.pid] += 1;
        break;
      case Event::Kind::EnterCS:
        e.entered_cs.insert(ev.pid);
        break;
      case Event::Kind::MemOp:
        if (ev.rmr) e.rmrs[ev.pid] += 1;
        e.accesses.emplace_back(ev.pid, ev.reg);
        break;
      default:
        break;
    }
  }
  e.config = std::move(r.config);
  return e;
}

Verdict pass() { return {}; }
Verdict fail(json witness) { return {VerdictKind::Fail, std::move(witness)}; }
Verdict skipped(const char* why) {
  return {VerdictKind::Skipped, json{{"reason", why}}};
}

Verdict check_i1(const CheckContext& ctx) {
  for (const auto& [mask, sched] : ctx.array->entries) {
    for (std::size_t i = 0; i < sched.steps.size(); ++i) {
      if (!mask_contains(mask, sched.steps[i].pid)) {
        return fail(json{{"invariant", "I1"},
                         {"subset_mask", mask},
                         {"step_index", i},
                         {"pid", sched.steps[i].pid},
                         {"explanation", "schedule steps a process outside its subset"}});
      }
    }
  }
  return pass();
}

Verdict check_i2(const CheckContext& ctx) {
  if (!ctx.smax_ok) return fail(ctx.smax_witness);
  return pass();
}

Verdict check_i3(const CheckContext& ctx) {
  const EntryExec& top = ctx.smax_entry();
  for (const auto& [mask, e] : ctx.executed) {
    for (ProcessId p : pids_of(mask)) {
      const int i = p - 1;
      if (e.config.proc_state[i] != top.config.proc_state[i] ||
          e.config.section[i] != top.config.section[i]) {
        return fail(json{{"invariant", "I3"},
                         {"subset_mask", mask},
                         {"pid", p},
                         {"state", state_to_json(e.config.proc_state[i])},
                         {"smax_state", state_to_json(top.config.proc_state[i])},
                         {"section", section_name(e.config.section[i])},
                         {"smax_section", section_name(top.config.section[i])},
                         {"explanation", "process state differs from the maximal entry"}});
      }
    }
  }
  return pass();
}

Verdict check_i4(const CheckContext& ctx) {
  const EntryExec& top = ctx.smax_entry();
  for (const auto& [mask, e] : ctx.executed) {
    if (e.config.finished != top.config.finished) {
      return fail(json{{"invariant", "I4"},
                       {"subset_mask", mask},
                       {"finished", std::vector<ProcessId>(e.config.finished.begin(),
                                                           e.config.finished.end())},
                       {"smax_finished", std::vector<ProcessId>(top.config.finished.begin(),
                                                                top.config.finished.end())},
                       {"explanation", "finished set differs from the maximal entry"}});
    }
  }
  return pass();
}

Verdict check_i5(const CheckContext& ctx) {
  const EntryExec& top = ctx.smax_entry();
  for (RegisterId r = 0; r < ctx.world->register_count(); ++r) {
    const std::optional<ProcessId> w = top.config.last_accessor[r];
    std::optional<Value> y;
    SubsetKey y_source = 0;
    for (const auto& [mask, e] : ctx.executed) {
      const Value& val = e.config.reg_values[r];
      if (w && mask_contains(mask, *w)) {
        if (val != top.config.reg_values[r]) {
          return fail(json{{"invariant", "I5"},
                           {"subset_mask", mask},
                           {"reg", r},
                           {"last_accessor", *w},
                           {"value", value_to_json(val)},
                           {"smax_value", value_to_json(top.config.reg_values[r])},
                           {"explanation",
                            "entry contains the last accessor but disagrees with the "
                            "maximal entry's value"}});
        }
      } else {
        if (!y) {
          y = val;
          y_source = mask;
        } else if (*y != val) {
          return fail(json{{"invariant", "I5"},
                           {"subset_mask", mask},
                           {"reg", r},
                           {"value", value_to_json(val)},
                           {"y_value", value_to_json(*y)},
                           {"y_source_mask", y_source},
                           {"explanation",
                            "entries without the last accessor disagree on the shared "
                            "fallback value"}});
        }
      }
    }
  }
  return pass();
}

Verdict check_i6(const CheckContext& ctx) {
  for (const auto& [mask, e] : ctx.executed) {
    for (const auto& [pid, count] : e.crash_counts) {
      if (count > 1) {
        return fail(json{{"invariant", "I6"},
                         {"subset_mask", mask},
                         {"pid", pid},
                         {"crashes", count},
                         {"explanation", "process crashes more than once"}});
      }
      if (count > 0 && !e.config.is_finished(pid)) {
        return fail(json{{"invariant", "I6"},
                         {"subset_mask", mask},
                         {"pid", pid},
                         {"explanation", "non-finished process crashes"}});
      }
    }
  }
  return pass();
}

Verdict check_i7(const CheckContext& ctx) {
  for (const auto& [mask, e] : ctx.executed) {
    for (ProcessId p : e.entered_cs) {
      if (!e.config.is_finished(p)) {
        return fail(json{{"invariant", "I7"},
                         {"subset_mask", mask},
                         {"pid", p},
                         {"explanation", "non-finished process entered the critical section"}});
      }
    }
  }
  return pass();
}

Verdict check_i8(const CheckContext& ctx) {
  if (ctx.world->model() != MemoryModel::DSM) return pass();
  const SubsetKey active = ctx.smax & ~ctx.fmax;
  for (const auto& [mask, e] : ctx.executed) {
    for (const auto& [pid, reg] : e.accesses) {
      auto o = ctx.world->owner(reg);
      if (o && mask_contains(active, *o) && pid != *o) {
        return fail(json{{"invariant", "I8"},
                         {"subset_mask", mask},
                         {"pid", pid},
                         {"reg", reg},
                         {"owner", *o},
                         {"explanation", "register owned by an active process accessed "
                                         "by someone else"}});
      }
    }
  }
  return pass();
}

Verdict check_i9(const CheckContext& ctx) {
  if (ctx.world->model() != MemoryModel::CC) return pass();
  const EntryExec& top = ctx.smax_entry();
  for (ProcessId p : pids_of(ctx.smax & ~ctx.fmax)) {
    const auto& reference = top.config.valid_cache[p - 1];
    for (const auto& [mask, e] : ctx.executed) {
      if (!mask_contains(mask, p)) continue;
      if (e.config.valid_cache[p - 1] != reference) {
        return fail(json{{"invariant", "I9"},
                         {"subset_mask", mask},
                         {"pid", p},
                         {"cache", std::vector<RegisterId>(e.config.valid_cache[p - 1].begin(),
                                                           e.config.valid_cache[p - 1].end())},
                         {"smax_cache", std::vector<RegisterId>(reference.begin(),
                                                                reference.end())},
                         {"explanation", "active process's valid-cache set differs from "
                                         "the maximal entry"}});
      }
    }
  }
  return pass();
}

Verdict check_i10(const CheckContext& ctx) {
  const int floor = ctx.array->round;
  for (const auto& [mask, e] : ctx.executed) {
    for (ProcessId p : pids_of(mask)) {
      if (e.config.is_finished(p)) continue;
      auto it = e.rmrs.find(p);
      const int have = it == e.rmrs.end() ? 0 : it->second;
      if (have < floor) {
        return fail(json{{"invariant", "I10"},
                         {"subset_mask", mask},
                         {"pid", p},
                         {"rmrs", have},
                         {"required", floor},
                         {"explanation", "active process is below the round's RMR floor"}});
      }
    }
  }
  return pass();
}

using Checker = Verdict (*)(const CheckContext&);

constexpr std::array<Checker, 10> kCheckers = {
    check_i1, check_i2, check_i3, check_i4, check_i5,
    check_i6, check_i7, check_i8, check_i9, check_i10,
};

// Which entries get executed in sampled mode: the maximal entry, the minimal
// entry, every singleton extension of it, plus `sample_size` random interval
// members.
std::set<SubsetKey> sampled_masks(const ScheduleArray& array, SubsetKey smax,
                                  SubsetKey fmax, const ComplianceOptions& opts) {
  std::set<SubsetKey> masks{smax, fmax};
  for (ProcessId p : pids_of(smax & ~fmax)) masks.insert(fmax | pid_bit(p));
  std::mt19937_64 rng(opts.seed);
  const SubsetKey free = smax & ~fmax;
  for (int i = 0; i < opts.sample_size; ++i) {
    masks.insert(fmax | (rng() & free));
  }
  std::set<SubsetKey> present;
  for (SubsetKey m : masks) {
    if (array.has(m)) present.insert(m);
  }
  return present;
}

CheckContext build_context(const World& world, const ScheduleArray& array,
                           const ComplianceOptions& opts, ComplianceReport& report) {
  CheckContext ctx;
  ctx.world = &world;
  ctx.array = &array;
  report.entries_total = static_cast<long>(array.entries.size());

  ScheduleArray scratch = array;  // find_smax fills caches on a copy
  try {
    SmaxInfo info = find_smax(world, scratch);
    ctx.smax = info.smax;
    ctx.fmax = info.fmax;
    ctx.smax_ok = true;
  } catch (const RmeError& e) {
    ctx.smax_ok = false;
    ctx.smax_witness = json{{"invariant", "I2"},
                            {"code", error_code_name(e.code())},
                            {"explanation", e.what()},
                            {"detail", e.witness()}};
    return ctx;
  }

  ComplianceMode mode = opts.mode;
  if (mode == ComplianceMode::Exhaustive &&
      report.entries_total > opts.max_subsets) {
    mode = ComplianceMode::Sampled;
    report.degraded = true;
  }
  report.mode = mode;

  std::set<SubsetKey> to_run;
  if (mode == ComplianceMode::Exhaustive) {
    for (const auto& [mask, sched] : array.entries) to_run.insert(mask);
  } else {
    to_run = sampled_masks(array, ctx.smax, ctx.fmax, opts);
  }

  for (SubsetKey mask : to_run) {
    try {
      ctx.executed.emplace(mask, digest(world, mask, array.at(mask)));
    } catch (const RmeError& e) {
      ctx.execution_error = json{{"subset_mask", mask},
                                 {"code", error_code_name(e.code())},
                                 {"explanation", e.what()},
                                 {"detail", e.witness()}};
      ctx.executed.clear();
      return ctx;
    }
  }
  report.entries_executed = static_cast<long>(ctx.executed.size());
  return ctx;
}

}  // namespace

bool ComplianceReport::all_pass() const {
  if (execution_error) return false;
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const Verdict& v) { return v.kind != VerdictKind::Fail; });
}

json ComplianceReport::to_json() const {
  json inv;
  for (int i = 0; i < 10; ++i) {
    const Verdict& v = verdicts[i];
    json entry;
    entry["verdict"] = v.kind == VerdictKind::Pass     ? "pass"
                       : v.kind == VerdictKind::Fail   ? "fail"
                                                       : "skipped";
    if (!v.witness.is_null()) entry["witness"] = v.witness;
    inv["I" + std::to_string(i + 1)] = std::move(entry);
  }
  json j;
  j["schema_version"] = 1;
  j["round"] = round;
  j["mode"] = mode == ComplianceMode::Exhaustive ? "exhaustive" : "sampled";
  j["degraded"] = degraded;
  j["entries_total"] = entries_total;
  j["entries_executed"] = entries_executed;
  j["invariants"] = std::move(inv);
  j["execution_error"] = execution_error ? *execution_error : json(nullptr);
  j["overall"] = all_pass() ? "pass" : "fail";
  return j;
}

SmaxInfo find_smax(const World& world, ScheduleArray& array) {
  if (array.entries.empty()) {
    throw RmeError(ErrorCode::NoUniqueSmax, "array has no entries");
  }
  SubsetKey top = 0;
  for (const auto& [mask, sched] : array.entries) top |= mask;
  if (!array.has(top)) {
    throw RmeError(ErrorCode::NoUniqueSmax,
                   "union of keys is not itself an entry",
                   json{{"union_mask", top}});
  }
  ExecResult r = world.execute(array.at(top));
  SubsetKey fmask = 0;
  for (ProcessId p : r.config.finished) fmask |= pid_bit(p);
  if ((fmask & ~top) != 0) {
    throw RmeError(ErrorCode::NoUniqueSmax,
                   "finished set of the maximal entry leaves its subset",
                   json{{"smax", top}, {"fmax", fmask}});
  }
  for (const auto& [mask, sched] : array.entries) {
    if ((mask & fmask) != fmask || (mask & ~top) != 0) {
      throw RmeError(ErrorCode::NoUniqueSmax,
                     "entry outside the interval [F, smax]",
                     json{{"subset_mask", mask}, {"smax", top}, {"fmax", fmask}});
    }
  }
  const int gap = mask_size(top & ~fmask);
  if (gap > 62 ||
      array.entries.size() != (SubsetKey{1} << gap)) {
    throw RmeError(ErrorCode::NoUniqueSmax,
                   "interval [F, smax] has missing entries",
                   json{{"smax", top},
                        {"fmax", fmask},
                        {"expected", gap > 62 ? -1.0 : double(SubsetKey{1} << gap)},
                        {"actual", array.entries.size()}});
  }
  array.smax = top;
  array.fmax = fmask;
  array.caches_valid = true;
  return {top, fmask};
}

Verdict check_invariant(const World& world, const ScheduleArray& array, Invariant which) {
  ComplianceOptions opts;
  ComplianceReport scratch;
  CheckContext ctx = build_context(world, array, opts, scratch);
  if (ctx.execution_error) {
    return {VerdictKind::Skipped, json{{"execution_error", *ctx.execution_error}}};
  }
  if (!ctx.smax_ok && which != Invariant::UniqueMaxInterval &&
      which != Invariant::StepsWithinSubset) {
    return skipped("no unique maximal subset; I2 fails first");
  }
  return kCheckers[static_cast<int>(which) - 1](ctx);
}

ComplianceReport check_compliance(const World& world, const ScheduleArray& array,
                                  const ComplianceOptions& opts) {
  ComplianceReport report;
  report.round = array.round;
  report.mode = opts.mode;
  CheckContext ctx = build_context(world, array, opts, report);
  if (ctx.execution_error) {
    report.execution_error = ctx.execution_error;
    for (auto& v : report.verdicts) v = skipped("an entry failed to execute");
    return report;
  }
  for (int i = 0; i < 10; ++i) {
    const auto which = static_cast<Invariant>(i + 1);
    if (!ctx.smax_ok && which != Invariant::UniqueMaxInterval &&
        which != Invariant::StepsWithinSubset) {
      report.verdicts[i] = skipped("no unique maximal subset; I2 fails first");
      continue;
    }
    report.verdicts[i] = kCheckers[i](ctx);
  }
  return report;
}

}  // namespace rme
