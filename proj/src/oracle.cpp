#include "rme/oracle.hpp"

#include <deque>
#include <unordered_map>
#include <unordered_set>

namespace rme {

json SafetyReport::to_json() const {
  json j;
  j["schema_version"] = 1;
  j["states_explored"] = states_explored;
  j["mutual_exclusion"] =
      mutual_exclusion_ok
          ? json("pass")
          : json{{"fail", {{"schedule", schedule_to_json(*mutual_exclusion_witness)}}}};
  j["a1"] = a1_ok ? json("pass")
                  : json{{"fail", {{"schedule", schedule_to_json(*a1_witness)}}}};
  j["stalls"] = json{{"depth_bound_hits", depth_bound_hits},
                     {"no_progress_states", no_progress_states}};
  j["overall"] = all_ok() ? "pass" : "fail";
  return j;
}

namespace {

struct NodeInfo {
  std::string parent;  // canonical key; empty at the root
  Step step;
  int depth = 0;
};

Schedule reconstruct(const std::unordered_map<std::string, NodeInfo>& tree,
                     const std::string& leaf_key, const Step& last) {
  std::vector<Step> steps{last};
  std::string cur = leaf_key;
  while (true) {
    const NodeInfo& info = tree.at(cur);
    if (info.parent.empty()) break;
    steps.push_back(info.step);
    cur = info.parent;
  }
  std::reverse(steps.begin(), steps.end());
  return Schedule{std::move(steps)};
}

bool all_finished(const World& world, const Configuration& c) {
  return static_cast<int>(c.finished.size()) == world.n();
}

// Bounded fair continuation: does anyone complete a super-passage within the
// window when everyone left gets scheduled round-robin?
bool fair_run_makes_progress(const World& world, Configuration c, int window) {
  const std::size_t finished_before = c.finished.size();
  int steps = 0;
  while (steps < window) {
    bool any = false;
    for (ProcessId p = 1; p <= world.n(); ++p) {
      if (c.is_finished(p)) continue;
      any = true;
      world.step(c, Step::normal(p));
      if (c.finished.size() > finished_before) return true;
      if (++steps >= window) break;
    }
    if (!any) return true;  // everyone done
  }
  return false;
}

}  // namespace

SafetyReport explore(const World& world, const ExplorationBounds& bounds) {
  SafetyReport rep;
  Configuration root = world.initial_config();
  const std::string root_key = root.canonical_key();

  std::unordered_map<std::string, NodeInfo> tree;
  tree[root_key] = NodeInfo{"", Step{}, 0};
  std::deque<std::pair<Configuration, std::string>> frontier;
  frontier.emplace_back(std::move(root), root_key);

  std::vector<Configuration> cut_states;

  while (!frontier.empty()) {
    auto [cfg, key] = std::move(frontier.front());
    frontier.pop_front();
    const int depth = tree.at(key).depth;

    if (all_finished(world, cfg)) continue;
    if (depth >= bounds.max_depth) {
      rep.depth_bound_hits += 1;
      if (static_cast<long>(cut_states.size()) < 50) cut_states.push_back(cfg);
      continue;
    }

    for (ProcessId p = 1; p <= world.n(); ++p) {
      if (cfg.is_finished(p)) continue;

      // Normal step.
      {
        const PendingAction a = world.pending(cfg, p);
        if (a.kind == PendingAction::Kind::LeaveCS && !cfg.cs_rmr_flag[p - 1] &&
            rep.a1_ok) {
          rep.a1_ok = false;
          rep.a1_witness = reconstruct(tree, key, Step::normal(p));
        }
        Configuration next = cfg;
        world.step(next, Step::normal(p));
        if (next.in_critical_section().size() > 1 && rep.mutual_exclusion_ok) {
          rep.mutual_exclusion_ok = false;
          rep.mutual_exclusion_witness = reconstruct(tree, key, Step::normal(p));
        }
        std::string nkey = next.canonical_key();
        if (!tree.count(nkey)) {
          tree[nkey] = NodeInfo{key, Step::normal(p), depth + 1};
          frontier.emplace_back(std::move(next), std::move(nkey));
        }
      }

      // Crash step, only for processes inside a super-passage.
      if (cfg.started[p - 1] && cfg.crash_count[p - 1] < bounds.max_crashes_per_process) {
        Configuration next = cfg;
        world.step(next, Step::crashed(p));
        std::string nkey = next.canonical_key();
        if (!tree.count(nkey)) {
          tree[nkey] = NodeInfo{key, Step::crashed(p), depth + 1};
          frontier.emplace_back(std::move(next), std::move(nkey));
        }
      }

      if (static_cast<long>(tree.size()) > bounds.node_cap) {
        throw RmeError(ErrorCode::StateSpaceOverflow,
                       "exploration exceeded the node cap",
                       json{{"node_cap", bounds.node_cap}});
      }
    }
  }
  rep.states_explored = static_cast<long>(tree.size());
  for (const Configuration& c : cut_states) {
    if (!fair_run_makes_progress(world, c, bounds.fairness_window)) {
      rep.no_progress_states += 1;
    }
  }
  return rep;
}

std::map<ProcessId, int> recount_rmr(const ExecutionTrace& trace, MemoryModel model,
                                     const World& world) {
  std::map<ProcessId, int> counts;
  std::map<ProcessId, std::set<RegisterId>> caches;
  for (ProcessId p = 1; p <= world.n(); ++p) counts[p] = 0;
  for (const auto& ev : trace.events) {
    if (ev.kind == Event::Kind::Crash) {
      if (world.crash_clears_cache()) caches[ev.pid].clear();
      continue;
    }
    if (ev.kind != Event::Kind::MemOp) continue;
    if (model == MemoryModel::DSM) {
      auto o = world.owner(ev.reg);
      if (!o || *o != ev.pid) counts[ev.pid] += 1;
      continue;
    }
    if (ev.op.kind == OpKind::Read) {
      if (!caches[ev.pid].count(ev.reg)) counts[ev.pid] += 1;
      caches[ev.pid].insert(ev.reg);
    } else {
      counts[ev.pid] += 1;
      for (auto& [q, cache] : caches) cache.erase(ev.reg);
    }
  }
  return counts;
}

ComplianceReport compliance_by_definition(const World& world, const ScheduleArray& array) {
  if (array.entries.size() > 512) {
    throw RmeError(ErrorCode::Usage, "definition-level check is for tiny arrays only");
  }
  ComplianceReport rep;
  rep.round = array.round;
  rep.mode = ComplianceMode::Exhaustive;
  rep.entries_total = static_cast<long>(array.entries.size());

  auto fail = [&rep](Invariant which, json w) {
    rep.verdicts[static_cast<int>(which) - 1] = Verdict{VerdictKind::Fail, std::move(w)};
  };
  auto skip_all_but = [&rep](const char* why) {
    for (int i = 0; i < 10; ++i) {
      if (rep.verdicts[i].kind == VerdictKind::Pass) {
        rep.verdicts[i] = Verdict{VerdictKind::Skipped, json{{"reason", why}}};
      }
    }
  };

  // Replay everything up front, keeping the raw traces.
  std::map<SubsetKey, ExecResult> runs;
  for (const auto& [mask, sched] : array.entries) {
    try {
      runs.emplace(mask, world.execute(sched));
    } catch (const RmeError& e) {
      rep.execution_error = json{{"subset_mask", mask},
                                 {"code", error_code_name(e.code())},
                                 {"explanation", e.what()}};
      for (auto& v : rep.verdicts) v = Verdict{VerdictKind::Skipped, json{{"reason", "an entry failed to execute"}}};
      return rep;
    }
  }
  rep.entries_executed = static_cast<long>(runs.size());

  // I1, straight from the schedules.
  for (const auto& [mask, sched] : array.entries) {
    for (const Step& s : sched.steps) {
      if (!mask_contains(mask, s.pid)) {
        fail(Invariant::StepsWithinSubset, json{{"subset_mask", mask}, {"pid", s.pid}});
      }
    }
  }

  // I2 by brute force over the whole lattice.
  SubsetKey smax = 0;
  bool smax_ok = false;
  for (const auto& [mask, run] : runs) {
    bool maximal = true;
    for (const auto& [other, o_run] : runs) {
      if ((other & ~mask) != 0) maximal = false;
    }
    if (maximal) {
      smax = mask;
      smax_ok = true;
    }
  }
  SubsetKey fmax = 0;
  if (!smax_ok) {
    fail(Invariant::UniqueMaxInterval, json{{"reason", "no entry contains all others"}});
  } else {
    fmax = mask_of(runs.at(smax).config.finished);
    const SubsetKey all = array.n >= 64 ? ~SubsetKey{0} : (pid_bit(array.n + 1) - 1);
    for (SubsetKey mask = 0; mask <= all; ++mask) {
      const bool should = (mask & fmax) == fmax && (mask & ~smax) == 0;
      if (should != array.has(mask)) {
        fail(Invariant::UniqueMaxInterval,
             json{{"subset_mask", mask}, {"present", array.has(mask)}, {"expected", should}});
        smax_ok = false;
        break;
      }
      if (mask == all) break;  // SubsetKey wraparound guard
    }
  }
  if (!smax_ok) {
    skip_all_but("no unique maximal subset; I2 fails first");
    // I1 keeps whatever verdict it earned above.
    if (rep.verdicts[0].kind == VerdictKind::Skipped) rep.verdicts[0] = Verdict{};
    return rep;
  }

  // I3: pairwise state agreement.
  for (const auto& [m1, r1] : runs) {
    for (const auto& [m2, r2] : runs) {
      for (ProcessId p : pids_of(m1 & m2)) {
        if (r1.config.proc_state[p - 1] != r2.config.proc_state[p - 1] ||
            r1.config.section[p - 1] != r2.config.section[p - 1]) {
          fail(Invariant::StatesAgree, json{{"masks", {m1, m2}}, {"pid", p}});
        }
      }
    }
  }

  // I4: pairwise finished-set agreement.
  for (const auto& [m1, r1] : runs) {
    for (const auto& [m2, r2] : runs) {
      if (r1.config.finished != r2.config.finished) {
        fail(Invariant::FinishedAgree, json{{"masks", {m1, m2}}});
      }
    }
  }

  // I5: literal case split per register.
  const Configuration& top = runs.at(smax).config;
  for (RegisterId r = 0; r < world.register_count(); ++r) {
    const auto w = top.last_accessor[r];
    std::optional<Value> y;
    for (const auto& [mask, run] : runs) {
      const Value& val = run.config.reg_values[r];
      if (w && mask_contains(mask, *w)) {
        if (val != top.reg_values[r]) {
          fail(Invariant::ValuesAgree, json{{"subset_mask", mask}, {"reg", r}});
        }
      } else if (!y) {
        y = val;
      } else if (*y != val) {
        fail(Invariant::ValuesAgree, json{{"subset_mask", mask}, {"reg", r}});
      }
    }
  }

  // I6 and I7 from the raw traces.
  for (const auto& [mask, run] : runs) {
    std::map<ProcessId, int> crashes;
    for (const auto& ev : run.trace.events) {
      if (ev.kind == Event::Kind::Crash) crashes[ev.pid] += 1;
      if (ev.kind == Event::Kind::EnterCS && !run.config.is_finished(ev.pid)) {
        fail(Invariant::NoCriticalSection, json{{"subset_mask", mask}, {"pid", ev.pid}});
      }
    }
    for (const auto& [pid, c] : crashes) {
      if (c > 1 || !run.config.is_finished(pid)) {
        fail(Invariant::CrashBudget, json{{"subset_mask", mask}, {"pid", pid}, {"crashes", c}});
      }
    }
  }

  // I8 (DSM) from the raw traces.
  if (world.model() == MemoryModel::DSM) {
    for (const auto& [mask, run] : runs) {
      for (const auto& ev : run.trace.events) {
        if (ev.kind != Event::Kind::MemOp) continue;
        auto o = world.owner(ev.reg);
        if (o && mask_contains(smax & ~fmax, *o) && ev.pid != *o) {
          fail(Invariant::DsmOwnerOnly, json{{"subset_mask", mask}, {"reg", ev.reg}});
        }
      }
    }
  }

  // I9 (CC): pairwise cache agreement for active processes.
  if (world.model() == MemoryModel::CC) {
    for (ProcessId p : pids_of(smax & ~fmax)) {
      for (const auto& [m1, r1] : runs) {
        if (!mask_contains(m1, p)) continue;
        for (const auto& [m2, r2] : runs) {
          if (!mask_contains(m2, p)) continue;
          if (r1.config.valid_cache[p - 1] != r2.config.valid_cache[p - 1]) {
            fail(Invariant::CacheSetsAgree, json{{"masks", {m1, m2}}, {"pid", p}});
          }
        }
      }
    }
  }

  // I10 with independently recounted RMRs.
  for (const auto& [mask, run] : runs) {
    std::map<ProcessId, int> counts = recount_rmr(run.trace, world.model(), world);
    for (ProcessId p : pids_of(mask)) {
      if (run.config.is_finished(p)) continue;
      if (counts[p] < array.round) {
        fail(Invariant::RmrFloor,
             json{{"subset_mask", mask}, {"pid", p}, {"rmrs", counts[p]}});
      }
    }
  }

  return rep;
}

}  // namespace rme
