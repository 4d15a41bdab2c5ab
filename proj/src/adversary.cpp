#include "rme/adversary.hpp"

#include <algorithm>
#include <sstream>

namespace rme {

namespace {

// Caches may be absent on arrays built by hand; recompute on a scratch copy.
SmaxInfo smax_info(const World& world, const ScheduleArray& array) {
  if (array.caches_valid) return {array.smax, array.fmax};
  ScheduleArray scratch = array;
  return find_smax(world, scratch);
}

std::map<ProcessId, int> segment_rmrs(const ExecutionTrace& t) {
  std::map<ProcessId, int> out;
  for (const auto& ev : t.events) {
    if (ev.kind == Event::Kind::MemOp && ev.rmr) out[ev.pid] += 1;
  }
  return out;
}

bool has_leave_cs(const ExecutionTrace& t) {
  for (const auto& ev : t.events) {
    if (ev.kind == Event::Kind::LeaveCS) return true;
  }
  return false;
}

json schedule_witness(SubsetKey mask, const Schedule& sched) {
  return json{{"subset_mask", mask}, {"schedule", schedule_to_json(sched)}};
}

}  // namespace

long AdversaryConfig::effective_min_active() const {
  if (min_active >= 0) return min_active;
  const long k3 = static_cast<long>(k) * k * k;
  return std::max(1L, k3);
}

int AdversaryConfig::effective_a2_budget() const {
  return a2_budget > 0 ? a2_budget : log2_ceil(n);
}

Quotas derive_quotas(const AdversaryConfig& cfg) {
  Quotas q;
  // Group machinery needs two distinct processes per group, so every shrink
  // quota floors at 2; the beta pick additionally needs a third member.
  q.q1 = cfg.q1 > 0 ? cfg.q1 : std::max(2, cfg.k);
  q.q3 = cfg.q3 > 0 ? cfg.q3 : std::max(2, cfg.k / 4);
  q.q5 = cfg.q5 > 0 ? cfg.q5 : std::max(2, cfg.k / 32);
  q.qbeta = cfg.qbeta > 0 ? cfg.qbeta : std::max(3, (cfg.k + 159) / 160);
  return q;
}

const PoisedProcess& ContentionSnapshot::poised_of(ProcessId p) const {
  for (const auto& pp : poised) {
    if (pp.pid == p) return pp;
  }
  throw RmeError(ErrorCode::ProgramFault, "no poised record for process " + std::to_string(p));
}

const char* edge_tag_name(EdgeTag t) {
  switch (t) {
    case EdgeTag::SameRegister: return "same_register";
    case EdgeTag::OwnedBy: return "owned_by";
    case EdgeTag::PreviouslyAccessed: return "previously_accessed";
  }
  return "?";
}

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::Low: return "low";
    case Branch::High: return "high";
    case Branch::HighFallbackLow: return "high_fallback_low";
    case Branch::Terminated: return "terminated";
  }
  return "?";
}

DecisionResult decision_phase(const ContentionSnapshot& snap) {
  DecisionResult out;
  for (const auto& pp : snap.poised) out.by_register[pp.reg].insert(pp.pid);
  for (const auto& [reg, pids] : out.by_register) {
    if (static_cast<int>(pids.size()) >= snap.k) {
      out.high.insert(pids.begin(), pids.end());
    }
  }
  for (const auto& pp : snap.poised) {
    if (!out.high.count(pp.pid)) out.low.insert(pp.pid);
  }
  out.low_branch = out.low.size() >= out.high.size();
  return out;
}

ConflictGraph build_conflict_graph(const ContentionSnapshot& snap,
                                   const std::set<ProcessId>& low) {
  ConflictGraph g;
  g.vertices.assign(low.begin(), low.end());
  auto prev_accessed = [&snap](RegisterId reg, ProcessId by) {
    auto it = snap.accessors.find(reg);
    return it != snap.accessors.end() && it->second.count(by) > 0;
  };
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < g.vertices.size(); ++j) {
      const ProcessId a = g.vertices[i];
      const ProcessId b = g.vertices[j];
      const RegisterId ra = snap.poised_of(a).reg;
      const RegisterId rb = snap.poised_of(b).reg;
      std::optional<EdgeTag> tag;
      if (ra == rb) {
        tag = EdgeTag::SameRegister;
      } else {
        auto oa = snap.owner.find(ra);
        auto ob = snap.owner.find(rb);
        if ((oa != snap.owner.end() && oa->second == b) ||
            (ob != snap.owner.end() && ob->second == a)) {
          tag = EdgeTag::OwnedBy;
        } else if (prev_accessed(ra, b) || prev_accessed(rb, a)) {
          tag = EdgeTag::PreviouslyAccessed;
        }
      }
      if (tag) g.edges.push_back(ConflictEdge{a, b, *tag});
    }
  }
  return g;
}

std::set<ProcessId> greedy_independent_set(const ConflictGraph& g) {
  std::map<ProcessId, std::set<ProcessId>> adj;
  for (ProcessId v : g.vertices) adj[v];
  for (const auto& e : g.edges) {
    adj[e.a].insert(e.b);
    adj[e.b].insert(e.a);
  }
  std::set<ProcessId> out;
  while (!adj.empty()) {
    ProcessId best = 0;
    std::size_t best_deg = SIZE_MAX;
    for (const auto& [v, nb] : adj) {
      if (nb.size() < best_deg) {
        best = v;
        best_deg = nb.size();
      }
    }
    out.insert(best);
    std::set<ProcessId> closed = adj[best];
    closed.insert(best);
    for (ProcessId v : closed) adj.erase(v);
    for (auto& [v, nb] : adj) {
      for (ProcessId c : closed) nb.erase(c);
    }
  }
  return out;
}

FilterChain high_filter_chain(const ContentionSnapshot& snap,
                              const std::set<ProcessId>& high, const Quotas& q,
                              TieBreaker& tb) {
  FilterChain chain;

  // Stage 1: per-register groups of exactly q1, leftovers dropped.
  std::map<RegisterId, std::vector<ProcessId>> by_reg;
  for (const auto& pp : snap.poised) {
    if (high.count(pp.pid)) by_reg[pp.reg].push_back(pp.pid);
  }
  std::vector<Group> groups;
  for (auto& [reg, members] : by_reg) {
    std::sort(members.begin(), members.end());
    std::vector<ProcessId> pool = tb.arrange(members);
    for (std::size_t at = 0; at + q.q1 <= pool.size(); at += q.q1) {
      Group grp;
      grp.target = reg;
      grp.members.assign(pool.begin() + at, pool.begin() + at + q.q1);
      std::sort(grp.members.begin(), grp.members.end());
      groups.push_back(std::move(grp));
    }
  }
  for (const auto& grp : groups) chain.h1.insert(grp.members.begin(), grp.members.end());

  // Stage 2: drop processes that own, or last touched, a targeted register.
  std::set<RegisterId> targeted;
  for (const auto& pp : snap.poised) {
    if (chain.h1.count(pp.pid)) targeted.insert(pp.reg);
  }
  for (ProcessId p : chain.h1) {
    bool dropped = false;
    for (RegisterId r : targeted) {
      auto o = snap.owner.find(r);
      if (o != snap.owner.end() && o->second == p) dropped = true;
      auto l = snap.last.find(r);
      if (l != snap.last.end() && l->second && *l->second == p) dropped = true;
    }
    if (!dropped) chain.h2.insert(p);
  }
  auto filter_members = [](const std::vector<Group>& in, const std::set<ProcessId>& keep) {
    std::vector<Group> out;
    for (const auto& grp : in) {
      Group g2;
      g2.target = grp.target;
      for (ProcessId p : grp.members) {
        if (keep.count(p)) g2.members.push_back(p);
      }
      out.push_back(std::move(g2));
    }
    return out;
  };
  auto shrink = [&tb](std::vector<Group> in, int quota) {
    std::vector<Group> out;
    for (auto& grp : in) {
      if (static_cast<int>(grp.members.size()) < quota) continue;
      std::vector<ProcessId> pool = tb.arrange(grp.members);
      grp.members.assign(pool.begin(), pool.begin() + quota);
      std::sort(grp.members.begin(), grp.members.end());
      out.push_back(std::move(grp));
    }
    return out;
  };

  std::vector<Group> g2 = filter_members(groups, chain.h2);
  std::vector<Group> g3 = shrink(std::move(g2), q.q3);
  for (const auto& grp : g3) chain.h3.insert(grp.members.begin(), grp.members.end());

  // Stage 4: keep only the plurality operation type (computed over the whole
  // high set; ties resolve in kind order read < fas < fai < cas).
  std::array<long, 4> counts{0, 0, 0, 0};
  for (const auto& pp : snap.poised) {
    if (high.count(pp.pid)) counts[static_cast<int>(pp.kind)] += 1;
  }
  int best = 0;
  for (int i = 1; i < 4; ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  chain.plurality_op = static_cast<OpKind>(best);
  std::set<ProcessId> typed;
  for (const auto& pp : snap.poised) {
    if (chain.h3.count(pp.pid) && pp.kind == chain.plurality_op) typed.insert(pp.pid);
  }
  chain.h4 = typed;

  std::vector<Group> g4 = filter_members(g3, chain.h4);
  std::vector<Group> g5 = shrink(std::move(g4), q.q5);
  for (const auto& grp : g5) chain.h5.insert(grp.members.begin(), grp.members.end());
  chain.groups = std::move(g5);

  if (chain.groups.empty()) {
    throw RmeError(ErrorCode::HighDegenerate, "no group survived the filter chain",
                   json{{"high_size", high.size()},
                        {"h1", chain.h1.size()},
                        {"h2", chain.h2.size()},
                        {"h3", chain.h3.size()},
                        {"h4", chain.h4.size()}});
  }
  return chain;
}

namespace {

Operation poised_operation(const ContentionSnapshot& snap, ProcessId p) {
  const PoisedProcess& pp = snap.poised_of(p);
  switch (pp.kind) {
    case OpKind::Read: return Operation::read();
    case OpKind::Fai: return Operation::fai();
    case OpKind::Fas: return Operation::fas(pp.cas_new);  // fas payload stored in cas_new
    case OpKind::Cas: return Operation::cas(pp.cas_expected, pp.cas_new);
  }
  return Operation::read();
}

}  // namespace

AlphaSelection select_alphas(const FilterChain& chain, const ContentionSnapshot& snap,
                             std::map<RegisterId, Value> values, TieBreaker& tb) {
  AlphaSelection sel;
  for (const auto& grp : chain.groups) {
    if (grp.members.size() < 2) {
      throw RmeError(ErrorCode::HighDegenerate, "group with fewer than two members");
    }
    const Value v = values.at(grp.target);
    ProcessId a1 = 0;
    if (chain.plurality_op == OpKind::Cas) {
      std::vector<ProcessId> candidates;
      for (ProcessId m : grp.members) {
        const PoisedProcess& pp = snap.poised_of(m);
        if (pp.cas_expected == v && pp.cas_new != v) candidates.push_back(m);
      }
      a1 = candidates.empty() ? tb.pick(grp.members) : tb.pick(candidates);
    } else {
      a1 = tb.pick(grp.members);
    }
    std::vector<ProcessId> rest;
    for (ProcessId m : grp.members) {
      if (m != a1) rest.push_back(m);
    }
    const ProcessId a2 = tb.pick(rest);

    sel.alpha1.push_back(a1);
    sel.alpha2.push_back(a2);
    sel.target_value.push_back(v);
    sel.alpha_set.insert(a1);
    sel.alpha_set.insert(a2);
    sel.alpha_schedule.push(Step::normal(a1));
    sel.alpha_schedule.push(Step::normal(a2));

    Value cur = values.at(grp.target);
    cur = apply_op(cur, poised_operation(snap, a1)).new_value;
    cur = apply_op(cur, poised_operation(snap, a2)).new_value;
    values[grp.target] = cur;
  }
  return sel;
}

BetaSelection compute_disturbed_and_betas(
    const FilterChain& chain, const AlphaSelection& alphas,
    const std::set<RegisterId>& completion_regs,
    const std::map<RegisterId, std::optional<ProcessId>>& last_at_group_row,
    const ContentionSnapshot& snap, const Quotas& q, TieBreaker& tb) {
  BetaSelection out;
  for (ProcessId p : chain.h5) {
    if (alphas.alpha_set.count(p)) continue;
    bool hit = false;
    for (RegisterId r : completion_regs) {
      auto o = snap.owner.find(r);
      if (o != snap.owner.end() && o->second == p) hit = true;
      auto l = last_at_group_row.find(r);
      if (l != last_at_group_row.end() && l->second && *l->second == p) hit = true;
    }
    if (hit) out.disturbed.insert(p);
  }
  for (ProcessId p : chain.h5) {
    if (!out.disturbed.count(p)) out.h6.insert(p);
  }
  out.beta_set = alphas.alpha_set;
  for (int j = 0; j < chain.group_count(); ++j) {
    std::vector<ProcessId> surv;
    for (ProcessId p : chain.groups[j].members) {
      if (out.h6.count(p)) surv.push_back(p);
    }
    out.surviving_members.push_back(surv);
    std::vector<ProcessId> candidates;
    for (ProcessId p : surv) {
      if (p != alphas.alpha1[j] && p != alphas.alpha2[j]) candidates.push_back(p);
    }
    if (static_cast<int>(surv.size()) >= q.qbeta && !candidates.empty()) {
      const ProcessId b = tb.pick(candidates);
      out.beta1.emplace_back(b);
      out.beta_set.insert(b);
    } else {
      out.beta1.emplace_back(std::nullopt);
    }
  }
  return out;
}

Schedule beta_fragment(int j, const FilterChain& chain, const AlphaSelection& alphas,
                       const BetaSelection& betas, const ContentionSnapshot& snap) {
  Schedule s;
  const ProcessId a1 = alphas.alpha1[j];
  const ProcessId a2 = alphas.alpha2[j];
  if (!betas.beta1[j]) {
    s.push(Step::normal(a1));
    s.push(Step::normal(a2));
    return s;
  }
  const ProcessId b1 = *betas.beta1[j];
  if (chain.plurality_op == OpKind::Fai) {
    s.push(Step::normal(b1));
    s.push(Step::normal(a2));
    return s;
  }
  if (chain.plurality_op == OpKind::Cas &&
      snap.poised_of(b1).cas_expected != alphas.target_value[j]) {
    s.push(Step::normal(b1));
    s.push(Step::normal(a1));
    s.push(Step::normal(a2));
    return s;
  }
  s.push(Step::normal(a1));
  s.push(Step::normal(b1));
  s.push(Step::normal(a2));
  return s;
}

// ---------------------------------------------------------------------------

json BoundCheck::to_json() const {
  return json{{"applicable", applicable},
              {"holds", holds},
              {"lhs", lhs},
              {"rhs", rhs},
              {"expr", expr}};
}

json RoundReport::to_json() const {
  json j;
  j["round"] = round;
  j["branch"] = branch_name(branch);
  if (!termination_reason.empty()) j["termination_reason"] = termination_reason;
  j["sizes"] = json{{"high", size_high},       {"low", size_low},
                    {"h1", size_h1},           {"h2", size_h2},
                    {"h3", size_h3},           {"h4", size_h4},
                    {"h5", size_h5},           {"h6", size_h6},
                    {"independent_set", size_iset},
                    {"alpha", size_alpha},     {"beta", size_beta},
                    {"disturbed", size_disturbed},
                    {"conflict_edges", conflict_edges}};
  j["n_active"] = n_active;
  j["n_active_prev"] = n_active_prev;
  j["shrink_ratio"] =
      n_active_prev > 0 ? static_cast<double>(n_active) / static_cast<double>(n_active_prev)
                        : 0.0;
  j["bounds"] = json{{"edge_bound", edge_bound.to_json()},
                     {"independent_set", iset_bound.to_json()},
                     {"disturbed", dsize_bound.to_json()},
                     {"beta_growth", beta_bound.to_json()},
                     {"greedy_shrink", shrink_bound.to_json()}};
  j["a2_held"] = a2_held;
  j["assumptions"] = json{{"a1_ok", assumptions.a1_ok},
                          {"a2_max", assumptions.a2_max},
                          {"a2_budget", assumptions.a2_budget},
                          {"a2_ok", assumptions.a2_ok},
                          {"a3_ok", assumptions.a3_ok}};
  j["compliance"] = compliance ? compliance->to_json() : json(nullptr);
  return j;
}

json FinalWitness::to_json() const {
  json counts;
  for (const auto& [pid, c] : rmr_counts) counts[std::to_string(pid)] = c;
  return json{{"rounds_completed", rounds_completed},
              {"active_pids", active_pids},
              {"rmr_counts", counts},
              {"rmr_floor_ok", rmr_floor_ok},
              {"zero_crash_ok", zero_crash_ok},
              {"never_cs_ok", never_cs_ok}};
}

bool RunResult::all_compliance_pass() const {
  if (base_compliance && !base_compliance->all_pass()) return false;
  for (const auto& r : rounds) {
    if (r.compliance && !r.compliance->all_pass()) return false;
  }
  return true;
}

int RunResult::rounds_completed() const {
  int done = 0;
  for (const auto& r : rounds) {
    if (r.branch != Branch::Terminated) done = std::max(done, r.round);
  }
  return done;
}

json RunResult::to_json(const AdversaryConfig& cfg) const {
  json rounds_json = json::array();
  for (const auto& r : rounds) rounds_json.push_back(r.to_json());
  json j;
  j["schema_version"] = 1;
  j["config"] = json{{"n", cfg.n},
                     {"k", cfg.k},
                     {"model", memory_model_name(cfg.model)},
                     {"algorithm", cfg.algorithm},
                     {"max_rounds", cfg.max_rounds},
                     {"min_active", cfg.effective_min_active()},
                     {"step_budget", cfg.step_budget},
                     {"tie_break", cfg.seeded_random ? "seeded-random" : "by-smallest-id"},
                     {"seed", cfg.seed},
                     {"verify", cfg.verify == AdversaryConfig::Verify::EachRound ? "each-round"
                                : cfg.verify == AdversaryConfig::Verify::FinalOnly ? "final"
                                                                                   : "off"},
                     {"verify_mode", cfg.verify_mode == ComplianceMode::Exhaustive
                                         ? "exhaustive"
                                         : "sampled"},
                     {"sample_size", cfg.sample_size},
                     {"max_subsets", cfg.max_subsets},
                     {"a2_budget", cfg.effective_a2_budget()},
                     {"crash_clears_cache", cfg.crash_clears_cache}};
  j["base_compliance"] = base_compliance ? base_compliance->to_json() : json(nullptr);
  j["rounds"] = std::move(rounds_json);
  j["final_witness"] = witness.to_json();
  j["rounds_completed"] = rounds_completed();
  j["error"] = error.is_null() ? json(nullptr) : error;
  return j;
}

std::string RunResult::to_csv() const {
  std::ostringstream os;
  os << "i,n_i,branch,ratio\n";
  for (const auto& r : rounds) {
    double ratio = r.n_active_prev > 0
                       ? static_cast<double>(r.n_active) / static_cast<double>(r.n_active_prev)
                       : 0.0;
    os << r.round << ',' << r.n_active << ',' << branch_name(r.branch) << ',' << ratio << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

Adversary::Adversary(const AdversaryConfig& cfg)
    : cfg_(cfg),
      world_(cfg.model, make_algorithm(cfg.algorithm, cfg.n), cfg.crash_clears_cache),
      quotas_(derive_quotas(cfg)) {
  if (cfg.n < 1 || cfg.n > 20) {
    throw RmeError(ErrorCode::Usage,
                   "the construction materializes up to 2^n entries; need 1 <= n <= 20");
  }
  if (cfg.k < 1) throw RmeError(ErrorCode::Usage, "k must be positive");
}

ScheduleArray Adversary::base_row() const {
  ScheduleArray a;
  a.n = cfg_.n;
  a.round = 0;
  const SubsetKey full = (cfg_.n == 64) ? ~SubsetKey{0} : (pid_bit(cfg_.n + 1) - 1);
  for (SubsetKey mask : interval_subsets(0, full)) a.entries[mask] = Schedule{};
  a.smax = full;
  a.fmax = 0;
  a.caches_valid = true;
  return a;
}

bool Adversary::should_terminate(const ScheduleArray&, bool prev_compliant,
                                 long n_prev, std::string* reason) const {
  if (cfg_.verify == AdversaryConfig::Verify::EachRound && !prev_compliant) {
    if (reason) *reason = "previous row failed compliance verification";
    return true;
  }
  if (n_prev < cfg_.effective_min_active()) {
    if (reason) {
      *reason = "active processes (" + std::to_string(n_prev) + ") below threshold (" +
                std::to_string(cfg_.effective_min_active()) + ")";
    }
    return true;
  }
  return false;
}

Schedule Adversary::compute_sigma_p(const ScheduleArray& prev, ProcessId p) const {
  const SmaxInfo info = smax_info(world_, prev);
  const SubsetKey sp = info.fmax | pid_bit(p);
  if (!prev.has(sp)) {
    throw RmeError(ErrorCode::NoUniqueSmax, "missing minimal entry for process " +
                                                std::to_string(p));
  }
  ExecResult at = world_.execute(prev.at(sp));
  Configuration cfg = std::move(at.config);
  Schedule sigma;
  long steps = 0;
  while (true) {
    PendingAction a = world_.pending(cfg, p);
    if (a.kind == PendingAction::Kind::MemOp && world_.rmr_of(cfg, p, a.op, a.reg)) {
      break;  // maximal: the very next step of p would cost an RMR
    }
    if (++steps > cfg_.step_budget) {
      throw RmeError(ErrorCode::SetupBudgetExceeded,
                     "quiet run of process " + std::to_string(p) +
                         " exceeded the step budget; the algorithm spins without RMRs",
                     json{{"pid", p}, {"budget", cfg_.step_budget}});
    }
    world_.step(cfg, Step::normal(p));
    sigma.push(Step::normal(p));
    if (cfg.is_finished(p)) {
      throw RmeError(ErrorCode::SetupLemmaViolation,
                     "process " + std::to_string(p) +
                         " completed its super-passage without incurring an RMR",
                     json{{"pid", p}, {"check", "quiet_run_no_completion"}});
    }
  }
  return sigma;
}

ScheduleArray Adversary::setup_phase(const ScheduleArray& prev) const {
  const SmaxInfo info = smax_info(world_, prev);
  const std::vector<ProcessId> actives = pids_of(info.smax & ~info.fmax);

  struct QuietRun {
    Schedule sigma;
    LocalState end_state;
    Section end_section = Section::Remainder;
    std::map<RegisterId, Value> owned_values;  // DSM agreement check
  };
  std::map<ProcessId, QuietRun> runs;
  for (ProcessId p : actives) {
    QuietRun qr;
    qr.sigma = compute_sigma_p(prev, p);
    ExecResult at = world_.execute(prev.at(info.fmax | pid_bit(p)));
    ExecResult done = world_.execute(at.config, qr.sigma);
    qr.end_state = done.config.proc_state[p - 1];
    qr.end_section = done.config.section[p - 1];
    if (world_.model() == MemoryModel::DSM) {
      for (RegisterId r = 0; r < world_.register_count(); ++r) {
        auto o = world_.owner(r);
        if (o && *o == p) qr.owned_values[r] = done.config.reg_values[r];
      }
    }
    runs.emplace(p, std::move(qr));
  }

  ScheduleArray out;
  out.n = prev.n;
  out.round = prev.round;
  for (const auto& [mask, sched] : prev.entries) {
    Schedule segment;
    for (ProcessId p : pids_of(mask & ~info.fmax)) segment.append(runs.at(p).sigma);
    out.entries[mask] = sched + segment;
  }
  out.smax = info.smax;
  out.fmax = info.fmax;
  out.caches_valid = true;

  auto violation = [](const char* check, json detail) {
    detail["check"] = check;
    return RmeError(ErrorCode::SetupLemmaViolation,
                    std::string("quiet-segment property failed: ") + check,
                    std::move(detail));
  };

  for (const auto& [mask, sched] : prev.entries) {
    Schedule segment;
    for (ProcessId p : pids_of(mask & ~info.fmax)) segment.append(runs.at(p).sigma);
    ExecResult pre = world_.execute(sched);
    ExecResult post = world_.execute(pre.config, segment);

    for (const auto& ev : post.trace.events) {
      if (ev.kind != Event::Kind::MemOp) continue;
      if (ev.rmr) {
        throw violation("no_rmr_in_quiet_segment",
                        json{{"subset_mask", mask}, {"pid", ev.pid}, {"reg", ev.reg}});
      }
      if (world_.model() == MemoryModel::DSM) {
        auto o = world_.owner(ev.reg);
        if (!o || *o != ev.pid) {
          throw violation("dsm_owner_only",
                          json{{"subset_mask", mask}, {"pid", ev.pid}, {"reg", ev.reg}});
        }
      } else if (ev.op.kind != OpKind::Read) {
        throw violation("cc_read_only",
                        json{{"subset_mask", mask}, {"pid", ev.pid}, {"reg", ev.reg}});
      }
    }
    if (has_leave_cs(post.trace)) {
      throw violation("no_cs_exit", json{{"subset_mask", mask}});
    }
    if (post.config.finished != pre.config.finished) {
      throw violation("finished_unchanged", json{{"subset_mask", mask}});
    }
    for (ProcessId p : pids_of(mask & ~info.fmax)) {
      const QuietRun& qr = runs.at(p);
      if (post.config.proc_state[p - 1] != qr.end_state ||
          post.config.section[p - 1] != qr.end_section) {
        throw violation("states_match_solo_run", json{{"subset_mask", mask}, {"pid", p}});
      }
      PendingAction next = world_.pending(post.config, p);
      if (next.kind != PendingAction::Kind::MemOp ||
          !world_.rmr_of(post.config, p, next.op, next.reg)) {
        throw violation("poised_on_rmr", json{{"subset_mask", mask}, {"pid", p}});
      }
      for (const auto& [r, v] : qr.owned_values) {
        if (post.config.reg_values[r] != v) {
          throw violation("dsm_owned_values_match_solo_run",
                          json{{"subset_mask", mask}, {"pid", p}, {"reg", r}});
        }
      }
    }
  }
  return out;
}

ScheduleArray Adversary::cs_eviction(const ScheduleArray& array) const {
  const SmaxInfo info = smax_info(world_, array);
  ExecResult top = world_.execute(array.at(info.smax));
  std::vector<ProcessId> occupants;
  for (ProcessId p : top.config.in_critical_section()) {
    if (!top.config.is_finished(p)) occupants.push_back(p);
  }
  if (occupants.empty()) {
    ScheduleArray out = array;
    out.smax = info.smax;
    out.fmax = info.fmax;
    out.caches_valid = true;
    return out;
  }
  if (occupants.size() > 1) {
    throw RmeError(ErrorCode::MutualExclusionViolation,
                   "two processes hold the critical section",
                   json{{"pids", occupants},
                        {"witness", schedule_witness(info.smax, array.at(info.smax))}});
  }
  const ProcessId p = occupants.front();
  ScheduleArray out;
  out.n = array.n;
  out.round = array.round;
  for (const auto& [mask, sched] : array.entries) {
    if (!mask_contains(mask, p)) out.entries[mask] = sched;
  }
  out.smax = info.smax & ~pid_bit(p);
  out.fmax = info.fmax;
  out.caches_valid = true;
  return out;
}

ContentionSnapshot Adversary::snapshot(const ScheduleArray& array) const {
  const SmaxInfo info = smax_info(world_, array);
  ExecResult top = world_.execute(array.at(info.smax));
  ContentionSnapshot snap;
  snap.n = cfg_.n;
  snap.k = cfg_.k;
  for (ProcessId p : pids_of(info.smax & ~info.fmax)) {
    PendingAction a = world_.pending(top.config, p);
    if (a.kind != PendingAction::Kind::MemOp) {
      throw RmeError(ErrorCode::SetupLemmaViolation,
                     "active process not poised on a memory operation",
                     json{{"pid", p}});
    }
    PoisedProcess pp;
    pp.pid = p;
    pp.reg = a.reg;
    pp.kind = a.op.kind;
    if (a.op.kind == OpKind::Cas) {
      pp.cas_expected = a.op.arg0;
      pp.cas_new = a.op.arg1;
    } else if (a.op.kind == OpKind::Fas) {
      pp.cas_new = a.op.arg0;
    }
    snap.poised.push_back(pp);
  }
  for (RegisterId r = 0; r < world_.register_count(); ++r) {
    auto o = world_.owner(r);
    if (o) snap.owner[r] = *o;
    snap.last[r] = top.config.last_accessor[r];
    snap.values[r] = top.config.reg_values[r];
  }
  for (const auto& ev : top.trace.events) {
    if (ev.kind == Event::Kind::MemOp) snap.accessors[ev.reg].insert(ev.pid);
  }
  return snap;
}

ScheduleArray Adversary::low_phase(const ScheduleArray& array,
                                   const std::set<ProcessId>& iset) const {
  const SmaxInfo info = smax_info(world_, array);
  const SubsetKey iset_mask = mask_of(iset);
  const SubsetKey s_i = info.fmax | iset_mask;

  ScheduleArray restricted;
  restricted.n = array.n;
  restricted.round = array.round;
  for (const auto& [mask, sched] : array.entries) {
    if ((mask & ~s_i) == 0) restricted.entries[mask] = sched;
  }

  auto violation = [](const char* check, json detail) {
    detail["check"] = check;
    return RmeError(ErrorCode::LowLemmaViolation,
                    std::string("low-contention property failed: ") + check,
                    std::move(detail));
  };

  struct EntryState {
    Configuration end;                      // after the appended steps
    std::map<RegisterId, Value> pre_values;  // before the appended steps
    std::map<RegisterId, ProcessId> touched;  // segment accesses (single toucher each)
    std::map<ProcessId, int> rmrs;
  };
  std::map<SubsetKey, EntryState> states;

  ScheduleArray out;
  out.n = array.n;
  out.round = array.round + 1;

  for (const auto& [mask, sched] : restricted.entries) {
    Schedule segment;
    for (ProcessId p : pids_of(mask & iset_mask)) segment.push(Step::normal(p));

    ExecResult pre = world_.execute(sched);
    std::map<RegisterId, std::set<ProcessId>> prefix_accessors;
    for (const auto& ev : pre.trace.events) {
      if (ev.kind == Event::Kind::MemOp) prefix_accessors[ev.reg].insert(ev.pid);
    }

    ExecTrail trail = world_.execute_trail(pre.config, segment);
    EntryState st;
    for (RegisterId r = 0; r < world_.register_count(); ++r) {
      st.pre_values[r] = pre.config.reg_values[r];
    }

    std::map<RegisterId, std::set<ProcessId>> seg_accessors;
    for (std::size_t idx = 0; idx < trail.trace.events.size(); ++idx) {
      const Event& ev = trail.trace.events[idx];
      if (ev.kind == Event::Kind::LeaveCS) {
        throw violation("no_cs_exit", json{{"subset_mask", mask}, {"pid", ev.pid}});
      }
      if (ev.kind != Event::Kind::MemOp) continue;
      seg_accessors[ev.reg].insert(ev.pid);
      st.touched[ev.reg] = ev.pid;
      if (ev.rmr) st.rmrs[ev.pid] += 1;

      auto o = world_.owner(ev.reg);
      if (o && iset.count(*o) && *o != ev.pid) {
        throw violation("owner_not_in_set",
                        json{{"subset_mask", mask}, {"pid", ev.pid}, {"reg", ev.reg}});
      }
      for (ProcessId q : prefix_accessors[ev.reg]) {
        if (q != ev.pid && iset.count(q)) {
          throw violation("no_prior_access_by_set",
                          json{{"subset_mask", mask}, {"pid", ev.pid}, {"reg", ev.reg},
                               {"prior", q}});
        }
      }
      if (world_.model() == MemoryModel::CC && ev.op.kind != OpKind::Read) {
        const Configuration& before = trail.before[idx];
        for (ProcessId q : iset) {
          if (q != ev.pid && before.valid_cache[q - 1].count(ev.reg)) {
            throw violation("no_cache_invalidation_within_set",
                            json{{"subset_mask", mask}, {"pid", ev.pid}, {"reg", ev.reg},
                                 {"victim", q}});
          }
        }
      }
    }
    for (const auto& [reg, pids] : seg_accessors) {
      if (pids.size() > 1) {
        throw violation("single_access_per_register",
                        json{{"subset_mask", mask}, {"reg", reg},
                             {"pids", std::vector<ProcessId>(pids.begin(), pids.end())}});
      }
    }
    for (ProcessId p : pids_of(mask & iset_mask)) {
      if (st.rmrs[p] != 1) {
        throw violation("exactly_one_rmr",
                        json{{"subset_mask", mask}, {"pid", p}, {"rmrs", st.rmrs[p]}});
      }
    }
    if (trail.final.finished != pre.config.finished) {
      throw violation("finished_unchanged", json{{"subset_mask", mask}});
    }
    st.end = trail.final;
    states.emplace(mask, std::move(st));
    out.entries[mask] = sched + segment;
  }

  // Cross-entry agreement against the maximal restricted entry.
  const EntryState& top = states.at(s_i);
  for (const auto& [mask, st] : states) {
    for (const auto& [r, toucher] : st.touched) {
      if (top.end.reg_values[r] != st.end.reg_values[r]) {
        throw violation("touched_values_agree",
                        json{{"subset_mask", mask}, {"reg", r}, {"pid", toucher}});
      }
    }
    for (ProcessId p : pids_of(mask)) {
      if (st.end.proc_state[p - 1] != top.end.proc_state[p - 1] ||
          st.end.section[p - 1] != top.end.section[p - 1]) {
        throw violation("states_agree", json{{"subset_mask", mask}, {"pid", p}});
      }
    }
  }
  // Pre-append value agreement: for each register touched in the maximal
  // entry's segment, entries containing the toucher match the maximal entry
  // and the rest share one fallback value.
  for (const auto& [r, toucher] : top.touched) {
    std::optional<Value> fallback;
    for (const auto& [mask, st] : states) {
      if (mask_contains(mask, toucher)) {
        if (st.pre_values.at(r) != top.pre_values.at(r)) {
          throw violation("pre_values_agree_with_toucher",
                          json{{"subset_mask", mask}, {"reg", r}, {"pid", toucher}});
        }
      } else if (!fallback) {
        fallback = st.pre_values.at(r);
      } else if (*fallback != st.pre_values.at(r)) {
        throw violation("pre_values_share_fallback",
                        json{{"subset_mask", mask}, {"reg", r}});
      }
    }
  }

  return cs_eviction(out);
}

ScheduleArray Adversary::high_phase(const ScheduleArray& array,
                                    const DecisionResult& decision,
                                    RoundReport& report) const {
  const SmaxInfo info = smax_info(world_, array);
  ContentionSnapshot snap = snapshot(array);
  TieBreaker tb(cfg_.seeded_random, cfg_.seed ^ (0x9e3779b97f4a7c15ULL * (array.round + 1)));

  FilterChain chain = high_filter_chain(snap, decision.high, quotas_, tb);
  report.size_h1 = static_cast<long>(chain.h1.size());
  report.size_h2 = static_cast<long>(chain.h2.size());
  report.size_h3 = static_cast<long>(chain.h3.size());
  report.size_h4 = static_cast<long>(chain.h4.size());
  report.size_h5 = static_cast<long>(chain.h5.size());

  const SubsetKey s_h = info.fmax | mask_of(chain.h5);
  ScheduleArray high_a;
  high_a.n = array.n;
  high_a.round = array.round;
  for (const auto& [mask, sched] : array.entries) {
    if ((mask & ~s_h) == 0) high_a.entries[mask] = sched;
  }

  ExecResult group_row = world_.execute(high_a.at(s_h));
  std::map<RegisterId, Value> values;
  std::map<RegisterId, std::optional<ProcessId>> last_at_group_row;
  for (RegisterId r = 0; r < world_.register_count(); ++r) {
    values[r] = group_row.config.reg_values[r];
    last_at_group_row[r] = group_row.config.last_accessor[r];
  }
  AlphaSelection alphas = select_alphas(chain, snap, values, tb);
  report.size_alpha = static_cast<long>(alphas.alpha_set.size());

  // Completion discovery: crash every alpha, then drive them round-robin to
  // the end of their super-passages.
  const SubsetKey s_f = info.fmax | mask_of(alphas.alpha_set);
  ExecResult at_sf = world_.execute(high_a.at(s_f));
  ExecResult after_alpha = world_.execute(at_sf.config, alphas.alpha_schedule);
  const Configuration completion_start = after_alpha.config;

  Schedule completion;
  std::set<RegisterId> completion_regs;
  {
    Configuration cur = completion_start;
    for (ProcessId p : alphas.alpha_set) {
      completion.push(Step::crashed(p));
      world_.step(cur, Step::crashed(p));
    }
    long steps = 0;
    while (true) {
      bool any = false;
      for (ProcessId p : alphas.alpha_set) {
        if (cur.is_finished(p)) continue;
        any = true;
        Event ev = world_.step(cur, Step::normal(p));
        completion.push(Step::normal(p));
        if (ev.kind == Event::Kind::MemOp) completion_regs.insert(ev.reg);
        if (cur.in_critical_section().size() > 1) {
          throw RmeError(ErrorCode::MutualExclusionViolation,
                         "two processes hold the critical section during completion",
                         json{{"pids", cur.in_critical_section()},
                              {"witness", schedule_witness(
                                              s_f, high_a.at(s_f) + alphas.alpha_schedule +
                                                       completion)}});
        }
        if (++steps > cfg_.step_budget) {
          throw RmeError(ErrorCode::CompletionStall,
                         "crashed processes failed to finish within the step budget",
                         json{{"budget", cfg_.step_budget},
                              {"unfinished", [&] {
                                 std::vector<ProcessId> u;
                                 for (ProcessId q : alphas.alpha_set) {
                                   if (!cur.is_finished(q)) u.push_back(q);
                                 }
                                 return u;
                               }()}});
        }
      }
      if (!any) break;
    }
  }

  BetaSelection betas = compute_disturbed_and_betas(chain, alphas, completion_regs,
                                                    last_at_group_row, snap, quotas_, tb);
  report.size_h6 = static_cast<long>(betas.h6.size());
  report.size_disturbed = static_cast<long>(betas.disturbed.size());
  report.size_beta = static_cast<long>(betas.beta_set.size());

  const long long b = cfg_.effective_a2_budget();
  report.dsize_bound.expr = "|D| <= 2 |alpha| B";
  report.dsize_bound.lhs = static_cast<long long>(betas.disturbed.size());
  report.dsize_bound.rhs = 2LL * static_cast<long long>(alphas.alpha_set.size()) * b;
  report.dsize_bound.holds = report.dsize_bound.lhs <= report.dsize_bound.rhs;
  report.dsize_bound.applicable = report.a2_held;

  const long long new_active =
      static_cast<long long>(betas.beta_set.size() - alphas.alpha_set.size());
  report.beta_bound.expr = "|beta \\ alpha| * 1024 k > 5 |H|";
  report.beta_bound.lhs = new_active * 1024LL * cfg_.k;
  report.beta_bound.rhs = 5LL * static_cast<long long>(decision.high.size());
  report.beta_bound.holds = report.beta_bound.lhs > report.beta_bound.rhs;
  report.beta_bound.applicable =
      report.a2_held && cfg_.k >= 5120 && cfg_.q1 == 0 && cfg_.q3 == 0 && cfg_.q5 == 0;

  const SubsetKey s_b = info.fmax | mask_of(betas.beta_set);
  ScheduleArray high_b;
  high_b.n = array.n;
  high_b.round = array.round;
  for (const auto& [mask, sched] : high_a.entries) {
    if ((mask & ~s_b) == 0) high_b.entries[mask] = sched;
  }
  ExecResult at_sb = world_.execute(high_b.at(s_b));

  std::vector<Schedule> alpha_frag(chain.group_count());
  std::vector<Schedule> beta_frag(chain.group_count());
  for (int j = 0; j < chain.group_count(); ++j) {
    alpha_frag[j].push(Step::normal(alphas.alpha1[j]));
    alpha_frag[j].push(Step::normal(alphas.alpha2[j]));
    beta_frag[j] = beta_fragment(j, chain, alphas, betas, snap);
  }

  const SubsetKey f_new = info.fmax | mask_of(alphas.alpha_set);
  std::set<RegisterId> group_regs;
  for (const auto& grp : chain.groups) group_regs.insert(grp.target);

  auto violation = [](const char* check, json detail) {
    detail["check"] = check;
    return RmeError(ErrorCode::HighLemmaViolation,
                    std::string("high-contention property failed: ") + check,
                    std::move(detail));
  };

  ScheduleArray out;
  out.n = array.n;
  out.round = array.round + 1;
  for (SubsetKey mask : interval_subsets(f_new, s_b)) {
    Schedule contention;
    for (int j = 0; j < chain.group_count(); ++j) {
      const bool substitute = betas.beta1[j] && mask_contains(mask, *betas.beta1[j]);
      contention.append(substitute ? beta_frag[j] : alpha_frag[j]);
    }

    ExecResult prefix = world_.execute(high_b.at(mask));

    // The contention steps must be invisible: after every group's fragment,
    // all register values match the alpha-only run from the same start.
    Configuration with_sub = prefix.config;
    Configuration alpha_only = prefix.config;
    std::set<RegisterId> touched;
    std::map<ProcessId, int> sub_rmrs;
    for (int j = 0; j < chain.group_count(); ++j) {
      const bool substitute = betas.beta1[j] && mask_contains(mask, *betas.beta1[j]);
      const Schedule& frag = substitute ? beta_frag[j] : alpha_frag[j];
      for (const Step& s : frag.steps) {
        Event ev = world_.step(with_sub, s);
        if (ev.kind == Event::Kind::LeaveCS) {
          throw violation("no_cs_exit", json{{"subset_mask", mask}, {"pid", ev.pid}});
        }
        if (ev.kind == Event::Kind::MemOp) {
          touched.insert(ev.reg);
          if (ev.rmr) sub_rmrs[ev.pid] += 1;
        }
      }
      for (const Step& s : alpha_frag[j].steps) world_.step(alpha_only, s);
      if (with_sub.reg_values != alpha_only.reg_values) {
        throw violation("substitution_invisible",
                        json{{"subset_mask", mask}, {"group", j}});
      }
    }
    if (touched != group_regs) {
      throw violation("group_registers_exact",
                      json{{"subset_mask", mask},
                           {"touched", std::vector<RegisterId>(touched.begin(), touched.end())},
                           {"expected", std::vector<RegisterId>(group_regs.begin(),
                                                                group_regs.end())}});
    }
    for (ProcessId p : pids_of(mask & mask_of(betas.beta_set))) {
      if (sub_rmrs[p] != 1) {
        throw violation("exactly_one_rmr",
                        json{{"subset_mask", mask}, {"pid", p}, {"rmrs", sub_rmrs[p]}});
      }
    }
    if (with_sub.finished != prefix.config.finished) {
      throw violation("finished_unchanged_before_completion", json{{"subset_mask", mask}});
    }
    for (const auto& grp : chain.groups) {
      if (prefix.config.reg_values[grp.target] != at_sb.config.reg_values[grp.target]) {
        throw violation("group_values_agree_across_entries",
                        json{{"subset_mask", mask}, {"reg", grp.target}});
      }
    }
    for (RegisterId r : completion_regs) {
      if (with_sub.reg_values[r] != completion_start.reg_values[r]) {
        throw violation("completion_registers_agree",
                        json{{"subset_mask", mask}, {"reg", r}});
      }
    }

    ExecResult finished_run = world_.execute(with_sub, completion);
    std::set<ProcessId> expect_f = prefix.config.finished;
    expect_f.insert(alphas.alpha_set.begin(), alphas.alpha_set.end());
    if (finished_run.config.finished != expect_f) {
      throw violation("finished_grows_by_alpha", json{{"subset_mask", mask}});
    }

    out.entries[mask] = high_b.at(mask) + contention + completion;
  }
  out.smax = s_b;
  out.fmax = f_new;
  out.caches_valid = true;
  return out;
}

RunResult Adversary::run() const {
  RunResult out;
  out.error = json(nullptr);
  out.rows.push_back(base_row());

  ComplianceOptions copts;
  copts.mode = cfg_.verify_mode;
  copts.sample_size = cfg_.sample_size;
  copts.max_subsets = cfg_.max_subsets;
  copts.seed = cfg_.seed ^ 0xc0ffee;

  bool prev_compliant = true;
  if (cfg_.verify == AdversaryConfig::Verify::EachRound) {
    out.base_compliance = check_compliance(world_, out.rows.front(), copts);
    prev_compliant = out.base_compliance->all_pass();
  }

  int round = 0;
  try {
    for (round = 1; round <= cfg_.max_rounds; ++round) {
      ScheduleArray& prev = out.rows.back();
      const SmaxInfo prev_info = smax_info(world_, prev);
      const long n_prev = mask_size(prev_info.smax & ~prev_info.fmax);

      std::string reason;
      if (should_terminate(prev, prev_compliant, n_prev, &reason)) {
        RoundReport rep;
        rep.round = round;
        rep.branch = Branch::Terminated;
        rep.termination_reason = reason;
        rep.n_active = n_prev;
        rep.n_active_prev = n_prev;
        out.rounds.push_back(std::move(rep));
        break;
      }

      RoundReport rep;
      rep.round = round;
      rep.n_active_prev = n_prev;

      ScheduleArray setup_a = setup_phase(prev);
      ScheduleArray setup_b = cs_eviction(setup_a);

      {
        ExecResult top = world_.execute(setup_b.at(setup_b.smax));
        rep.assumptions = check_assumptions(top.trace, cfg_.n, cfg_.effective_a2_budget());
        rep.a2_held = rep.assumptions.a2_ok;
      }

      ContentionSnapshot snap = snapshot(setup_b);
      DecisionResult decision = decision_phase(snap);
      rep.size_high = static_cast<long>(decision.high.size());
      rep.size_low = static_cast<long>(decision.low.size());

      const long long b = cfg_.effective_a2_budget();
      ScheduleArray next;
      bool did_low = false;

      auto run_low = [&]() {
        ConflictGraph graph = build_conflict_graph(snap, decision.low);
        rep.conflict_edges = static_cast<long>(graph.edges.size());
        rep.edge_bound.expr = "edges <= 3 k |L| B";
        rep.edge_bound.lhs = rep.conflict_edges;
        rep.edge_bound.rhs = 3LL * cfg_.k * static_cast<long long>(decision.low.size()) * b;
        rep.edge_bound.holds = rep.edge_bound.lhs <= rep.edge_bound.rhs;
        rep.edge_bound.applicable = rep.a2_held;

        std::set<ProcessId> iset = greedy_independent_set(graph);
        rep.size_iset = static_cast<long>(iset.size());
        rep.iset_bound.expr = "|I| * 7 k B >= |L|";
        rep.iset_bound.lhs = static_cast<long long>(iset.size()) * 7LL * cfg_.k * b;
        rep.iset_bound.rhs = static_cast<long long>(decision.low.size());
        rep.iset_bound.holds = rep.iset_bound.lhs >= rep.iset_bound.rhs;
        rep.iset_bound.applicable = rep.a2_held;

        next = low_phase(setup_b, iset);
        did_low = true;
      };

      if (decision.low_branch) {
        rep.branch = Branch::Low;
        run_low();
      } else {
        try {
          next = high_phase(setup_b, decision, rep);
          rep.branch = Branch::High;
        } catch (const RmeError& e) {
          if (e.code() != ErrorCode::HighDegenerate) throw;
          if (decision.low.empty()) {
            rep.branch = Branch::Terminated;
            rep.termination_reason = "high branch degenerate and no low-contention processes";
            rep.n_active = n_prev;
            out.rounds.push_back(std::move(rep));
            break;
          }
          rep.branch = Branch::HighFallbackLow;
          run_low();
        }
      }

      const SmaxInfo next_info = smax_info(world_, next);
      rep.n_active = mask_size(next_info.smax & ~next_info.fmax);
      if (did_low) {
        // Informational: the greedy-selection form of the per-round shrink.
        rep.shrink_bound.expr = "n_i * 7 k B >= n_{i-1} - 7 k B";
        rep.shrink_bound.lhs = rep.n_active * 7LL * cfg_.k * b;
        rep.shrink_bound.rhs = rep.n_active_prev - 7LL * cfg_.k * b;
        rep.shrink_bound.holds = rep.shrink_bound.lhs >= rep.shrink_bound.rhs;
        rep.shrink_bound.applicable = false;  // recorded, never asserted
      }

      if (cfg_.verify == AdversaryConfig::Verify::EachRound) {
        ComplianceReport crep = check_compliance(world_, next, copts);
        prev_compliant = crep.all_pass();
        rep.compliance = std::move(crep);
      }

      out.rows.push_back(std::move(next));
      out.rounds.push_back(std::move(rep));
    }
  } catch (const RmeError& e) {
    out.error_code = e.code();
    out.error = json{{"code", error_code_name(e.code())},
                     {"round", round},
                     {"message", e.what()},
                     {"witness", e.witness()}};
  }

  if (cfg_.verify == AdversaryConfig::Verify::FinalOnly && !out.rows.empty()) {
    ComplianceReport crep = check_compliance(world_, out.rows.back(), copts);
    if (!out.rounds.empty()) out.rounds.back().compliance = std::move(crep);
  }

  // Final witness: the maximal schedule of the last row.
  const ScheduleArray& last = out.rows.back();
  const SmaxInfo last_info = smax_info(world_, last);
  ExecResult top = world_.execute(last.at(last_info.smax));
  out.witness.rounds_completed = last.round;
  std::set<ProcessId> entered;
  for (const auto& ev : top.trace.events) {
    if (ev.kind == Event::Kind::EnterCS) entered.insert(ev.pid);
  }
  for (ProcessId p : pids_of(last_info.smax & ~last_info.fmax)) {
    out.witness.active_pids.push_back(p);
    const int rmrs = rmr_count(top.trace, p);
    out.witness.rmr_counts[p] = rmrs;
    if (rmrs < last.round) out.witness.rmr_floor_ok = false;
    if (top.config.crash_count[p - 1] != 0) out.witness.zero_crash_ok = false;
    if (entered.count(p)) out.witness.never_cs_ok = false;
  }
  return out;
}

}  // namespace rme
