#include "rme/world.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rme/json_io.hpp"

namespace rme {

const char* memory_model_name(MemoryModel m) {
  return m == MemoryModel::CC ? "cc" : "dsm";
}

MemoryModel parse_memory_model(const std::string& s) {
  if (s == "cc") return MemoryModel::CC;
  if (s == "dsm") return MemoryModel::DSM;
  throw RmeError(ErrorCode::Usage, "unknown memory model: " + s);
}

const char* section_name(Section s) {
  switch (s) {
    case Section::Remainder: return "remainder";
    case Section::Entry: return "entry";
    case Section::CS: return "cs";
    case Section::Exit: return "exit";
    case Section::Recover: return "recover";
  }
  return "?";
}

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DuplicateRegister: return "DUPLICATE_REGISTER";
    case ErrorCode::UnknownOwner: return "UNKNOWN_OWNER";
    case ErrorCode::UnknownAlgorithm: return "UNKNOWN_ALGORITHM";
    case ErrorCode::StepOfFinished: return "STEP_OF_FINISHED";
    case ErrorCode::ProgramFault: return "PROGRAM_FAULT";
    case ErrorCode::NoUniqueSmax: return "NO_UNIQUE_SMAX";
    case ErrorCode::SetupBudgetExceeded: return "SETUP_BUDGET_EXCEEDED";
    case ErrorCode::SetupLemmaViolation: return "SETUP_LEMMA_VIOLATION";
    case ErrorCode::MutualExclusionViolation: return "MUTUAL_EXCLUSION_VIOLATION";
    case ErrorCode::LowLemmaViolation: return "LOW_LEMMA_VIOLATION";
    case ErrorCode::HighLemmaViolation: return "HIGH_LEMMA_VIOLATION";
    case ErrorCode::HighDegenerate: return "HIGH_DEGENERATE";
    case ErrorCode::CompletionStall: return "COMPLETION_STALL";
    case ErrorCode::StateSpaceOverflow: return "STATE_SPACE_OVERFLOW";
    case ErrorCode::ComplianceFail: return "COMPLIANCE_FAIL";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::Usage: return "USAGE";
  }
  return "?";
}

RmeError::RmeError(ErrorCode code, const std::string& message, nlohmann::json witness)
    : std::runtime_error(message),
      code_(code),
      witness_(std::make_shared<nlohmann::json>(std::move(witness))) {}

RmeError::~RmeError() = default;

const nlohmann::json& RmeError::witness() const {
  static const nlohmann::json kNull;
  return witness_ ? *witness_ : kNull;
}

std::vector<ProcessId> Configuration::in_critical_section() const {
  std::vector<ProcessId> out;
  for (std::size_t i = 0; i < section.size(); ++i) {
    if (section[i] == Section::CS) out.push_back(static_cast<ProcessId>(i + 1));
  }
  return out;
}

std::string Configuration::canonical_key() const {
  // Covers everything the compliance invariants can observe.
  std::ostringstream os;
  for (const auto& v : reg_values) os << v.to_string() << ';';
  os << '|';
  for (std::size_t i = 0; i < proc_state.size(); ++i) {
    os << proc_state[i].pc << ':';
    for (const auto& v : proc_state[i].vars) os << v.to_string() << ',';
    os << section_name(section[i]) << ':' << (started[i] ? 1 : 0) << ':'
       << crash_count[i] << ':' << (cs_rmr_flag[i] ? 1 : 0) << ':';
    for (RegisterId r : valid_cache[i]) os << r << '.';
    os << ';';
  }
  os << '|';
  for (const auto& la : last_accessor) os << (la ? *la : 0) << ';';
  os << '|';
  for (ProcessId p : finished) os << p << ';';
  return os.str();
}

World::World(MemoryModel model, AlgorithmInstance algo, bool crash_clears_cache)
    : model_(model), algo_(std::move(algo)), crash_clears_cache_(crash_clears_cache) {
  std::set<RegisterId> seen;
  for (const auto& r : algo_.registers) {
    if (!seen.insert(r.id).second) {
      throw RmeError(ErrorCode::DuplicateRegister,
                     "duplicate register id " + std::to_string(r.id));
    }
    if (r.owner && (*r.owner < 1 || *r.owner > algo_.n)) {
      throw RmeError(ErrorCode::UnknownOwner,
                     "register " + r.name + " owned by unknown process " +
                         std::to_string(*r.owner));
    }
  }
  for (RegisterId i = 0; i < static_cast<RegisterId>(algo_.registers.size()); ++i) {
    if (algo_.registers[i].id != i) {
      throw RmeError(ErrorCode::DuplicateRegister, "register ids must be dense");
    }
  }
}

Configuration World::initial_config() const {
  Configuration c;
  c.reg_values.reserve(algo_.registers.size());
  for (const auto& r : algo_.registers) c.reg_values.push_back(r.initial);
  c.proc_state.resize(algo_.n);
  for (int i = 0; i < algo_.n; ++i) c.proc_state[i] = algo_.programs[i]->initial_state();
  c.section.assign(algo_.n, Section::Remainder);
  c.started.assign(algo_.n, false);
  c.valid_cache.assign(algo_.n, {});
  c.last_accessor.assign(algo_.registers.size(), std::nullopt);
  c.crash_count.assign(algo_.n, 0);
  c.cs_rmr_flag.assign(algo_.n, false);
  return c;
}

bool World::rmr_of(const Configuration& config, ProcessId pid, const Operation& op,
                   RegisterId reg) const {
  if (model_ == MemoryModel::DSM) {
    auto o = owner(reg);
    return !(o && *o == pid);
  }
  if (op.kind != OpKind::Read) return true;
  return config.valid_cache[pid - 1].count(reg) == 0;
}

PendingAction World::pending(const Configuration& config, ProcessId pid) const {
  if (config.is_finished(pid)) {
    throw RmeError(ErrorCode::StepOfFinished,
                   "process " + std::to_string(pid) + " already finished");
  }
  PendingAction a = algo_.program(pid).pending(config.proc_state[pid - 1]);
  if (a.kind == PendingAction::Kind::MemOp &&
      (a.reg < 0 || a.reg >= register_count())) {
    throw RmeError(ErrorCode::ProgramFault,
                   "process " + std::to_string(pid) + " targets unknown register " +
                       std::to_string(a.reg));
  }
  return a;
}

Event World::step(Configuration& config, Step s) const {
  const int i = s.pid - 1;
  if (s.pid < 1 || s.pid > algo_.n) {
    throw RmeError(ErrorCode::ProgramFault, "step of unknown process");
  }
  if (s.crash) {
    // A crash resets local state and touches no shared memory. For a process
    // inside a super-passage it lands at the program's recover entry.
    Event ev;
    ev.kind = Event::Kind::Crash;
    ev.pid = s.pid;
    config.crash_count[i] += 1;
    config.cs_rmr_flag[i] = false;
    if (crash_clears_cache_) config.valid_cache[i].clear();
    if (config.started[i] && !config.is_finished(s.pid)) {
      config.proc_state[i] = algo_.program(s.pid).recover_state();
      config.section[i] = Section::Recover;
    } else {
      config.proc_state[i] = algo_.program(s.pid).initial_state();
    }
    ev.section_after = config.section[i];
    return ev;
  }

  PendingAction a = pending(config, s.pid);
  if (!config.started[i]) {
    config.started[i] = true;
    config.section[i] = Section::Entry;
  }

  Event ev;
  ev.pid = s.pid;
  switch (a.kind) {
    case PendingAction::Kind::MemOp: {
      ev.kind = Event::Kind::MemOp;
      ev.op = a.op;
      ev.reg = a.reg;
      ev.rmr = rmr_of(config, s.pid, a.op, a.reg);
      OpResult r = apply_op(config.reg_values[a.reg], a.op);
      config.reg_values[a.reg] = r.new_value;
      ev.response = r.response;
      config.last_accessor[a.reg] = s.pid;
      if (model_ == MemoryModel::CC) {
        if (a.op.kind == OpKind::Read) {
          config.valid_cache[i].insert(a.reg);
        } else {
          for (auto& cache : config.valid_cache) cache.erase(a.reg);
        }
      }
      if (ev.rmr && config.section[i] == Section::CS) config.cs_rmr_flag[i] = true;
      config.proc_state[i] = algo_.program(s.pid).advance(config.proc_state[i], r.response);
      break;
    }
    case PendingAction::Kind::EnterCS:
      if (config.section[i] != Section::Entry && config.section[i] != Section::Recover) {
        throw RmeError(ErrorCode::ProgramFault,
                       "EnterCS from section " + std::string(section_name(config.section[i])));
      }
      ev.kind = Event::Kind::EnterCS;
      config.section[i] = Section::CS;
      config.cs_rmr_flag[i] = false;
      config.proc_state[i] = algo_.program(s.pid).advance(config.proc_state[i], Value::null());
      break;
    case PendingAction::Kind::LeaveCS:
      if (config.section[i] != Section::CS) {
        throw RmeError(ErrorCode::ProgramFault, "LeaveCS outside the critical section");
      }
      ev.kind = Event::Kind::LeaveCS;
      config.section[i] = Section::Exit;
      config.proc_state[i] = algo_.program(s.pid).advance(config.proc_state[i], Value::null());
      break;
    case PendingAction::Kind::CompleteSuperPassage:
      if (config.section[i] != Section::Exit) {
        throw RmeError(ErrorCode::ProgramFault, "CompleteSuperPassage outside Exit");
      }
      ev.kind = Event::Kind::Complete;
      config.section[i] = Section::Remainder;
      config.finished.insert(s.pid);
      config.proc_state[i] = algo_.program(s.pid).advance(config.proc_state[i], Value::null());
      break;
  }
  ev.section_after = config.section[i];
  return ev;
}

ExecResult World::execute(const Configuration& start, const Schedule& schedule) const {
  ExecResult out{start, {}};
  out.trace.events.reserve(schedule.size());
  for (std::size_t idx = 0; idx < schedule.steps.size(); ++idx) {
    try {
      out.trace.events.push_back(step(out.config, schedule.steps[idx]));
    } catch (const RmeError& e) {
      nlohmann::json w = e.witness();
      w["step_index"] = idx;
      throw RmeError(e.code(), std::string(e.what()) + " (at step " +
                                    std::to_string(idx) + ")", std::move(w));
    }
  }
  return out;
}

ExecResult World::execute(const Schedule& schedule) const {
  return execute(initial_config(), schedule);
}

ExecTrail World::execute_trail(const Configuration& start, const Schedule& schedule) const {
  ExecTrail out;
  Configuration cur = start;
  out.before.reserve(schedule.size());
  for (const Step& s : schedule.steps) {
    out.before.push_back(cur);
    out.trace.events.push_back(step(cur, s));
  }
  out.final = std::move(cur);
  return out;
}

int rmr_count(const ExecutionTrace& trace, ProcessId pid) {
  int c = 0;
  for (const auto& ev : trace.events) {
    if (ev.pid == pid && ev.kind == Event::Kind::MemOp && ev.rmr) ++c;
  }
  return c;
}

int max_passage_rmrs(const ExecutionTrace& trace) {
  std::map<ProcessId, int> current;
  int best = 0;
  for (const auto& ev : trace.events) {
    switch (ev.kind) {
      case Event::Kind::Crash:
        best = std::max(best, current[ev.pid]);
        current[ev.pid] = 0;
        break;
      case Event::Kind::Complete:
        best = std::max(best, current[ev.pid]);
        current[ev.pid] = 0;
        break;
      case Event::Kind::MemOp:
        if (ev.rmr) current[ev.pid] += 1;
        break;
      default:
        break;
    }
  }
  for (const auto& [pid, c] : current) best = std::max(best, c);
  return best;
}

}  // namespace rme
