#include <chrono>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "rme/adversary.hpp"
#include "rme/algorithms.hpp"
#include "rme/compliance.hpp"
#include "rme/oracle.hpp"

namespace {

using rme::json;

constexpr int kExitCompliance = 1;
constexpr int kExitMutualExclusion = 2;
constexpr int kExitLemma = 3;
constexpr int kExitBudget = 4;
constexpr int kExitUsage = 64;
constexpr int kExitParse = 65;

int exit_code_for(rme::ErrorCode code) {
  switch (code) {
    case rme::ErrorCode::MutualExclusionViolation:
      return kExitMutualExclusion;
    case rme::ErrorCode::SetupLemmaViolation:
    case rme::ErrorCode::LowLemmaViolation:
    case rme::ErrorCode::HighLemmaViolation:
    case rme::ErrorCode::NoUniqueSmax:
      return kExitLemma;
    case rme::ErrorCode::SetupBudgetExceeded:
    case rme::ErrorCode::CompletionStall:
    case rme::ErrorCode::StateSpaceOverflow:
      return kExitBudget;
    case rme::ErrorCode::ParseError:
      return kExitParse;
    default:
      return kExitUsage;
  }
}

void emit_error(rme::ErrorCode code, const std::string& message, const json& witness) {
  json err{{"error", {{"code", rme::error_code_name(code)},
                      {"message", message},
                      {"witness", witness}}}};
  std::cerr << err.dump() << "\n";
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw rme::RmeError(rme::ErrorCode::Usage, "cannot open output file: " + path);
  out << content << "\n";
}

struct RunFlags {
  rme::AdversaryConfig cfg;
  std::string model = "cc";
  std::string verify = "each-round";
  std::string verify_mode = "exhaustive";
  int d = 0;
  bool with_timestamp = false;
  std::string out_path;
  std::string csv_path;
  std::string save_final_row;
};

int cmd_run(RunFlags& f) {
  f.cfg.model = rme::parse_memory_model(f.model);
  if (f.d > 0) {
    int k = 1;
    const int base = rme::log2_ceil(f.cfg.n);
    for (int i = 0; i < f.d; ++i) k *= base;
    f.cfg.k = k;
  }
  if (f.verify == "each-round") {
    f.cfg.verify = rme::AdversaryConfig::Verify::EachRound;
  } else if (f.verify == "final") {
    f.cfg.verify = rme::AdversaryConfig::Verify::FinalOnly;
  } else if (f.verify == "off") {
    f.cfg.verify = rme::AdversaryConfig::Verify::Off;
  } else {
    throw rme::RmeError(rme::ErrorCode::Usage, "--verify must be each-round|final|off");
  }
  if (f.verify_mode == "exhaustive") {
    f.cfg.verify_mode = rme::ComplianceMode::Exhaustive;
  } else if (f.verify_mode == "sampled") {
    f.cfg.verify_mode = rme::ComplianceMode::Sampled;
  } else {
    throw rme::RmeError(rme::ErrorCode::Usage, "--verify-mode must be exhaustive|sampled");
  }

  rme::Adversary adversary(f.cfg);
  rme::RunResult result = adversary.run();

  json report = result.to_json(f.cfg);
  if (f.with_timestamp) {
    report["timestamp_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
  }
  write_output(f.out_path, report.dump(2));
  if (!f.csv_path.empty()) write_output(f.csv_path, result.to_csv());
  if (!f.save_final_row.empty()) {
    write_output(f.save_final_row,
                 rme::schedule_array_to_json(result.rows.back(), f.cfg.model,
                                             f.cfg.algorithm)
                     .dump(2));
  }

  if (result.error_code) {
    emit_error(*result.error_code, result.error.value("message", ""), result.error);
    return exit_code_for(*result.error_code);
  }
  if (!result.all_compliance_pass()) {
    emit_error(rme::ErrorCode::ComplianceFail, "a produced row failed verification", {});
    return kExitCompliance;
  }
  return 0;
}

struct CheckFlags {
  std::string array_path;
  std::string mode = "exhaustive";
  int sample_size = 64;
  std::string out_path;
};

int cmd_check(CheckFlags& f) {
  std::ifstream in(f.array_path);
  if (!in) {
    throw rme::RmeError(rme::ErrorCode::ParseError, "cannot open array file: " + f.array_path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw rme::RmeError(rme::ErrorCode::ParseError, std::string("bad JSON: ") + e.what());
  }
  rme::LoadedArray loaded = rme::schedule_array_from_json(j);
  rme::World world(loaded.model, rme::make_algorithm(loaded.algorithm, loaded.array.n));

  rme::ComplianceOptions opts;
  opts.mode = f.mode == "sampled" ? rme::ComplianceMode::Sampled
                                  : rme::ComplianceMode::Exhaustive;
  opts.sample_size = f.sample_size;
  rme::ComplianceReport report = rme::check_compliance(world, loaded.array, opts);
  write_output(f.out_path, report.to_json().dump(2));
  if (!report.all_pass()) {
    emit_error(rme::ErrorCode::ComplianceFail, "compliance check failed", json{});
    return kExitCompliance;
  }
  return 0;
}

struct ExploreFlags {
  int n = 2;
  std::string algorithm = "cas-owner-lock";
  std::string model = "cc";
  rme::ExplorationBounds bounds;
  bool force = false;
  std::string out_path;
};

int cmd_explore(ExploreFlags& f) {
  if (f.n > 4 && !f.force) {
    throw rme::RmeError(rme::ErrorCode::Usage,
                        "exploration beyond n=4 needs --force (state space)");
  }
  rme::World world(rme::parse_memory_model(f.model),
                   rme::make_algorithm(f.algorithm, f.n));
  rme::SafetyReport report = rme::explore(world, f.bounds);
  write_output(f.out_path, report.to_json().dump(2));
  return report.all_ok() ? 0 : 1;
}

int cmd_list() {
  json out = json::array();
  for (const auto& d : rme::sample_algorithms()) {
    out.push_back(json{{"name", d.name},
                       {"description", d.description},
                       {"crash_safe", d.crash_safe}});
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recoverable-mutual-exclusion simulator and adversarial scheduler"};
  app.require_subcommand(1);

  RunFlags rf;
  CLI::App* run = app.add_subcommand("run", "run the adversarial scheduler");
  run->add_option("--n", rf.cfg.n, "number of processes")->required();
  run->add_option("--k", rf.cfg.k, "contention threshold");
  run->add_option("--d", rf.d, "set k = ceil(log2 n)^d");
  run->add_option("--model", rf.model, "cc or dsm")->required();
  run->add_option("--algorithm", rf.cfg.algorithm, "algorithm name");
  run->add_option("--max-rounds", rf.cfg.max_rounds, "round cap");
  run->add_option("--min-active", rf.cfg.min_active, "termination threshold (default k^3)");
  run->add_option("--step-budget", rf.cfg.step_budget, "per-discovery step budget");
  run->add_option("--verify", rf.verify, "each-round|final|off");
  run->add_option("--verify-mode", rf.verify_mode, "exhaustive|sampled");
  run->add_option("--sample-size", rf.cfg.sample_size, "sampled-mode extra subsets");
  run->add_option("--max-subsets", rf.cfg.max_subsets, "exhaustive-verification cap");
  run->add_option("--a2-budget", rf.cfg.a2_budget, "RMRs allowed per passage (default ceil(log2 n))");
  run->add_flag("--seed-random", rf.cfg.seeded_random, "randomized tie-breaks");
  run->add_option("--seed", rf.cfg.seed, "tie-break seed");
  run->add_option("--quota-q1", rf.cfg.q1, "group size override (advanced)");
  run->add_option("--quota-q3", rf.cfg.q3, "post-filter group size override (advanced)");
  run->add_option("--quota-q5", rf.cfg.q5, "final group size override (advanced)");
  run->add_option("--quota-qbeta", rf.cfg.qbeta, "beta threshold override (advanced)");
  run->add_flag("--timestamp", rf.with_timestamp, "include a timestamp in the report");
  run->add_option("--out", rf.out_path, "report path (default stdout)");
  run->add_option("--csv", rf.csv_path, "per-round CSV path");
  run->add_option("--save-final-row", rf.save_final_row, "write the final row as JSON");

  CheckFlags cf;
  CLI::App* check = app.add_subcommand("check", "check a saved schedule array");
  check->add_option("--array", cf.array_path, "schedule-array JSON file")->required();
  check->add_option("--mode", cf.mode, "exhaustive|sampled");
  check->add_option("--sample-size", cf.sample_size, "sampled-mode extra subsets");
  check->add_option("--out", cf.out_path, "report path (default stdout)");

  ExploreFlags ef;
  CLI::App* explore = app.add_subcommand("explore", "exhaustive safety exploration");
  explore->add_option("--n", ef.n, "number of processes")->required();
  explore->add_option("--algorithm", ef.algorithm, "algorithm name");
  explore->add_option("--model", ef.model, "cc or dsm");
  explore->add_option("--depth", ef.bounds.max_depth, "schedule length bound");
  explore->add_option("--max-crashes", ef.bounds.max_crashes_per_process,
                      "crash budget per process");
  explore->add_option("--fairness-window", ef.bounds.fairness_window,
                      "round-robin window for stall triage");
  explore->add_option("--node-cap", ef.bounds.node_cap, "visited-state cap");
  explore->add_flag("--force", ef.force, "allow n > 4");
  explore->add_option("--out", ef.out_path, "report path (default stdout)");

  CLI::App* list = app.add_subcommand("list-algorithms", "print the algorithm catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    emit_error(rme::ErrorCode::Usage, e.what(), {});
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(rf);
    if (check->parsed()) return cmd_check(cf);
    if (explore->parsed()) return cmd_explore(ef);
    if (list->parsed()) return cmd_list();
  } catch (const rme::RmeError& e) {
    emit_error(e.code(), e.what(), e.witness());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    emit_error(rme::ErrorCode::Usage, e.what(), {});
    return kExitUsage;
  }
  return kExitUsage;
}
