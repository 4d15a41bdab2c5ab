#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rme/value.hpp"

namespace rme {

using ProcessId = int;   // 1..n
using RegisterId = int;  // dense index into the register table

enum class MemoryModel { CC, DSM };
const char* memory_model_name(MemoryModel m);
MemoryModel parse_memory_model(const std::string& s);

enum class Section { Remainder, Entry, CS, Exit, Recover };
const char* section_name(Section s);

// One schedule letter: a normal step or a crash step of pid.
struct Step {
  ProcessId pid = 0;
  bool crash = false;

  static Step normal(ProcessId p) { return {p, false}; }
  static Step crashed(ProcessId p) { return {p, true}; }
  bool operator==(const Step&) const = default;
};

struct Schedule {
  std::vector<Step> steps;

  Schedule() = default;
  explicit Schedule(std::vector<Step> s) : steps(std::move(s)) {}

  bool empty() const { return steps.empty(); }
  std::size_t size() const { return steps.size(); }
  void append(const Schedule& other) {
    steps.insert(steps.end(), other.steps.begin(), other.steps.end());
  }
  void push(Step s) { steps.push_back(s); }
  bool operator==(const Schedule&) const = default;
};

inline Schedule operator+(Schedule a, const Schedule& b) {
  a.append(b);
  return a;
}

enum class ErrorCode {
  DuplicateRegister,
  UnknownOwner,
  UnknownAlgorithm,
  StepOfFinished,
  ProgramFault,
  NoUniqueSmax,
  SetupBudgetExceeded,
  SetupLemmaViolation,
  MutualExclusionViolation,
  LowLemmaViolation,
  HighLemmaViolation,
  HighDegenerate,
  CompletionStall,
  StateSpaceOverflow,
  ComplianceFail,
  ParseError,
  Usage,
};

const char* error_code_name(ErrorCode c);

class RmeError : public std::runtime_error {
 public:
  RmeError(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  RmeError(ErrorCode code, const std::string& message, nlohmann::json witness);
  ~RmeError() override;

  ErrorCode code() const { return code_; }
  // JSON payload describing the failing object; null when none was attached.
  const nlohmann::json& witness() const;

 private:
  ErrorCode code_;
  std::shared_ptr<nlohmann::json> witness_;
};

}  // namespace rme
