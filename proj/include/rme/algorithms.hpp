#pragma once

#include <string>
#include <vector>

#include "rme/program.hpp"
#include "rme/world.hpp"

namespace rme {

struct AlgorithmDescriptor {
  std::string name;
  std::string description;
  bool crash_safe = false;  // verified safe under one crash per process
};

// Catalog of built-in sample algorithms, addressable by name from the CLI.
std::vector<AlgorithmDescriptor> sample_algorithms();

// Instantiates a catalog algorithm for n processes. Throws UNKNOWN_ALGORITHM.
AlgorithmInstance make_algorithm(const std::string& name, int n);

struct AssumptionReport {
  bool a1_ok = true;       // every completed CS visit incurred at least one RMR
  int a2_max = 0;          // max RMRs observed in any passage
  int a2_budget = 0;       // configured budget (default ceil(log2 n))
  bool a2_ok = true;       // advisory: a2_max <= a2_budget
  bool a3_ok = true;       // each process begins at most one super-passage
};

// Checks the three harness assumptions against a trace. budget <= 0 selects
// the default ceil(log2 n).
AssumptionReport check_assumptions(const ExecutionTrace& trace, int n, int budget = 0);

// ceil(log2(n)) with a floor of 1; the integer form used by every bound check.
int log2_ceil(int n);

}  // namespace rme
