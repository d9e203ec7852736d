#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace g2 {

struct RunConfig {
  std::uint64_t seed = 7;
  int samples = 20;
  double tol = 0.0;      // overrides finite-difference tolerances when positive
  double fd_step = 0.0;  // overrides finite-difference steps when positive
  bool exact = false;
};

enum class CheckStatus { pass, fail, measured };

struct CheckRecord {
  std::string name;
  CheckStatus status = CheckStatus::measured;
  double value = 0.0;
  double tolerance = 0.0;
  std::string anchor;
  int criterion = 0;  // acceptance criterion number, 0 when none
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckRecord> checks;
  std::vector<std::string> diagnostics;
  // Named numeric series, such as Newton residual histories.
  std::vector<std::pair<std::string, std::vector<double>>> series;

  bool passed() const;
};

SuiteReport verify_algebra(const RunConfig& cfg);
SuiteReport verify_moduli(const RunConfig& cfg);
SuiteReport verify_jacobian(const RunConfig& cfg);
SuiteReport verify_cycles(const RunConfig& cfg);

// Cycle demos: witness library and isotropy for one cycle type, or loop well-definedness.
SuiteReport cycles_demo(const std::string& demo, const RunConfig& cfg);

// Anchor strings a report may cite; every suite check uses one of them.
const std::vector<std::string>& anchor_list();

const char* status_name(CheckStatus s);

}  // namespace g2
