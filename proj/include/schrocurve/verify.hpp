#pragma once

#include "schrocurve/config.hpp"

#include <map>
#include <string>
#include <vector>

namespace schrocurve {

struct CheckResult {
  std::string suite;
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

struct SuiteResult {
  std::vector<CheckResult> checks;
  /// CSV tables keyed by file stem (written to tables/<stem>.csv).
  std::map<std::string, std::string> tables;

  bool pass() const;
  void merge(SuiteResult other);
};

const std::vector<std::string>& suite_names();

/// Runs one battery (or "all"). Grid size, sample counts, seed and (z, zeta) come from the config.
SuiteResult run_suite(const std::string& suite, const RunConfig& cfg, unsigned workers);

SuiteResult verify_symbols(const RunConfig& cfg);
SuiteResult verify_norms(const RunConfig& cfg);
SuiteResult verify_propagator(const RunConfig& cfg);
SuiteResult verify_noise(const RunConfig& cfg);
SuiteResult verify_isometry(const RunConfig& cfg, unsigned workers);
SuiteResult verify_hs(const RunConfig& cfg);
SuiteResult verify_contraction(const RunConfig& cfg, unsigned workers);

}  // namespace schrocurve
