#pragma once

#include <string>
#include <vector>

#include "csm/core.hpp"

namespace csm {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  bool skipped = false;
  double value = 0.0;      // observed deviation
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyReport {
  ModelParams params;
  std::vector<VerifyCheck> checks;

  bool all_passed() const;
};

struct VerifyOptions {
  double theta = 1.5707963267948966;
  std::vector<double> times{0.0, 0.7, 1.3, 2.0};
  int max_commutator_dim = 1024;
  int max_bethe_M = 12;  // Bethe checks run while N + 2s <= this
  std::uint64_t seed = 42;
};

/// Runs the inter-module and identity checks for one model.
VerifyReport verify_model(const ModelParams& p, const VerifyOptions& opts = {});

}  // namespace csm
