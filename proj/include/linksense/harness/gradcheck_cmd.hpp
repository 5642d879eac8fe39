// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace linksense::harness {

// Finite-difference validation across every layer kind in isolation and
// every fixed architecture at reduced input sizes, double precision.
struct GradCheckEntry {
  std::string target;
  double max_rel_error = 0.0;
  std::string worst_param;
  bool pass = false;
};

struct GradCheckSummary {
  std::vector<GradCheckEntry> entries;
  bool all_pass = true;
  double tolerance = 1e-4;
};

GradCheckSummary run_grad_checks(std::uint64_t seed = 42);

std::string format_grad_checks(const GradCheckSummary& summary);

}  // namespace linksense::harness
