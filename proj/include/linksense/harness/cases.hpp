// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "linksense/rng.hpp"
#include "linksense/sim/environment.hpp"

namespace linksense::harness {

// The five link-exploitation strategies under comparison:
//   1 agent-selected subset      4 one uniformly random link per sample
//   2 fixed orthogonal pair      5 agent-selected single link (softmax head)
//   3 all links
enum class LinkPolicy {
  kAgentSubset = 1,
  kOrthogonalPair = 2,
  kAllLinks = 3,
  kRandomSingle = 4,
  kAgentSingle = 5,
};

LinkPolicy case_policy(int case_id);
bool case_uses_agent(int case_id);

// The two most nearly perpendicular links whose segments lie closest to the
// location; deterministic per location.
std::vector<std::uint8_t> orthogonal_pair_mask(const sim::Environment& env,
                                               int location);

std::vector<std::uint8_t> all_links_mask(int num_links);

std::vector<std::uint8_t> random_single_mask(int num_links, Rng& rng);

}  // namespace linksense::harness
