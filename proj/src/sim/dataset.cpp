// SPDX-License-Identifier: Apache-2.0
#include "linksense/sim/dataset.hpp"

#include "linksense/common.hpp"
#include "linksense/parallel.hpp"
#include "linksense/rng.hpp"

namespace linksense::sim {

namespace {

constexpr std::uint64_t kDatasetSeedTag = 0xd47a5e7c0ffee123ULL;

std::uint64_t split_sample_seed(std::uint64_t dataset_seed, int split,
                                std::size_t index) {
  const std::uint64_t base = mix_seed(dataset_seed, kDatasetSeedTag);
  // Train seeds have even offset, test seeds odd: the two sets can never
  // collide for the same dataset seed.
  return base ^ (static_cast<std::uint64_t>(index) * 2 +
                 static_cast<std::uint64_t>(split));
}

void check_spec(const Environment& env, const DatasetSpec& spec) {
  if (spec.train_count < 0 || spec.test_count < 1) {
    throw ConfigError("dataset spec: train_count must be >= 0 and test_count >= 1");
  }
  const int cells = env.num_locations() * kNumActivities;
  if (spec.test_count % cells != 0) {
    throw ConfigError("dataset spec: test_count " + std::to_string(spec.test_count) +
                      " does not divide into " + std::to_string(cells) +
                      " balanced (location, activity) cells");
  }
}

}  // namespace

std::vector<SampleAssignment> train_assignments(const Environment& env,
                                                const DatasetSpec& spec) {
  check_spec(env, spec);
  const int n_loc = env.num_locations();
  std::vector<SampleAssignment> out;
  out.reserve(static_cast<std::size_t>(spec.train_count));
  for (int i = 0; i < spec.train_count; ++i) {
    SampleAssignment a;
    a.location = i % n_loc + 1;
    a.activity = static_cast<Activity>((i / n_loc) % kNumActivities);
    a.seed = split_sample_seed(spec.seed, 0, static_cast<std::size_t>(i));
    out.push_back(a);
  }
  return out;
}

std::vector<SampleAssignment> test_assignments(const Environment& env,
                                               const DatasetSpec& spec) {
  check_spec(env, spec);
  const int n_loc = env.num_locations();
  const int per_cell = spec.test_count / (n_loc * kNumActivities);
  std::vector<SampleAssignment> out;
  out.reserve(static_cast<std::size_t>(spec.test_count));
  std::size_t i = 0;
  for (int loc = 1; loc <= n_loc; ++loc) {
    for (int act = 0; act < kNumActivities; ++act) {
      for (int k = 0; k < per_cell; ++k, ++i) {
        SampleAssignment a;
        a.location = loc;
        a.activity = static_cast<Activity>(act);
        a.seed = split_sample_seed(spec.seed, 1, i);
        out.push_back(a);
      }
    }
  }
  return out;
}

Dataset generate_dataset(const Environment& env, const DatasetSpec& spec,
                         int threads) {
  const auto train_plan = train_assignments(env, spec);
  const auto test_plan = test_assignments(env, spec);

  Dataset ds;
  ds.train.resize(train_plan.size());
  ds.test.resize(test_plan.size());

  auto fill = [&](const std::vector<SampleAssignment>& plan,
                  std::vector<CsiSample>& dst) {
    parallel_for(plan.size(), static_cast<std::size_t>(threads), [&](std::size_t i) {
      const SampleAssignment& a = plan[i];
      dst[i] = generate_sample(env, ActivityProfile::get(a.activity), a.location,
                               a.seed);
    });
  };
  fill(train_plan, ds.train);
  fill(test_plan, ds.test);
  return ds;
}

}  // namespace linksense::sim
