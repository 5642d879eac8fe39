// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "linksense/nn/tensor.hpp"

namespace linksense::nn {

// "CKP1" checkpoint: <stem>.json manifest (tensor name -> shape, dtype,
// byte offset into the blob) plus <stem>.bin with raw little-endian float32
// data. Round-trips are bit-exact.
void save_checkpoint(const std::filesystem::path& stem,
                     const std::vector<Param<float>*>& params);

// Loads by name into an already-built parameter set; every parameter must
// be present with a matching shape.
void load_checkpoint(const std::filesystem::path& stem,
                     const std::vector<Param<float>*>& params);

// Fingerprint of the blob bytes (manifest order), for determinism checks.
std::uint64_t checkpoint_hash(const std::filesystem::path& stem);

}  // namespace linksense::nn
