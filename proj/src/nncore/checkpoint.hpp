// Copyright 2026 The chanprune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "nncore/network.hpp"

namespace chanprune::nn {

// Little-endian container:
//   magic "CPCK" | u32 version | u64 template fingerprint | u32 tensor count
//   per tensor: u32 name length | name bytes | u32 rank | rank x u32 dims |
//               u64 element count | element count x f32
// Parameters come first in layer order, then batchnorm running statistics.
inline constexpr char kCheckpointMagic[4] = {'C', 'P', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(Network<float>& net);

// Throws FormatError on a damaged or foreign container (including a template
// fingerprint mismatch) and StructuralError when tensor shapes disagree.
void decode_checkpoint(Network<float>& net, std::string_view bytes);

void save_checkpoint(Network<float>& net, const std::filesystem::path& path);
void load_checkpoint(Network<float>& net, const std::filesystem::path& path);

}  // namespace chanprune::nn
