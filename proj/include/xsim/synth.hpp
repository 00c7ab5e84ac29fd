// Copyright 2026 The xsim Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Synthetic aligned datasets for tests, benchmarks and demos.
//
// Every sentence i has a latent meaning vector z_i. At layer k, language l
// represents it as
//   r_{l,k,i} = a_k * z_i + (1 - a_k) * (mu_l + e_{l,k,i})
// where mu_l is a per-language offset and e is language-specific noise;
// a_k rises from `alignment_start` at layer 0 to `alignment_peak` in the
// middle layer and falls back. Each token of the sentence is r plus
// isotropic token noise.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "xsim/manifest.hpp"

namespace xsim {

struct SynthConfig {
  std::string dataset_id = "synthetic";
  std::vector<std::string> languages = {"en", "et"};
  int num_layers = 3;
  std::uint64_t num_sentences = 100;
  std::uint32_t hidden_dim = 16;
  int min_tokens = 2;
  int max_tokens = 6;
  double alignment_start = 0.3;
  double alignment_peak = 0.9;
  double token_noise = 0.1;
  std::uint64_t seed = 0;
};

// Writes <dir>/<lang>/layer_NN.xemb and <dir>/manifest.json.
DatasetManifest write_synthetic_dataset(const SynthConfig& config,
                                        const std::filesystem::path& dir);

}  // namespace xsim
