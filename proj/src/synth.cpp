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

#include "xsim/synth.hpp"

#include <cmath>
#include <random>

#include "xsim/error.hpp"

namespace xsim {

namespace fs = std::filesystem;

DatasetManifest write_synthetic_dataset(const SynthConfig& config,
                                        const fs::path& dir) {
  if (config.languages.empty() || config.num_layers < 1 ||
      config.num_sentences == 0 || config.hidden_dim == 0 ||
      config.min_tokens < 1 || config.max_tokens < config.min_tokens) {
    throw ValidationError("invalid synthetic dataset configuration");
  }
  const std::size_t n = config.num_sentences;
  const std::size_t dim = config.hidden_dim;

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> length(config.min_tokens,
                                            config.max_tokens);

  std::vector<double> latent(n * dim);
  for (auto& v : latent) v = normal(rng);

  DatasetManifest manifest;
  manifest.dataset_id = config.dataset_id;
  manifest.model_name = "synthetic";
  manifest.languages = config.languages;
  manifest.num_layers = config.num_layers;
  manifest.hidden_dim = config.hidden_dim;
  manifest.num_sentences = n;
  manifest.root = dir;

  const int mid = config.num_layers / 2;
  for (const auto& lang : config.languages) {
    std::vector<double> offset(dim);
    for (auto& v : offset) v = normal(rng);

    std::vector<std::uint64_t> offsets(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      offsets[i + 1] = offsets[i] + static_cast<std::uint64_t>(length(rng));
    }

    fs::create_directories(dir / lang);
    auto& paths = manifest.files[lang];
    for (int layer = 0; layer < config.num_layers; ++layer) {
      const double t =
          mid == 0 ? 1.0
                   : 1.0 - std::abs(static_cast<double>(layer - mid)) / mid;
      const double a = config.alignment_start +
                       (config.alignment_peak - config.alignment_start) * t;

      TokenEmbeddingSet set;
      set.language = lang;
      set.layer = layer;
      set.hidden_dim = config.hidden_dim;
      set.offsets = offsets;
      set.data.resize(offsets.back() * dim);
      std::vector<double> rep(dim);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
          rep[d] = a * latent[i * dim + d] +
                   (1.0 - a) * (offset[d] + normal(rng));
        }
        for (std::uint64_t tok = offsets[i]; tok < offsets[i + 1]; ++tok) {
          float* out = set.data.data() + tok * dim;
          for (std::size_t d = 0; d < dim; ++d) {
            out[d] =
                static_cast<float>(rep[d] + config.token_noise * normal(rng));
          }
        }
      }
      const std::string rel = default_layer_file(lang, layer);
      write_token_embeddings(set, dir / rel);
      paths.push_back(rel);
    }
  }
  save_manifest(manifest, dir);
  return manifest;
}

}  // namespace xsim
