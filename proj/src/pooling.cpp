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

#include "xsim/pooling.hpp"

#include <string>
#include <vector>

namespace xsim {

namespace {

[[noreturn]] void too_short(std::size_t sentence, std::uint64_t tokens,
                            PoolingKind kind, std::uint64_t needed) {
  throw ValidationError("sentence " + std::to_string(sentence) + " has " +
                        std::to_string(tokens) +
                        (tokens == 1 ? " token" : " tokens") + "; " +
                        std::string(to_string(kind)) + " pooling needs " +
                        std::to_string(needed));
}

}  // namespace

SentenceMatrix pool(const TokenEmbeddingSet& set,
                    const PoolingStrategy& strategy) {
  set.validate();
  const std::size_t n = set.num_sentences();
  const std::size_t dim = set.hidden_dim;

  SentenceMatrix out;
  out.language = set.language;
  out.layer = set.layer;
  out.pooling = strategy.kind;
  out.values.resize(static_cast<Eigen::Index>(n),
                    static_cast<Eigen::Index>(dim));

  const bool exclude =
      strategy.kind == PoolingKind::kMean && strategy.mean_excludes_special;
  const std::uint64_t needed = strategy.kind == PoolingKind::kFirstToken ? 2
                               : exclude                                  ? 3
                                                                          : 1;

  std::vector<double> acc(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t len = set.sentence_length(i);
    if (len < needed) too_short(i, len, strategy.kind, needed);
    float* row = out.values.row(static_cast<Eigen::Index>(i)).data();
    const std::uint64_t first = set.offsets[i];

    switch (strategy.kind) {
      case PoolingKind::kCls:
      case PoolingKind::kFirstToken: {
        const auto pos = strategy.kind == PoolingKind::kCls ? 0 : 1;
        const auto tok = set.token(first + pos);
        std::copy(tok.begin(), tok.end(), row);
        break;
      }
      case PoolingKind::kMean: {
        const std::uint64_t begin = first + (exclude ? 1 : 0);
        const std::uint64_t end = set.offsets[i + 1] - (exclude ? 1 : 0);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::uint64_t t = begin; t < end; ++t) {
          const auto tok = set.token(t);
          for (std::size_t d = 0; d < dim; ++d) acc[d] += tok[d];
        }
        const double count = static_cast<double>(end - begin);
        for (std::size_t d = 0; d < dim; ++d) {
          row[d] = static_cast<float>(acc[d] / count);
        }
        break;
      }
    }
  }
  return out;
}

}  // namespace xsim
