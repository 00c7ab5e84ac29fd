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

#include "xsim/embstore.hpp"

namespace xsim {

struct PoolingStrategy {
  PoolingKind kind = PoolingKind::kMean;
  // Mean pooling only: drop the first and last token of every sentence
  // (the special tokens the extractor keeps at those positions).
  bool mean_excludes_special = false;
};

// Reduces every sentence of `set` to one row:
//   cls          token 0
//   first_token  token 1 (the first token after CLS)
//   mean         average over the sentence's tokens
// Throws ValidationError naming the first sentence that is too short.
SentenceMatrix pool(const TokenEmbeddingSet& set,
                    const PoolingStrategy& strategy);

}  // namespace xsim
