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

// Binary containers for token-level hidden states (XEMB) and pooled sentence
// matrices (XMAT).
//
// XEMB layout, little-endian:
//   magic "XEMB" | version u32 = 1 | dtype u32 (0 = f32) | hidden_dim u32 |
//   num_sentences u64 | total_tokens u64 |
//   offsets (num_sentences + 1) x u64 |
//   data total_tokens x hidden_dim x f32, row-major
//
// XMAT layout, little-endian:
//   magic "XMAT" | version u32 = 1 | dtype u32 (0 = f32) | rows u64 |
//   cols u32 | pooling u8 (0 = cls, 1 = first_token, 2 = mean) |
//   reserved 3 x u8 = 0 | data rows x cols x f32, row-major
//
// Files must have exactly the declared length. Every value must be finite.

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xsim/error.hpp"

namespace xsim {

using RowMatrixF =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class PoolingKind : std::uint8_t { kCls = 0, kFirstToken = 1, kMean = 2 };

std::string_view to_string(PoolingKind kind);
// Accepts "cls", "first_token" and "mean". Throws ValidationError otherwise.
PoolingKind parse_pooling_kind(std::string_view name);

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint32_t kDtypeF32 = 0;
inline constexpr std::size_t kXembHeaderSize = 32;
inline constexpr std::size_t kXmatHeaderSize = 28;

// Ragged token vectors of every sentence for one (language, layer).
struct TokenEmbeddingSet {
  std::string language;
  int layer = 0;
  std::uint32_t hidden_dim = 0;
  // offsets[i]..offsets[i+1] indexes the tokens of sentence i.
  std::vector<std::uint64_t> offsets;
  // total_tokens x hidden_dim, row-major.
  std::vector<float> data;

  std::uint64_t num_sentences() const {
    return offsets.empty() ? 0 : offsets.size() - 1;
  }
  std::uint64_t total_tokens() const {
    return offsets.empty() ? 0 : offsets.back();
  }
  std::uint64_t sentence_length(std::size_t i) const {
    return offsets[i + 1] - offsets[i];
  }
  std::span<const float> token(std::size_t t) const {
    return {data.data() + t * hidden_dim, hidden_dim};
  }

  // Throws FormatError when an invariant is broken.
  void validate() const;

  friend bool operator==(const TokenEmbeddingSet&,
                         const TokenEmbeddingSet&) = default;
};

// N x D pooled sentence representations; row i is sentence i of the aligned
// corpus.
struct SentenceMatrix {
  std::string language;
  int layer = 0;
  PoolingKind pooling = PoolingKind::kMean;
  RowMatrixF values;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  Eigen::MatrixXd to_f64() const { return values.cast<double>(); }

  void validate() const;

  friend bool operator==(const SentenceMatrix& a, const SentenceMatrix& b) {
    return a.language == b.language && a.layer == b.layer &&
           a.pooling == b.pooling && a.values.rows() == b.values.rows() &&
           a.values.cols() == b.values.cols() && a.values == b.values;
  }
};

// Header of an XEMB file; cheap to read for manifest validation.
struct XembHeader {
  std::uint32_t hidden_dim = 0;
  std::uint64_t num_sentences = 0;
  std::uint64_t total_tokens = 0;
};

// Serialization to and from memory. The file functions below wrap these.
std::string encode_token_embeddings(const TokenEmbeddingSet& set);
TokenEmbeddingSet decode_token_embeddings(std::span<const char> bytes);
std::string encode_matrix(const SentenceMatrix& matrix);
SentenceMatrix decode_matrix(std::span<const char> bytes);

void write_token_embeddings(const TokenEmbeddingSet& set,
                            const std::filesystem::path& path);
// The language and layer of the returned set are left empty/zero; the
// caller (usually the manifest loader) knows them.
TokenEmbeddingSet read_token_embeddings(const std::filesystem::path& path);
XembHeader read_token_header(const std::filesystem::path& path);

void write_matrix(const SentenceMatrix& matrix,
                  const std::filesystem::path& path);
SentenceMatrix read_matrix(const std::filesystem::path& path);

}  // namespace xsim
