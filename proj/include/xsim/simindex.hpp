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

// Similarity indexes over pairs of row-aligned representation matrices
// (rows = sentences, columns = features): CCA, SVCCA, PWCCA, linear CKA and
// the cosine aggregates.
//
// All arithmetic is done in double precision. Each view is centered per
// column and reduced to an orthonormal basis of its column space with a thin
// SVD; singular values below rank_tolerance * sigma_max are dropped. The
// canonical correlations are the singular values of the product of the two
// bases.

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xsim/embstore.hpp"

namespace xsim {

enum class IndexKind { kCca, kSvcca, kPwcca, kCka, kCosine };

std::string_view to_string(IndexKind kind);
IndexKind parse_index_kind(std::string_view name);

// Which view's canonical directions weight the PWCCA coefficients.
enum class PwccaReference { kFirstArgument, kSymmetricMean };

std::string_view to_string(PwccaReference ref);
PwccaReference parse_pwcca_reference(std::string_view name);

struct IndexSpec {
  IndexKind kind = IndexKind::kCka;
  int svcca_components = 20;
  PwccaReference pwcca_reference = PwccaReference::kFirstArgument;
  double rank_tolerance = 1e-10;
  // Ridge added to the covariance eigenvalues during whitening.
  double regularization = 0.0;

  // Throws ValidationError.
  void validate() const;
  // Whether index(X, Y) == index(Y, X) by construction.
  bool symmetric() const;
};

struct CcaResult {
  // Canonical correlations, nonincreasing, each in [0, 1].
  std::vector<double> correlations;
  // Coefficient weights summing to 1: uniform for CCA/SVCCA, projection
  // weights for PWCCA (averaged over both views in symmetric mode).
  std::vector<double> weights;
  double score = 0.0;
  // Rank of each whitened view (after SVCCA truncation, if any).
  int rank_x = 0;
  int rank_y = 0;
  std::vector<std::string> warnings;
};

CcaResult cca(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
              const IndexSpec& spec = {});
CcaResult svcca(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                const IndexSpec& spec = {});
CcaResult pwcca(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                const IndexSpec& spec = {});

// Linear CKA with the biased HSIC estimator:
//   ||Yc^T Xc||_F^2 / (||Xc^T Xc||_F ||Yc^T Yc||_F)
double cka(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

// Mean over i of cos(x_i, y_i).
double cosine_parallel(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);
// Same, with y's rows shuffled by seeded_derangement(rows, seed).
double cosine_permuted(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                       std::uint64_t seed);

// Uniform permutation of [0, n) without fixed points, drawn from an
// mt19937_64 stream. Draws with fixed points are rejected; after 64
// rejections the cyclic shift i -> i + 1 is returned. Requires n >= 2.
std::vector<std::size_t> seeded_derangement(std::size_t n,
                                            std::uint64_t seed);

struct SimilarityScore {
  IndexKind kind = IndexKind::kCka;
  double value = 0.0;
  // Present for the CCA family.
  std::optional<CcaResult> cca;
  std::vector<std::string> warnings;
};

// Dispatches on spec.kind. kCosine is cosine_parallel.
SimilarityScore score(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                      const IndexSpec& spec);
SimilarityScore score(const SentenceMatrix& x, const SentenceMatrix& y,
                      const IndexSpec& spec);

// Per-view preprocessing (centering, whitening, normalization) computed once
// and reused across many pairs. score(prepare(x), prepare(y)) equals
// score(x, y) bit for bit.
class PreparedView {
 public:
  PreparedView() = default;

  IndexKind kind() const { return kind_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

 private:
  friend PreparedView prepare(const Eigen::MatrixXd& x,
                              const IndexSpec& spec);
  friend SimilarityScore score(const PreparedView& x, const PreparedView& y,
                               const IndexSpec& spec);

  IndexKind kind_ = IndexKind::kCka;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  // CCA family: whitened basis (rows x r), kept singular values and the
  // scale factors applied to the left singular vectors, plus the right
  // singular vectors (needed for projection weights).
  Eigen::MatrixXd basis_;
  Eigen::VectorXd singular_;
  Eigen::VectorXd scale_;
  Eigen::MatrixXd right_;
  // CKA: centered data and ||Xc^T Xc||_F. Cosine: row-normalized data.
  Eigen::MatrixXd data_;
  double self_norm_ = 0.0;
  std::vector<std::string> warnings_;
};

PreparedView prepare(const Eigen::MatrixXd& x, const IndexSpec& spec);
SimilarityScore score(const PreparedView& x, const PreparedView& y,
                      const IndexSpec& spec);

}  // namespace xsim
