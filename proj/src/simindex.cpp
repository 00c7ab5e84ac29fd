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

#include "xsim/simindex.hpp"

#include <Eigen/Householder>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "xsim/error.hpp"

namespace xsim {

std::string_view to_string(IndexKind kind) {
  switch (kind) {
    case IndexKind::kCca: return "cca";
    case IndexKind::kSvcca: return "svcca";
    case IndexKind::kPwcca: return "pwcca";
    case IndexKind::kCka: return "cka";
    case IndexKind::kCosine: return "cosine";
  }
  return "unknown";
}

IndexKind parse_index_kind(std::string_view name) {
  if (name == "cca") return IndexKind::kCca;
  if (name == "svcca") return IndexKind::kSvcca;
  if (name == "pwcca") return IndexKind::kPwcca;
  if (name == "cka") return IndexKind::kCka;
  if (name == "cosine") return IndexKind::kCosine;
  throw ValidationError("unknown index '" + std::string(name) +
                        "' (expected cca, svcca, pwcca, cka or cosine)");
}

std::string_view to_string(PwccaReference ref) {
  return ref == PwccaReference::kFirstArgument ? "first_argument"
                                               : "symmetric_mean";
}

PwccaReference parse_pwcca_reference(std::string_view name) {
  if (name == "first_argument" || name == "first") {
    return PwccaReference::kFirstArgument;
  }
  if (name == "symmetric_mean" || name == "symmetric") {
    return PwccaReference::kSymmetricMean;
  }
  throw ValidationError("unknown PWCCA reference '" + std::string(name) +
                        "' (expected first_argument or symmetric_mean)");
}

void IndexSpec::validate() const {
  if (svcca_components < 1) {
    throw ValidationError("svcca components must be >= 1");
  }
  if (!(rank_tolerance > 0.0) || !std::isfinite(rank_tolerance)) {
    throw ValidationError("rank tolerance must be positive");
  }
  if (!(regularization >= 0.0) || !std::isfinite(regularization)) {
    throw ValidationError("regularization must be >= 0");
  }
}

bool IndexSpec::symmetric() const {
  return kind != IndexKind::kPwcca ||
         pwcca_reference == PwccaReference::kSymmetricMean;
}

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kEps = std::numeric_limits<double>::epsilon();

MatrixXd centered(const MatrixXd& x) {
  return x.rowwise() - x.colwise().mean();
}

void require_rows(const MatrixXd& x, Index min_rows) {
  if (x.rows() < min_rows) {
    throw ValidationError("need at least " + std::to_string(min_rows) +
                          " rows, got " + std::to_string(x.rows()));
  }
  if (x.cols() < 1) throw ValidationError("matrix has no columns");
}

// Centering leaves round-off of order eps * |x| in a constant column, so a
// view counts as zero-variance when what remains is at that level.
void require_variance(double centered_norm, double raw_norm) {
  if (!(centered_norm > 64.0 * kEps * raw_norm)) {
    throw ValidationError("zero-variance view: every column is constant");
  }
}

struct ThinSvd {
  MatrixXd u;
  VectorXd s;
  MatrixXd v;
};

// Thin SVD of a tall or wide matrix via a Householder QR of its long side
// followed by a divide-and-conquer SVD of the small triangular factor.
// Only the leading `keep(s)` singular triplets are materialized.
template <typename KeepFn>
ThinSvd thin_svd(const MatrixXd& a, KeepFn&& keep) {
  const Index n = a.rows();
  const Index d = a.cols();
  ThinSvd out;
  if (n >= d) {
    Eigen::HouseholderQR<MatrixXd> qr(a);
    MatrixXd r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
    Eigen::BDCSVD<MatrixXd> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index k = keep(svd.singularValues());
    out.s = svd.singularValues().head(k);
    out.v = svd.matrixV().leftCols(k);
    MatrixXd padded = MatrixXd::Zero(n, k);
    padded.topRows(d) = svd.matrixU().leftCols(k);
    out.u = qr.householderQ() * padded;
  } else {
    // a^T = Q R  =>  a = R^T Q^T = U S (Q W)^T with R^T = U S W^T.
    Eigen::HouseholderQR<MatrixXd> qr(a.transpose());
    MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    MatrixXd rt = r.transpose();
    Eigen::BDCSVD<MatrixXd> svd(rt, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Index k = keep(svd.singularValues());
    out.s = svd.singularValues().head(k);
    out.u = svd.matrixU().leftCols(k);
    MatrixXd padded = MatrixXd::Zero(d, k);
    padded.topRows(n) = svd.matrixV().leftCols(k);
    out.v = qr.householderQ() * padded;
  }
  return out;
}

void prepare_cca_family(const MatrixXd& x, const IndexSpec& spec,
                        std::vector<std::string>& warnings, MatrixXd& basis,
                        VectorXd& singular, VectorXd& scale,
                        MatrixXd& right) {
  require_rows(x, 2);
  const MatrixXd xc = centered(x);
  require_variance(xc.norm(), x.norm());
  if (x.rows() < x.cols()) {
    warnings.push_back("fewer rows (" + std::to_string(x.rows()) +
                       ") than columns (" + std::to_string(x.cols()) +
                       "); canonical correlations may be degenerate");
  }
  const bool truncate = spec.kind == IndexKind::kSvcca;
  ThinSvd svd = thin_svd(xc, [&](const VectorXd& s) -> Index {
    const double cutoff = spec.rank_tolerance * s(0);
    Index rank = 0;
    while (rank < s.size() && s(rank) > cutoff) ++rank;
    if (truncate && spec.svcca_components > rank) {
      warnings.push_back("svcca components " +
                         std::to_string(spec.svcca_components) +
                         " exceed effective rank " + std::to_string(rank) +
                         "; clamped");
    }
    return truncate ? std::min<Index>(rank, spec.svcca_components) : rank;
  });
  if (svd.s.size() == 0) {
    throw ValidationError("zero-variance view: every column is constant");
  }
  scale = VectorXd::Ones(svd.s.size());
  if (spec.regularization > 0.0) {
    const double ridge =
        spec.regularization * static_cast<double>(x.rows() - 1);
    for (Index i = 0; i < scale.size(); ++i) {
      scale(i) = svd.s(i) / std::sqrt(svd.s(i) * svd.s(i) + ridge);
    }
    basis = svd.u * scale.asDiagonal();
  } else {
    basis = std::move(svd.u);
  }
  singular = std::move(svd.s);
  right = std::move(svd.v);
}

// Projection weights of one view: for each canonical direction
// h_i = W g_i / |g_i| (g_i = scale .* coef_i), sum_j |<h_i, x_j>| over the
// view's centered columns x_j = U S V^T e_j.
VectorXd projection_weights(const VectorXd& singular, const VectorXd& scale,
                            const MatrixXd& right, const MatrixXd& coef) {
  const MatrixXd g = scale.asDiagonal() * coef;
  const MatrixXd proj = right * (singular.asDiagonal() * g);
  VectorXd w(coef.cols());
  for (Index i = 0; i < coef.cols(); ++i) {
    w(i) = proj.col(i).cwiseAbs().sum() / g.col(i).norm();
  }
  return w / w.sum();
}

double frobenius_of_gram(const MatrixXd& xc) {
  // ||Xc^T Xc||_F == ||Xc Xc^T||_F; build the smaller one.
  const bool by_cols = xc.cols() <= xc.rows();
  const Index m = by_cols ? xc.cols() : xc.rows();
  MatrixXd gram = MatrixXd::Zero(m, m);
  if (by_cols) {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(xc.transpose());
  } else {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(xc);
  }
  double diag = 0.0;
  double off = 0.0;
  for (Index j = 0; j < m; ++j) {
    diag += gram(j, j) * gram(j, j);
    for (Index i = j + 1; i < m; ++i) off += gram(i, j) * gram(i, j);
  }
  return std::sqrt(diag + 2.0 * off);
}

MatrixXd row_normalized(const MatrixXd& x, const char* which) {
  MatrixXd out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const double norm = x.row(i).norm();
    if (norm == 0.0) {
      throw ValidationError(std::string(which) + " row " + std::to_string(i) +
                            " has zero norm");
    }
    out.row(i) = x.row(i) / norm;
  }
  return out;
}

void require_same_rows(Index a, Index b) {
  if (a != b) {
    throw ValidationError("row count mismatch: " + std::to_string(a) +
                          " vs " + std::to_string(b));
  }
}

void require_same_shape(const MatrixXd& x, const MatrixXd& y) {
  require_same_rows(x.rows(), y.rows());
  if (x.cols() != y.cols()) {
    throw ValidationError("column count mismatch: " +
                          std::to_string(x.cols()) + " vs " +
                          std::to_string(y.cols()));
  }
}

double mean_rowwise_dot(const MatrixXd& a, const MatrixXd& b,
                        const std::vector<std::size_t>* perm) {
  double sum = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    const Index j = perm ? static_cast<Index>((*perm)[i]) : i;
    sum += a.row(i).dot(b.row(j));
  }
  return sum / static_cast<double>(a.rows());
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

}  // namespace

PreparedView prepare(const MatrixXd& x, const IndexSpec& spec) {
  spec.validate();
  PreparedView view;
  view.kind_ = spec.kind;
  view.rows_ = x.rows();
  view.cols_ = x.cols();
  if (!x.allFinite()) throw ValidationError("matrix has non-finite values");
  switch (spec.kind) {
    case IndexKind::kCca:
    case IndexKind::kSvcca:
    case IndexKind::kPwcca:
      prepare_cca_family(x, spec, view.warnings_, view.basis_, view.singular_,
                         view.scale_, view.right_);
      break;
    case IndexKind::kCka: {
      require_rows(x, 2);
      view.data_ = centered(x);
      require_variance(view.data_.norm(), x.norm());
      view.self_norm_ = frobenius_of_gram(view.data_);
      break;
    }
    case IndexKind::kCosine:
      require_rows(x, 1);
      view.data_ = row_normalized(x, "input");
      break;
  }
  return view;
}

SimilarityScore score(const PreparedView& x, const PreparedView& y,
                      const IndexSpec& spec) {
  if (x.kind_ != spec.kind || y.kind_ != spec.kind) {
    throw ValidationError("prepared views do not match the index spec");
  }
  require_same_rows(x.rows_, y.rows_);
  SimilarityScore out;
  out.kind = spec.kind;
  out.warnings = x.warnings_;
  out.warnings.insert(out.warnings.end(), y.warnings_.begin(),
                      y.warnings_.end());

  switch (spec.kind) {
    case IndexKind::kCca:
    case IndexKind::kSvcca:
    case IndexKind::kPwcca: {
      const MatrixXd m = x.basis_.transpose() * y.basis_;
      const bool weighted = spec.kind == IndexKind::kPwcca;
      Eigen::BDCSVD<MatrixXd> svd(
          m, weighted ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0);
      const VectorXd rho_raw = svd.singularValues();
      const Index p = rho_raw.size();

      CcaResult res;
      res.rank_x = static_cast<int>(x.basis_.cols());
      res.rank_y = static_cast<int>(y.basis_.cols());
      res.correlations.resize(static_cast<std::size_t>(p));
      for (Index i = 0; i < p; ++i) {
        res.correlations[i] = std::clamp(rho_raw(i), 0.0, 1.0);
      }
      if (weighted) {
        VectorXd w = projection_weights(x.singular_, x.scale_, x.right_,
                                        svd.matrixU().leftCols(p));
        if (spec.pwcca_reference == PwccaReference::kSymmetricMean) {
          w = 0.5 * (w + projection_weights(y.singular_, y.scale_, y.right_,
                                            svd.matrixV().leftCols(p)));
        }
        res.weights.assign(w.data(), w.data() + p);
      } else {
        res.weights.assign(static_cast<std::size_t>(p),
                           1.0 / static_cast<double>(p));
      }
      double s = 0.0;
      for (Index i = 0; i < p; ++i) s += res.weights[i] * res.correlations[i];
      res.score = std::clamp(s, 0.0, 1.0);
      res.warnings = out.warnings;
      out.value = res.score;
      out.cca = std::move(res);
      break;
    }
    case IndexKind::kCka: {
      const double cross = (x.data_.transpose() * y.data_).squaredNorm();
      out.value = std::clamp(cross / (x.self_norm_ * y.self_norm_), 0.0, 1.0);
      break;
    }
    case IndexKind::kCosine:
      if (x.cols_ != y.cols_) {
        throw ValidationError("column count mismatch: " +
                              std::to_string(x.cols_) + " vs " +
                              std::to_string(y.cols_));
      }
      out.value = mean_rowwise_dot(x.data_, y.data_, nullptr);
      break;
  }
  return out;
}

SimilarityScore score(const MatrixXd& x, const MatrixXd& y,
                      const IndexSpec& spec) {
  require_same_rows(x.rows(), y.rows());
  if (spec.kind == IndexKind::kCosine) require_same_shape(x, y);
  return score(prepare(x, spec), prepare(y, spec), spec);
}

SimilarityScore score(const SentenceMatrix& x, const SentenceMatrix& y,
                      const IndexSpec& spec) {
  return score(x.to_f64(), y.to_f64(), spec);
}

namespace {

CcaResult run_cca_family(const MatrixXd& x, const MatrixXd& y,
                         IndexSpec spec, IndexKind kind) {
  spec.kind = kind;
  return *score(x, y, spec).cca;
}

}  // namespace

CcaResult cca(const MatrixXd& x, const MatrixXd& y, const IndexSpec& spec) {
  return run_cca_family(x, y, spec, IndexKind::kCca);
}

CcaResult svcca(const MatrixXd& x, const MatrixXd& y, const IndexSpec& spec) {
  return run_cca_family(x, y, spec, IndexKind::kSvcca);
}

CcaResult pwcca(const MatrixXd& x, const MatrixXd& y, const IndexSpec& spec) {
  return run_cca_family(x, y, spec, IndexKind::kPwcca);
}

double cka(const MatrixXd& x, const MatrixXd& y) {
  IndexSpec spec;
  spec.kind = IndexKind::kCka;
  return score(x, y, spec).value;
}

double cosine_parallel(const MatrixXd& x, const MatrixXd& y) {
  require_same_shape(x, y);
  require_rows(x, 1);
  return mean_rowwise_dot(row_normalized(x, "x"), row_normalized(y, "y"),
                          nullptr);
}

double cosine_permuted(const MatrixXd& x, const MatrixXd& y,
                       std::uint64_t seed) {
  require_same_shape(x, y);
  require_rows(x, 2);
  const auto perm = seeded_derangement(static_cast<std::size_t>(x.rows()), seed);
  return mean_rowwise_dot(row_normalized(x, "x"), row_normalized(y, "y"),
                          &perm);
}

std::vector<std::size_t> seeded_derangement(std::size_t n,
                                            std::uint64_t seed) {
  if (n < 2) throw ValidationError("a derangement needs at least 2 items");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> perm(n);
  for (int attempt = 0; attempt < 64; ++attempt) {
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(perm[i], perm[uniform_below(rng, i + 1)]);
    }
    bool fixed_point = false;
    for (std::size_t i = 0; i < n && !fixed_point; ++i) {
      fixed_point = perm[i] == i;
    }
    if (!fixed_point) return perm;
  }
  for (std::size_t i = 0; i < n; ++i) perm[i] = (i + 1) % n;
  return perm;
}

}  // namespace xsim
