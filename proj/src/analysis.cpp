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

#include "xsim/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "xsim/error.hpp"
#include "xsim/parallel.hpp"

namespace xsim {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

// Re-throws library errors with a context prefix, keeping their category.
template <typename Fn>
auto with_context(const std::string& ctx, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const FormatError& e) {
    throw FormatError(e.diag(), ctx + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(ctx + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(ctx + ": " + e.what());
  }
}

std::string layer_ctx(const std::string& a, const std::string& b, int layer) {
  return "(" + a + ", " + b + ") layer " + std::to_string(layer);
}

SentenceMatrix load_pooled(const DatasetManifest& manifest,
                           const std::string& lang, int layer,
                           const PoolingStrategy& pooling) {
  return with_context(lang + " layer " + std::to_string(layer), [&] {
    return pool(manifest.load(lang, layer), pooling);
  });
}

void require_language(const DatasetManifest& manifest,
                      const std::string& lang) {
  if (!manifest.has_language(lang)) {
    throw ValidationError("language '" + lang + "' is not in the manifest");
  }
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

std::vector<int> resolve_layers(const DatasetManifest& manifest,
                                const std::vector<int>& layers) {
  if (layers.empty()) {
    std::vector<int> all(static_cast<std::size_t>(manifest.num_layers));
    for (int l = 0; l < manifest.num_layers; ++l) all[l] = l;
    return all;
  }
  for (int l : layers) {
    if (l < 0 || l >= manifest.num_layers) {
      throw ValidationError("layer " + std::to_string(l) +
                            " out of range [0, " +
                            std::to_string(manifest.num_layers) + ")");
    }
  }
  return layers;
}

LayerProfile layer_profile(const DatasetManifest& manifest,
                           const LanguagePair& pair, const IndexSpec& index,
                           const PoolingStrategy& pooling,
                           const ProfileOptions& options) {
  index.validate();
  require_language(manifest, pair.source);
  require_language(manifest, pair.target);
  if (options.permuted_target && index.kind != IndexKind::kCosine) {
    throw ValidationError("a permuted target is only defined for cosine");
  }
  LayerProfile profile;
  profile.pair = pair;
  profile.index = index;
  profile.pooling = pooling;
  profile.permuted_target = options.permuted_target;
  profile.layers = resolve_layers(manifest, options.layers);
  profile.scores.assign(profile.layers.size(), 0.0);

  parallel_for(profile.layers.size(), options.jobs, [&](std::size_t k) {
    const int layer = profile.layers[k];
    const SentenceMatrix x =
        load_pooled(manifest, pair.source, layer, pooling);
    const SentenceMatrix y =
        load_pooled(manifest, pair.target, layer, pooling);
    profile.scores[k] =
        with_context(layer_ctx(pair.source, pair.target, layer), [&] {
          if (options.permuted_target) {
            return cosine_permuted(x.to_f64(), y.to_f64(), options.seed);
          }
          return score(x, y, index).value;
        });
  });
  return profile;
}

std::string_view to_string(MatchMetric metric) {
  return metric == MatchMetric::kCosine ? "cosine" : "euclidean";
}

MatchMetric parse_match_metric(std::string_view name) {
  if (name == "cosine") return MatchMetric::kCosine;
  if (name == "euclidean") return MatchMetric::kEuclidean;
  throw ValidationError("unknown metric '" + std::string(name) +
                        "' (expected cosine or euclidean)");
}

MatchResult match_sentences(const MatrixXd& x, const MatrixXd& y,
                            MatchMetric metric) {
  if (x.rows() != y.rows()) {
    throw ValidationError("row count mismatch: " + std::to_string(x.rows()) +
                          " vs " + std::to_string(y.rows()));
  }
  if (x.cols() != y.cols()) {
    throw ValidationError("column count mismatch: " +
                          std::to_string(x.cols()) + " vs " +
                          std::to_string(y.cols()));
  }
  if (x.rows() == 0) throw ValidationError("empty matrices");

  MatrixXd xs = x;
  MatrixXd ys = y;
  Eigen::VectorXd y_sq;
  if (metric == MatchMetric::kCosine) {
    for (Index i = 0; i < x.rows(); ++i) {
      const double nx = x.row(i).norm();
      const double ny = y.row(i).norm();
      if (nx == 0.0) {
        throw ValidationError("x row " + std::to_string(i) +
                              " has zero norm");
      }
      if (ny == 0.0) {
        throw ValidationError("y row " + std::to_string(i) +
                              " has zero norm");
      }
      xs.row(i) /= nx;
      ys.row(i) /= ny;
    }
  } else {
    y_sq = y.rowwise().squaredNorm();
  }

  const Index n = x.rows();
  constexpr Index kBlock = 256;
  MatchResult result;
  result.best.resize(static_cast<std::size_t>(n));
  std::size_t correct = 0;
  for (Index start = 0; start < n; start += kBlock) {
    const Index rows = std::min(kBlock, n - start);
    // Larger is closer: cosine, or -(|y|^2 - 2 x.y) for Euclidean.
    MatrixXd sim = xs.middleRows(start, rows) * ys.transpose();
    if (metric == MatchMetric::kEuclidean) {
      sim = (2.0 * sim).rowwise() - y_sq.transpose();
    }
    for (Index r = 0; r < rows; ++r) {
      Index best = 0;
      double best_val = sim(r, 0);
      for (Index j = 1; j < n; ++j) {
        if (sim(r, j) > best_val) {
          best_val = sim(r, j);
          best = j;
        }
      }
      result.best[static_cast<std::size_t>(start + r)] =
          static_cast<std::size_t>(best);
      if (best == start + r) ++correct;
    }
  }
  result.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  return result;
}

double matching_accuracy(const SentenceMatrix& x, const SentenceMatrix& y,
                         MatchMetric metric) {
  return match_sentences(x.to_f64(), y.to_f64(), metric).accuracy;
}

std::vector<double> matching_profile(const DatasetManifest& manifest,
                                     const LanguagePair& pair,
                                     const PoolingStrategy& pooling,
                                     MatchMetric metric,
                                     const std::vector<int>& layers,
                                     unsigned jobs) {
  require_language(manifest, pair.source);
  require_language(manifest, pair.target);
  const auto selected = resolve_layers(manifest, layers);
  std::vector<double> acc(selected.size());
  parallel_for(selected.size(), jobs, [&](std::size_t k) {
    const int layer = selected[k];
    const SentenceMatrix x =
        load_pooled(manifest, pair.source, layer, pooling);
    const SentenceMatrix y =
        load_pooled(manifest, pair.target, layer, pooling);
    acc[k] = with_context(layer_ctx(pair.source, pair.target, layer), [&] {
      return matching_accuracy(x, y, metric);
    });
  });
  return acc;
}

namespace {

// Shared pairwise driver: `prepare_one(i)` builds the view of language i.
template <typename PrepareFn>
PairwiseMatrix pairwise_impl(std::vector<std::string> languages, int layer,
                             const IndexSpec& index, unsigned jobs,
                             PrepareFn&& prepare_one) {
  index.validate();
  const std::size_t l = languages.size();
  if (l < 2) throw ValidationError("pairwise comparison needs >= 2 languages");

  std::vector<PreparedView> views(l);
  parallel_for(l, jobs, [&](std::size_t i) {
    views[i] = with_context(
        languages[i] + " layer " + std::to_string(layer),
        [&] { return prepare_one(i); });
  });
  for (std::size_t i = 1; i < l; ++i) {
    if (views[i].rows() != views[0].rows()) {
      throw ValidationError("languages " + languages[0] + " and " +
                            languages[i] + " have different row counts");
    }
  }

  struct Task {
    std::size_t i, j;
  };
  std::vector<Task> tasks;
  const bool symmetric = index.symmetric();
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      if (i == j || (symmetric && j < i)) continue;
      tasks.push_back({i, j});
    }
  }

  PairwiseMatrix out;
  out.layer = layer;
  out.index = index;
  out.languages = std::move(languages);
  out.values = MatrixXd::Identity(static_cast<Index>(l),
                                  static_cast<Index>(l));
  std::vector<double> results(tasks.size());
  parallel_for(tasks.size(), jobs, [&](std::size_t t) {
    const auto [i, j] = tasks[t];
    results[t] = with_context(
        layer_ctx(out.languages[i], out.languages[j], layer),
        [&] { return score(views[i], views[j], index).value; });
  });
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto i = static_cast<Index>(tasks[t].i);
    const auto j = static_cast<Index>(tasks[t].j);
    out.values(i, j) = results[t];
    if (symmetric) out.values(j, i) = results[t];
  }
  return out;
}

}  // namespace

PairwiseMatrix pairwise_from_matrices(
    const std::vector<SentenceMatrix>& matrices, const IndexSpec& index,
    unsigned jobs) {
  std::vector<std::string> languages;
  for (const auto& m : matrices) languages.push_back(m.language);
  PairwiseMatrix out = pairwise_impl(
      std::move(languages), matrices.empty() ? 0 : matrices.front().layer,
      index, jobs,
      [&](std::size_t i) { return prepare(matrices[i].to_f64(), index); });
  if (!matrices.empty()) out.pooling.kind = matrices.front().pooling;
  return out;
}

PairwiseMatrix pairwise_matrix(const DatasetManifest& manifest, int layer,
                               const IndexSpec& index,
                               const PoolingStrategy& pooling,
                               unsigned jobs) {
  resolve_layers(manifest, {layer});
  PairwiseMatrix out = pairwise_impl(
      manifest.languages, layer, index, jobs, [&](std::size_t i) {
        const SentenceMatrix m =
            pool(manifest.load(manifest.languages[i], layer), pooling);
        return prepare(m.to_f64(), index);
      });
  out.pooling = pooling;
  return out;
}

std::vector<PairScore> pair_scores(const PairwiseMatrix& matrix) {
  std::vector<PairScore> pairs;
  const std::size_t l = matrix.languages.size();
  pairs.reserve(l * (l - 1) / 2);
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = i + 1; j < l; ++j) {
      pairs.push_back({matrix.languages[i], matrix.languages[j],
                       matrix.values(static_cast<Index>(i),
                                     static_cast<Index>(j))});
    }
  }
  return pairs;
}

LayerSummary summarize_scores(int layer, const std::vector<PairScore>& pairs) {
  if (pairs.empty()) throw ValidationError("no pair scores to summarize");
  std::vector<double> v;
  v.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!std::isfinite(p.score)) {
      throw ValidationError("non-finite score for (" + p.first + ", " +
                            p.second + ")");
    }
    v.push_back(p.score);
  }
  std::sort(v.begin(), v.end());

  LayerSummary s;
  s.layer = layer;
  s.count = v.size();
  s.min = v.front();
  s.max = v.back();
  s.q1 = quantile_sorted(v, 0.25);
  s.median = quantile_sorted(v, 0.5);
  s.q3 = quantile_sorted(v, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.lower_whisker = *std::find_if(v.begin(), v.end(),
                                  [&](double x) { return x >= lo_fence; });
  s.upper_whisker = *std::find_if(v.rbegin(), v.rend(),
                                  [&](double x) { return x <= hi_fence; });
  for (const auto& p : pairs) {
    if (p.score < s.lower_whisker) s.outliers.push_back(p);
  }
  std::stable_sort(s.outliers.begin(), s.outliers.end(),
                   [](const PairScore& a, const PairScore& b) {
                     return a.score < b.score;
                   });
  return s;
}

SummaryReport layer_summary(const DatasetManifest& manifest,
                            const IndexSpec& index,
                            const PoolingStrategy& pooling,
                            const std::vector<int>& layers, unsigned jobs) {
  SummaryReport report;
  report.index = index;
  report.pooling = pooling;
  double best = -std::numeric_limits<double>::infinity();
  for (int layer : resolve_layers(manifest, layers)) {
    const PairwiseMatrix m =
        pairwise_matrix(manifest, layer, index, pooling, jobs);
    report.layers.push_back(summarize_scores(layer, pair_scores(m)));
    if (report.layers.back().median > best) {
      best = report.layers.back().median;
      report.best_layer = layer;
    }
  }
  return report;
}

}  // namespace xsim
