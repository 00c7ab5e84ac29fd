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

// Experiment drivers: per-layer similarity profiles, the translation
// matching probe, all-pairs language matrices and per-layer boxplot
// summaries.

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "xsim/manifest.hpp"
#include "xsim/pooling.hpp"
#include "xsim/simindex.hpp"

namespace xsim {

// (source, target). The source is the reference view of asymmetric indexes.
struct LanguagePair {
  std::string source;
  std::string target;
};

struct ProfileOptions {
  // Empty means every layer of the manifest.
  std::vector<int> layers;
  // Cosine only: compare against a seeded derangement of the target rows.
  bool permuted_target = false;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct LayerProfile {
  LanguagePair pair;
  IndexSpec index;
  PoolingStrategy pooling;
  bool permuted_target = false;
  std::vector<int> layers;
  std::vector<double> scores;
};

LayerProfile layer_profile(const DatasetManifest& manifest,
                           const LanguagePair& pair, const IndexSpec& index,
                           const PoolingStrategy& pooling,
                           const ProfileOptions& options = {});

enum class MatchMetric { kCosine, kEuclidean };

std::string_view to_string(MatchMetric metric);
MatchMetric parse_match_metric(std::string_view name);

struct MatchResult {
  double accuracy = 0.0;
  // best[i] is the row of Y closest to row i of X; ties go to the smallest
  // index.
  std::vector<std::size_t> best;
};

// Exact nearest-neighbour search of every row of X among the rows of Y.
MatchResult match_sentences(const Eigen::MatrixXd& x,
                            const Eigen::MatrixXd& y,
                            MatchMetric metric = MatchMetric::kCosine);
double matching_accuracy(const SentenceMatrix& x, const SentenceMatrix& y,
                         MatchMetric metric = MatchMetric::kCosine);

// Accuracy of the matching probe at each selected layer.
std::vector<double> matching_profile(const DatasetManifest& manifest,
                                     const LanguagePair& pair,
                                     const PoolingStrategy& pooling,
                                     MatchMetric metric,
                                     const std::vector<int>& layers,
                                     unsigned jobs = 1);

struct PairwiseMatrix {
  int layer = 0;
  IndexSpec index;
  PoolingStrategy pooling;
  std::vector<std::string> languages;
  // values(i, j) = index(languages[i], languages[j]); row i is the
  // reference view for asymmetric indexes.
  Eigen::MatrixXd values;

  std::size_t num_pairs() const {
    return languages.size() * (languages.size() - 1) / 2;
  }
};

// Scores every pair of the given pooled matrices (all with the same row
// count). Symmetric indexes compute the L(L-1)/2 upper-triangle scores and
// mirror them; asymmetric ones compute both directions. The diagonal holds
// the self-similarity 1.
PairwiseMatrix pairwise_from_matrices(
    const std::vector<SentenceMatrix>& matrices, const IndexSpec& index,
    unsigned jobs = 1);

PairwiseMatrix pairwise_matrix(const DatasetManifest& manifest, int layer,
                               const IndexSpec& index,
                               const PoolingStrategy& pooling,
                               unsigned jobs = 1);

struct PairScore {
  std::string first;
  std::string second;
  double score = 0.0;
};

// Boxplot statistics of one layer's pair scores. Quartiles use linear
// interpolation between order statistics; whiskers extend to the most
// extreme scores within 1.5 IQR of the box. Pairs below the lower whisker
// are outliers.
struct LayerSummary {
  int layer = 0;
  std::size_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double lower_whisker = 0.0;
  double upper_whisker = 0.0;
  std::vector<PairScore> outliers;
};

LayerSummary summarize_scores(int layer, const std::vector<PairScore>& pairs);

// Upper-triangle pairs of a matrix, in row-major order.
std::vector<PairScore> pair_scores(const PairwiseMatrix& matrix);

struct SummaryReport {
  IndexSpec index;
  PoolingStrategy pooling;
  std::vector<LayerSummary> layers;
  // Layer with the highest median pair score.
  int best_layer = 0;
};

SummaryReport layer_summary(const DatasetManifest& manifest,
                            const IndexSpec& index,
                            const PoolingStrategy& pooling,
                            const std::vector<int>& layers = {},
                            unsigned jobs = 1);

// Validates a layer selection against the manifest; empty selects all.
std::vector<int> resolve_layers(const DatasetManifest& manifest,
                                const std::vector<int>& layers);

}  // namespace xsim
