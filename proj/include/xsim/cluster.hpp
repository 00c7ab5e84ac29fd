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

// Agglomerative clustering of languages from a pairwise similarity matrix,
// with Newick export.

#include <Eigen/Core>
#include <string>
#include <string_view>
#include <vector>

#include "xsim/analysis.hpp"

namespace xsim {

enum class Linkage { kAverage, kComplete, kSingle };

std::string_view to_string(Linkage linkage);
Linkage parse_linkage(std::string_view name);

// Leaves are nodes 0..L-1; merge k creates node L+k. `left` is the child
// whose smallest leaf index is lower.
struct Merge {
  int left = 0;
  int right = 0;
  double height = 0.0;
  int size = 0;
};

struct Dendrogram {
  std::vector<std::string> leaves;
  std::vector<Merge> merges;
  Linkage linkage = Linkage::kAverage;
};

// Clusters an L x L symmetric distance matrix. At every step the closest
// pair of clusters merges; exact ties go to the pair whose smallest leaf
// indices are lexicographically smallest. Throws ValidationError when the
// matrix is not square, not symmetric within `tol`, non-finite or negative.
Dendrogram cluster_distances(const std::vector<std::string>& leaves,
                             const Eigen::MatrixXd& distances,
                             Linkage linkage = Linkage::kAverage,
                             double tol = 1e-8);

// Distance 1 - similarity, then cluster_distances.
Dendrogram agglomerative_cluster(const PairwiseMatrix& matrix,
                                 Linkage linkage = Linkage::kAverage);

// Height of the merge that first joins leaves i and j.
Eigen::MatrixXd cophenetic(const Dendrogram& tree);

// Leaf sets of the `k` clusters obtained by undoing the last k-1 merges,
// each sorted, ordered by smallest leaf.
std::vector<std::vector<int>> cut_tree(const Dendrogram& tree, int k);

// Newick with branch length = parent height - child height.
std::string to_newick(const Dendrogram& tree);

struct NewickNode {
  std::string name;
  double length = 0.0;
  std::vector<NewickNode> children;
};

// Minimal reader for the subset to_newick produces (plus quoted labels).
NewickNode parse_newick(std::string_view text);

// Leaf-name sets of every internal node, each sorted.
std::vector<std::vector<std::string>> newick_clades(const NewickNode& root);

}  // namespace xsim
