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

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "doctest.h"
#include "test_util.hpp"
#include "xsim/cluster.hpp"
#include "xsim/error.hpp"

namespace {

using Eigen::MatrixXd;
using xsim::Linkage;

constexpr Linkage kLinkages[] = {Linkage::kAverage, Linkage::kComplete,
                                 Linkage::kSingle};

std::vector<std::string> names(int l) {
  std::vector<std::string> out;
  for (int i = 0; i < l; ++i) out.push_back("n" + std::to_string(i));
  return out;
}

// Every assignment of L items to exactly 3 unlabeled nonempty blocks, as
// restricted growth strings.
std::vector<std::vector<int>> three_block_partitions(int l) {
  std::vector<std::vector<int>> out;
  std::vector<int> label(static_cast<std::size_t>(l), 0);
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (i == l) {
      if (used == 3) out.push_back(label);
      return;
    }
    for (int b = 0; b <= std::min(used, 2); ++b) {
      label[static_cast<std::size_t>(i)] = b;
      rec(i + 1, std::max(used, b + 1));
    }
  };
  rec(0, 0);
  return out;
}

std::vector<std::vector<int>> blocks_of(const std::vector<int>& label) {
  std::vector<std::vector<int>> out(3);
  for (std::size_t i = 0; i < label.size(); ++i) {
    out[static_cast<std::size_t>(label[i])].push_back(static_cast<int>(i));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Random ultrametric: merge random clusters at strictly increasing heights.
MatrixXd random_ultrametric(int l, std::mt19937_64& rng) {
  std::vector<std::vector<int>> clusters;
  for (int i = 0; i < l; ++i) clusters.push_back({i});
  MatrixXd d = MatrixXd::Zero(l, l);
  double height = 0.0;
  std::uniform_real_distribution<double> step(0.01, 0.2);
  while (clusters.size() > 1) {
    height += step(rng);
    std::uniform_int_distribution<std::size_t> pick(0, clusters.size() - 1);
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    for (int i : clusters[a]) {
      for (int j : clusters[b]) d(i, j) = d(j, i) = height;
    }
    clusters[a].insert(clusters[a].end(), clusters[b].begin(),
                       clusters[b].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(b));
  }
  return d;
}

MatrixXd random_distances(int l, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixXd d = MatrixXd::Zero(l, l);
  for (int i = 0; i < l; ++i) {
    for (int j = i + 1; j < l; ++j) d(i, j) = d(j, i) = u(rng);
  }
  return d;
}

}  // namespace

TEST_CASE("two languages merge once at their distance") {
  xsim::PairwiseMatrix m;
  m.languages = {"en", "et"};
  m.values = MatrixXd::Ones(2, 2);
  m.values(0, 1) = m.values(1, 0) = 0.8;
  const auto tree = xsim::agglomerative_cluster(m);
  REQUIRE(tree.merges.size() == 1);
  CHECK(tree.merges[0].left == 0);
  CHECK(tree.merges[0].right == 1);
  CHECK(tree.merges[0].size == 2);
  CHECK(tree.merges[0].height == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(tree.linkage == Linkage::kAverage);

  const auto parsed = xsim::parse_newick(xsim::to_newick(tree));
  REQUIRE(parsed.children.size() == 2);
  CHECK(parsed.children[0].name == "en");
  CHECK(parsed.children[1].name == "et");
  CHECK(parsed.children[0].length == tree.merges[0].height);
}

TEST_CASE("single leaf") {
  const auto tree = xsim::cluster_distances({"en"}, MatrixXd::Zero(1, 1));
  CHECK(tree.merges.empty());
  CHECK(xsim::to_newick(tree) == "en;");
}

TEST_CASE("planted three blocks are recovered for every partition, L <= 8") {
  int checked = 0;
  for (int l = 3; l <= 8; ++l) {
    for (const auto& label : three_block_partitions(l)) {
      MatrixXd d(l, l);
      for (int i = 0; i < l; ++i) {
        for (int j = 0; j < l; ++j) {
          d(i, j) = i == j ? 0.0 : (label[i] == label[j] ? 0.1 : 0.9);
        }
      }
      const auto want = blocks_of(label);
      for (Linkage linkage : kLinkages) {
        const auto tree = xsim::cluster_distances(names(l), d, linkage);
        REQUIRE(tree.merges.size() == static_cast<std::size_t>(l - 1));
        CHECK(xsim::cut_tree(tree, 3) == want);
        // The two top merges join blocks; everything below stays inside.
        for (int s = 0; s < l - 3; ++s) CHECK(tree.merges[s].height == 0.1);
        CHECK(tree.merges[l - 3].height == 0.9);
        CHECK(tree.merges[l - 2].height == 0.9);
        ++checked;
      }
    }
  }
  // Stirling numbers S(L, 3) for L = 3..8 sum to 1 + 6 + 25 + 90 + 301 + 966.
  CHECK(checked == 3 * 1389);
}

TEST_CASE("exact ultrametrics are reproduced") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    const int l = 2 + trial % 11;
    const MatrixXd d = random_ultrametric(l, rng);
    for (Linkage linkage : kLinkages) {
      const auto tree = xsim::cluster_distances(names(l), d, linkage);
      CHECK(xsim::cophenetic(tree) == d);
    }
  }
}

TEST_CASE("heights are nondecreasing on random matrices") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const int l = 2 + trial % 20;
    const MatrixXd d = random_distances(l, rng);
    for (Linkage linkage : kLinkages) {
      const auto tree = xsim::cluster_distances(names(l), d, linkage);
      REQUIRE(tree.merges.size() == static_cast<std::size_t>(l - 1));
      std::set<int> used;
      for (std::size_t s = 0; s < tree.merges.size(); ++s) {
        const auto& m = tree.merges[s];
        if (s > 0) CHECK(m.height >= tree.merges[s - 1].height);
        CHECK(m.left < l + static_cast<int>(s));
        CHECK(m.right < l + static_cast<int>(s));
        CHECK(used.insert(m.left).second);
        CHECK(used.insert(m.right).second);
      }
      CHECK(tree.merges.back().size == l);
    }
  }
}

TEST_CASE("linkage heights on a worked example") {
  // a-b 1, c joins: single min(2, 4) = 2, complete max = 4, average 3.
  MatrixXd d(3, 3);
  d << 0, 1, 2, 1, 0, 4, 2, 4, 0;
  CHECK(xsim::cluster_distances(names(3), d, Linkage::kSingle)
            .merges[1]
            .height == 2.0);
  CHECK(xsim::cluster_distances(names(3), d, Linkage::kComplete)
            .merges[1]
            .height == 4.0);
  CHECK(xsim::cluster_distances(names(3), d, Linkage::kAverage)
            .merges[1]
            .height == 3.0);

  // Average is size-weighted: ((a,b),c) then d at (1 + 2 + 6) / 3.
  MatrixXd e(4, 4);
  e << 0, 0.5, 1, 1, 0.5, 0, 1, 2, 1, 1, 0, 6, 1, 2, 6, 0;
  const auto tree = xsim::cluster_distances(names(4), e, Linkage::kAverage);
  CHECK(tree.merges[1].height == 1.0);
  CHECK(tree.merges[2].height == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("ties merge the lexicographically smallest pair") {
  const MatrixXd d = MatrixXd::Ones(4, 4) - MatrixXd::Identity(4, 4);
  const auto tree = xsim::cluster_distances(names(4), d, Linkage::kAverage);
  CHECK(tree.merges[0].left == 0);
  CHECK(tree.merges[0].right == 1);
  CHECK(tree.merges[1].left == 4);
  CHECK(tree.merges[1].right == 2);
  CHECK(tree.merges[2].left == 5);
  CHECK(tree.merges[2].right == 3);

  // (2,3) and (0,1) tie; (0,1) goes first and keeps the lower node id.
  MatrixXd e(4, 4);
  e << 0, 0.3, 0.9, 0.9, 0.3, 0, 0.9, 0.9, 0.9, 0.9, 0, 0.3, 0.9, 0.9, 0.3, 0;
  const auto t2 = xsim::cluster_distances(names(4), e, Linkage::kSingle);
  CHECK(t2.merges[0].left == 0);
  CHECK(t2.merges[0].right == 1);
  CHECK(t2.merges[1].left == 2);
  CHECK(t2.merges[1].right == 3);
  CHECK(t2.merges[2].left == 4);
  CHECK(t2.merges[2].right == 5);
}

TEST_CASE("invalid distance matrices") {
  MatrixXd d(3, 3);
  d << 0, 0.2, 0.3, 0.2, 0, 0.4, 0.3, 0.4, 0;
  CHECK_NOTHROW(xsim::cluster_distances(names(3), d));
  MatrixXd asym = d;
  asym(0, 1) = 0.25;
  CHECK_THROWS_AS(xsim::cluster_distances(names(3), asym),
                  xsim::ValidationError);
  MatrixXd negative = d;
  negative(0, 2) = negative(2, 0) = -0.5;
  CHECK_THROWS_AS(xsim::cluster_distances(names(3), negative),
                  xsim::ValidationError);
  MatrixXd nan = d;
  nan(1, 2) = nan(2, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(xsim::cluster_distances(names(3), nan),
                  xsim::ValidationError);
  CHECK_THROWS_AS(xsim::cluster_distances(names(2), d), xsim::ValidationError);
  CHECK_THROWS_AS(xsim::parse_linkage("ward"), xsim::ValidationError);
  CHECK(xsim::parse_linkage("upgma") == Linkage::kAverage);
}

TEST_CASE("cut_tree edges") {
  std::mt19937_64 rng(43);
  const auto tree = xsim::cluster_distances(names(6), random_distances(6, rng));
  CHECK(xsim::cut_tree(tree, 1) ==
        std::vector<std::vector<int>>{{0, 1, 2, 3, 4, 5}});
  CHECK(xsim::cut_tree(tree, 6).size() == 6);
  CHECK_THROWS_AS(xsim::cut_tree(tree, 0), xsim::ValidationError);
  CHECK_THROWS_AS(xsim::cut_tree(tree, 7), xsim::ValidationError);
}

TEST_CASE("newick export and parse") {
  MatrixXd d(3, 3);
  d << 0, 0.2, 0.6, 0.2, 0, 0.6, 0.6, 0.6, 0;
  const auto tree =
      xsim::cluster_distances({"en", "et", "fi"}, d, Linkage::kAverage);
  const std::string newick = xsim::to_newick(tree);
  CHECK(newick == "((en:0.2,et:0.2):0.39999999999999997,fi:0.6);");
  const auto root = xsim::parse_newick(newick);
  const auto clades = xsim::newick_clades(root);
  CHECK(clades == std::vector<std::vector<std::string>>{
                      {"en", "et"}, {"en", "et", "fi"}});

  const auto quoted = xsim::cluster_distances(
      {"zh Hans", "it's"}, MatrixXd::Ones(2, 2) - MatrixXd::Identity(2, 2));
  const std::string q = xsim::to_newick(quoted);
  CHECK(q == "('zh Hans':1,'it''s':1);");
  const auto back = xsim::parse_newick(q);
  CHECK(back.children[0].name == "zh Hans");
  CHECK(back.children[1].name == "it's");

  CHECK_THROWS_AS(xsim::parse_newick("(a,b"), xsim::ValidationError);
  CHECK_THROWS_AS(xsim::parse_newick("(a,b);x"), xsim::ValidationError);
  CHECK_THROWS_AS(xsim::parse_newick("(a:zz,b);"), xsim::ValidationError);
}

TEST_CASE("newick branch lengths sum to the merge heights") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    const int l = 3 + trial % 8;
    const MatrixXd d = random_ultrametric(l, rng);
    const auto tree = xsim::cluster_distances(names(l), d);
    const auto root = xsim::parse_newick(xsim::to_newick(tree));
    // Root-to-leaf path length equals the root height for an ultrametric.
    std::function<void(const xsim::NewickNode&, double)> walk =
        [&](const xsim::NewickNode& n, double depth) {
          if (n.children.empty()) {
            CHECK(depth == doctest::Approx(tree.merges.back().height));
            return;
          }
          for (const auto& c : n.children) walk(c, depth + c.length);
        };
    walk(root, 0.0);
  }
}
