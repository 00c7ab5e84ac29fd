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

#include "xsim/cluster.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "xsim/error.hpp"
#include "xsim/results_io.hpp"

namespace xsim {

std::string_view to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::kAverage: return "average";
    case Linkage::kComplete: return "complete";
    case Linkage::kSingle: return "single";
  }
  return "unknown";
}

Linkage parse_linkage(std::string_view name) {
  if (name == "average" || name == "upgma") return Linkage::kAverage;
  if (name == "complete") return Linkage::kComplete;
  if (name == "single") return Linkage::kSingle;
  throw ValidationError("unknown linkage '" + std::string(name) +
                        "' (expected average, complete or single)");
}

namespace {

using Eigen::Index;

// Distance from the union of clusters a and b to a third cluster, given
// its distances da and db to a and b. The average is written as
// lo + w * (hi - lo) so that it never rounds below min(da, db), which keeps
// merge heights nondecreasing in floating point.
double linkage_update(Linkage linkage, double da, double db, int na, int nb) {
  switch (linkage) {
    case Linkage::kSingle: return std::min(da, db);
    case Linkage::kComplete: return std::max(da, db);
    case Linkage::kAverage: {
      const bool a_lo = da <= db;
      const double lo = a_lo ? da : db;
      const double hi = a_lo ? db : da;
      const double w_hi =
          static_cast<double>(a_lo ? nb : na) / static_cast<double>(na + nb);
      return lo + w_hi * (hi - lo);
    }
  }
  return da;
}

void collect_leaves(const Dendrogram& tree, int node, std::vector<int>& out) {
  const int l = static_cast<int>(tree.leaves.size());
  if (node < l) {
    out.push_back(node);
    return;
  }
  const Merge& m = tree.merges[static_cast<std::size_t>(node - l)];
  collect_leaves(tree, m.left, out);
  collect_leaves(tree, m.right, out);
}

bool needs_quotes(const std::string& name) {
  if (name.empty()) return true;
  for (char c : name) {
    if (std::string_view(" \t\n()[]':;,").find(c) != std::string_view::npos) {
      return true;
    }
  }
  return false;
}

std::string newick_label(const std::string& name) {
  if (!needs_quotes(name)) return name;
  std::string out = "'";
  for (char c : name) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'";
}

void write_newick(const Dendrogram& tree, int node, double parent_height,
                  bool is_root, std::string& out) {
  const int l = static_cast<int>(tree.leaves.size());
  double height = 0.0;
  if (node < l) {
    out += newick_label(tree.leaves[static_cast<std::size_t>(node)]);
  } else {
    const Merge& m = tree.merges[static_cast<std::size_t>(node - l)];
    height = m.height;
    out += '(';
    write_newick(tree, m.left, height, false, out);
    out += ',';
    write_newick(tree, m.right, height, false, out);
    out += ')';
  }
  if (!is_root) {
    out += ':';
    out += format_double(parent_height - height);
  }
}

class NewickParser {
 public:
  explicit NewickParser(std::string_view text) : text_(text) {}

  NewickNode parse() {
    NewickNode root = node();
    skip_ws();
    expect(';');
    skip_ws();
    if (pos_ != text_.size()) error("trailing characters");
    return root;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    throw ValidationError("newick: " + what + " at offset " +
                          std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::string_view(" \t\r\n").find(text_[pos_]) !=
               std::string_view::npos) {
      ++pos_;
    }
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void expect(char c) {
    if (peek() != c) error(std::string("expected '") + c + "'");
    ++pos_;
  }

  NewickNode node() {
    NewickNode n;
    if (peek() == '(') {
      ++pos_;
      n.children.push_back(node());
      while (peek() == ',') {
        ++pos_;
        n.children.push_back(node());
      }
      expect(')');
    }
    n.name = label();
    if (peek() == ':') {
      ++pos_;
      skip_ws();
      const char* begin = text_.data() + pos_;
      const char* end = text_.data() + text_.size();
      auto [ptr, ec] = std::from_chars(begin, end, n.length);
      if (ec != std::errc()) error("bad branch length");
      pos_ += static_cast<std::size_t>(ptr - begin);
    }
    if (n.children.empty() && n.name.empty()) error("unnamed leaf");
    return n;
  }

  std::string label() {
    std::string out;
    if (peek() == '\'') {
      ++pos_;
      for (;;) {
        if (pos_ >= text_.size()) error("unterminated quote");
        const char c = text_[pos_++];
        if (c == '\'') {
          if (pos_ < text_.size() && text_[pos_] == '\'') {
            out += '\'';
            ++pos_;
          } else {
            break;
          }
        } else {
          out += c;
        }
      }
      return out;
    }
    while (pos_ < text_.size() &&
           std::string_view("(),:; \t\r\n").find(text_[pos_]) ==
               std::string_view::npos) {
      out += text_[pos_++];
    }
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void clades_of(const NewickNode& n, std::vector<std::string>& leaves,
               std::vector<std::vector<std::string>>& out) {
  if (n.children.empty()) {
    leaves.push_back(n.name);
    return;
  }
  std::vector<std::string> mine;
  for (const auto& c : n.children) clades_of(c, mine, out);
  std::sort(mine.begin(), mine.end());
  out.push_back(mine);
  leaves.insert(leaves.end(), mine.begin(), mine.end());
}

}  // namespace

Dendrogram cluster_distances(const std::vector<std::string>& leaves,
                             const Eigen::MatrixXd& distances,
                             Linkage linkage, double tol) {
  const auto l = static_cast<Index>(leaves.size());
  if (l == 0) throw ValidationError("no leaves to cluster");
  if (distances.rows() != l || distances.cols() != l) {
    throw ValidationError("distance matrix is " +
                          std::to_string(distances.rows()) + "x" +
                          std::to_string(distances.cols()) + ", expected " +
                          std::to_string(l) + "x" + std::to_string(l));
  }
  for (Index i = 0; i < l; ++i) {
    for (Index j = 0; j < l; ++j) {
      const double d = distances(i, j);
      if (!std::isfinite(d)) {
        throw ValidationError("non-finite distance at (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
      }
      if (i != j && d < -tol) {
        throw ValidationError("negative distance at (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
      }
      if (std::abs(d - distances(j, i)) > tol) {
        throw ValidationError("matrix is not symmetric at (" +
                              std::to_string(i) + ", " + std::to_string(j) +
                              ")");
      }
    }
  }

  const Index nodes = 2 * l - 1;
  Eigen::MatrixXd d(nodes, nodes);
  for (Index i = 0; i < l; ++i) {
    for (Index j = i + 1; j < l; ++j) {
      d(i, j) = d(j, i) = distances(i, j);
    }
  }
  std::vector<int> size(static_cast<std::size_t>(nodes), 1);
  std::vector<int> min_leaf(static_cast<std::size_t>(nodes));
  std::iota(min_leaf.begin(), min_leaf.begin() + l, 0);
  // Kept sorted by min_leaf, so the first minimum found in row-major scan
  // order is the lexicographically smallest tie.
  std::vector<int> active(static_cast<std::size_t>(l));
  std::iota(active.begin(), active.end(), 0);

  Dendrogram tree;
  tree.leaves = leaves;
  tree.linkage = linkage;
  for (Index step = 0; step + 1 < l; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0;
    std::size_t bb = 1;
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const double v = d(active[a], active[b]);
        if (v < best) {
          best = v;
          ba = a;
          bb = b;
        }
      }
    }
    const int na = active[ba];
    const int nb = active[bb];
    const int node = static_cast<int>(l + step);
    size[node] = size[na] + size[nb];
    min_leaf[node] = min_leaf[na];
    for (int c : active) {
      if (c == na || c == nb) continue;
      d(node, c) = d(c, node) =
          linkage_update(linkage, d(na, c), d(nb, c), size[na], size[nb]);
    }
    tree.merges.push_back({na, nb, best, size[node]});
    active[ba] = node;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bb));
  }
  return tree;
}

Dendrogram agglomerative_cluster(const PairwiseMatrix& matrix,
                                 Linkage linkage) {
  const Eigen::MatrixXd dist =
      Eigen::MatrixXd::Ones(matrix.values.rows(), matrix.values.cols()) -
      matrix.values;
  return cluster_distances(matrix.languages, dist, linkage);
}

Eigen::MatrixXd cophenetic(const Dendrogram& tree) {
  const auto l = static_cast<Index>(tree.leaves.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(l, l);
  for (const Merge& m : tree.merges) {
    std::vector<int> a, b;
    collect_leaves(tree, m.left, a);
    collect_leaves(tree, m.right, b);
    for (int i : a) {
      for (int j : b) out(i, j) = out(j, i) = m.height;
    }
  }
  return out;
}

std::vector<std::vector<int>> cut_tree(const Dendrogram& tree, int k) {
  const int l = static_cast<int>(tree.leaves.size());
  if (k < 1 || k > l) {
    throw ValidationError("cannot cut " + std::to_string(l) +
                          " leaves into " + std::to_string(k) + " clusters");
  }
  // Roots after applying the first l - k merges.
  std::vector<bool> merged(static_cast<std::size_t>(2 * l - 1), false);
  std::vector<int> roots;
  for (int s = 0; s < l - k; ++s) {
    merged[tree.merges[s].left] = true;
    merged[tree.merges[s].right] = true;
  }
  for (int node = 0; node < l + (l - k); ++node) {
    if (!merged[node]) roots.push_back(node);
  }
  std::vector<std::vector<int>> out;
  for (int r : roots) {
    std::vector<int> leaves;
    collect_leaves(tree, r, leaves);
    std::sort(leaves.begin(), leaves.end());
    out.push_back(std::move(leaves));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string to_newick(const Dendrogram& tree) {
  const int l = static_cast<int>(tree.leaves.size());
  if (l == 0) throw ValidationError("empty dendrogram");
  std::string out;
  const int root = 2 * l - 2;
  const double top = tree.merges.empty() ? 0.0 : tree.merges.back().height;
  write_newick(tree, root, top, true, out);
  out += ';';
  return out;
}

NewickNode parse_newick(std::string_view text) {
  return NewickParser(text).parse();
}

std::vector<std::vector<std::string>> newick_clades(const NewickNode& root) {
  std::vector<std::string> leaves;
  std::vector<std::vector<std::string>> out;
  clades_of(root, leaves, out);
  return out;
}

}  // namespace xsim
