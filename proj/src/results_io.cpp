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

#include "xsim/results_io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "json.hpp"
#include "xsim/error.hpp"

namespace xsim {

using json = nlohmann::ordered_json;

std::string format_double(double value) {
  if (!std::isfinite(value)) {
    throw ValidationError("cannot format a non-finite value");
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ValidationError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

json index_to_json(const IndexSpec& spec) {
  json j;
  j["kind"] = to_string(spec.kind);
  j["svcca_components"] = spec.svcca_components;
  j["pwcca_reference"] = to_string(spec.pwcca_reference);
  j["rank_tolerance"] = spec.rank_tolerance;
  j["regularization"] = spec.regularization;
  return j;
}

IndexSpec index_from_json(const json& j) {
  IndexSpec spec;
  spec.kind = parse_index_kind(j.at("kind").get<std::string>());
  spec.svcca_components = j.at("svcca_components").get<int>();
  spec.pwcca_reference =
      parse_pwcca_reference(j.at("pwcca_reference").get<std::string>());
  spec.rank_tolerance = j.at("rank_tolerance").get<double>();
  spec.regularization = j.at("regularization").get<double>();
  return spec;
}

json pooling_to_json(const PoolingStrategy& p) {
  json j;
  j["kind"] = to_string(p.kind);
  j["mean_excludes_special"] = p.mean_excludes_special;
  return j;
}

PoolingStrategy pooling_from_json(const json& j) {
  PoolingStrategy p;
  p.kind = parse_pooling_kind(j.at("kind").get<std::string>());
  p.mean_excludes_special = j.at("mean_excludes_special").get<bool>();
  return p;
}

template <typename Fn>
auto parse_json_record(std::string_view text, const char* what, Fn&& fn) {
  try {
    return fn(json::parse(text));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

std::string pairwise_to_csv(const PairwiseMatrix& matrix) {
  std::string out = "language";
  for (const auto& lang : matrix.languages) out += "," + lang;
  out += '\n';
  for (std::size_t i = 0; i < matrix.languages.size(); ++i) {
    out += matrix.languages[i];
    for (std::size_t j = 0; j < matrix.languages.size(); ++j) {
      out += ',';
      out += format_double(matrix.values(static_cast<Eigen::Index>(i),
                                         static_cast<Eigen::Index>(j)));
    }
    out += '\n';
  }
  return out;
}

PairwiseMatrix pairwise_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ValidationError("empty matrix CSV");
  const auto header = split(lines[0], ',');
  if (header.size() < 2) throw ValidationError("matrix CSV has no languages");
  PairwiseMatrix m;
  for (std::size_t j = 1; j < header.size(); ++j) {
    m.languages.emplace_back(header[j]);
  }
  const auto l = static_cast<Eigen::Index>(m.languages.size());
  if (lines.size() != m.languages.size() + 1) {
    throw ValidationError("matrix CSV has " + std::to_string(lines.size() - 1) +
                          " rows for " + std::to_string(l) + " languages");
  }
  m.values.resize(l, l);
  for (Eigen::Index i = 0; i < l; ++i) {
    const auto cells = split(lines[static_cast<std::size_t>(i) + 1], ',');
    if (cells.size() != header.size()) {
      throw ValidationError("matrix CSV row " + std::to_string(i + 1) +
                            " has " + std::to_string(cells.size()) +
                            " cells");
    }
    if (cells[0] != m.languages[static_cast<std::size_t>(i)]) {
      throw ValidationError("matrix CSV row label '" + std::string(cells[0]) +
                            "' does not match column '" +
                            m.languages[static_cast<std::size_t>(i)] + "'");
    }
    for (Eigen::Index j = 0; j < l; ++j) {
      m.values(i, j) = parse_double(cells[static_cast<std::size_t>(j) + 1]);
    }
  }
  return m;
}

std::string profile_to_json(const LayerProfile& profile) {
  json j;
  j["pair"] = {profile.pair.source, profile.pair.target};
  j["index"] = index_to_json(profile.index);
  j["pooling"] = pooling_to_json(profile.pooling);
  j["permuted_target"] = profile.permuted_target;
  j["layers"] = profile.layers;
  j["scores"] = profile.scores;
  return j.dump(2) + "\n";
}

LayerProfile profile_from_json(std::string_view text) {
  return parse_json_record(text, "profile", [](const json& j) {
    LayerProfile p;
    const auto pair = j.at("pair").get<std::vector<std::string>>();
    if (pair.size() != 2) throw ValidationError("profile pair must have 2");
    p.pair = {pair[0], pair[1]};
    p.index = index_from_json(j.at("index"));
    p.pooling = pooling_from_json(j.at("pooling"));
    p.permuted_target = j.at("permuted_target").get<bool>();
    p.layers = j.at("layers").get<std::vector<int>>();
    p.scores = j.at("scores").get<std::vector<double>>();
    if (p.layers.size() != p.scores.size()) {
      throw ValidationError("profile has mismatched layers and scores");
    }
    return p;
  });
}

std::string profile_to_csv(const LayerProfile& profile) {
  return layer_values_to_csv(profile.layers, profile.scores, "score");
}

std::string layer_values_to_csv(const std::vector<int>& layers,
                                const std::vector<double>& values,
                                std::string_view column) {
  std::string out = "layer," + std::string(column) + "\n";
  for (std::size_t k = 0; k < layers.size(); ++k) {
    out += std::to_string(layers[k]) + "," + format_double(values[k]) + "\n";
  }
  return out;
}

std::string summary_to_json(const SummaryReport& report) {
  json j;
  j["index"] = index_to_json(report.index);
  j["pooling"] = pooling_to_json(report.pooling);
  j["best_layer"] = report.best_layer;
  json layers = json::array();
  for (const auto& s : report.layers) {
    json l;
    l["layer"] = s.layer;
    l["count"] = s.count;
    l["min"] = s.min;
    l["q1"] = s.q1;
    l["median"] = s.median;
    l["q3"] = s.q3;
    l["max"] = s.max;
    l["lower_whisker"] = s.lower_whisker;
    l["upper_whisker"] = s.upper_whisker;
    json outliers = json::array();
    for (const auto& o : s.outliers) {
      outliers.push_back({{"pair", {o.first, o.second}}, {"score", o.score}});
    }
    l["outliers"] = std::move(outliers);
    layers.push_back(std::move(l));
  }
  j["layers"] = std::move(layers);
  return j.dump(2) + "\n";
}

SummaryReport summary_from_json(std::string_view text) {
  return parse_json_record(text, "summary", [](const json& j) {
    SummaryReport r;
    r.index = index_from_json(j.at("index"));
    r.pooling = pooling_from_json(j.at("pooling"));
    r.best_layer = j.at("best_layer").get<int>();
    for (const auto& l : j.at("layers")) {
      LayerSummary s;
      s.layer = l.at("layer").get<int>();
      s.count = l.at("count").get<std::size_t>();
      s.min = l.at("min").get<double>();
      s.q1 = l.at("q1").get<double>();
      s.median = l.at("median").get<double>();
      s.q3 = l.at("q3").get<double>();
      s.max = l.at("max").get<double>();
      s.lower_whisker = l.at("lower_whisker").get<double>();
      s.upper_whisker = l.at("upper_whisker").get<double>();
      for (const auto& o : l.at("outliers")) {
        const auto pair = o.at("pair").get<std::vector<std::string>>();
        if (pair.size() != 2) throw ValidationError("outlier pair must have 2");
        s.outliers.push_back({pair[0], pair[1], o.at("score").get<double>()});
      }
      r.layers.push_back(std::move(s));
    }
    return r;
  });
}

std::string dendrogram_to_json(const Dendrogram& tree) {
  json j;
  j["linkage"] = to_string(tree.linkage);
  j["distance"] = "1 - similarity";
  j["leaves"] = tree.leaves;
  json merges = json::array();
  for (const auto& m : tree.merges) {
    merges.push_back({{"left", m.left},
                      {"right", m.right},
                      {"height", m.height},
                      {"size", m.size}});
  }
  j["merges"] = std::move(merges);
  j["newick"] = to_newick(tree);
  return j.dump(2) + "\n";
}

Dendrogram dendrogram_from_json(std::string_view text) {
  return parse_json_record(text, "dendrogram", [](const json& j) {
    Dendrogram t;
    t.linkage = parse_linkage(j.at("linkage").get<std::string>());
    t.leaves = j.at("leaves").get<std::vector<std::string>>();
    for (const auto& m : j.at("merges")) {
      t.merges.push_back({m.at("left").get<int>(), m.at("right").get<int>(),
                          m.at("height").get<double>(),
                          m.at("size").get<int>()});
    }
    if (t.leaves.empty() || t.merges.size() + 1 != t.leaves.size()) {
      throw ValidationError("dendrogram needs exactly L-1 merges");
    }
    return t;
  });
}

std::string matches_to_csv(const MatchResult& result) {
  std::string out = "sentence,best,correct\n";
  for (std::size_t i = 0; i < result.best.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(result.best[i]) + "," +
           (result.best[i] == i ? "1" : "0") + "\n";
  }
  return out;
}

MatchResult matches_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != "sentence,best,correct") {
    throw ValidationError("match CSV must start with sentence,best,correct");
  }
  MatchResult r;
  std::size_t correct = 0;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto cells = split(lines[k], ',');
    std::size_t idx = 0;
    std::size_t best = 0;
    if (cells.size() != 3 ||
        std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(),
                        idx)
                .ec != std::errc() ||
        std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(),
                        best)
                .ec != std::errc() ||
        idx != k - 1) {
      throw ValidationError("malformed match CSV line " + std::to_string(k));
    }
    r.best.push_back(best);
    if (best == idx) ++correct;
  }
  if (!r.best.empty()) {
    r.accuracy =
        static_cast<double>(correct) / static_cast<double>(r.best.size());
  }
  return r;
}

std::string score_to_json(const SimilarityScore& score,
                          const IndexSpec& spec) {
  json j;
  j["index"] = index_to_json(spec);
  j["score"] = score.value;
  if (score.cca) {
    const CcaResult& c = *score.cca;
    json cca;
    cca["num_coefficients"] = c.correlations.size();
    cca["rank_x"] = c.rank_x;
    cca["rank_y"] = c.rank_y;
    if (!c.correlations.empty()) {
      cca["rho_max"] = c.correlations.front();
      cca["rho_min"] = c.correlations.back();
    }
    cca["correlations"] = c.correlations;
    cca["weights"] = c.weights;
    j["cca"] = std::move(cca);
  }
  j["warnings"] = score.warnings;
  return j.dump(2) + "\n";
}

}  // namespace xsim
