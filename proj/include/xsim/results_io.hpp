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

// Text serialization of analysis results. Every writer has a matching
// reader; numbers use the shortest representation that parses back to the
// same double, so write -> read -> write is byte-stable.

#include <string>
#include <string_view>
#include <vector>

#include "xsim/analysis.hpp"
#include "xsim/cluster.hpp"

namespace xsim {

std::string format_double(double value);
double parse_double(std::string_view text);

// CSV: header "language,<l1>,...,<lL>", then one row per language.
std::string pairwise_to_csv(const PairwiseMatrix& matrix);
// Restores languages and values only.
PairwiseMatrix pairwise_from_csv(std::string_view text);

// JSON record {pair, index, pooling, permuted_target, layers, scores}.
std::string profile_to_json(const LayerProfile& profile);
LayerProfile profile_from_json(std::string_view text);
// Plot-ready CSV with columns layer,score.
std::string profile_to_csv(const LayerProfile& profile);

std::string summary_to_json(const SummaryReport& report);
SummaryReport summary_from_json(std::string_view text);

// Merge list plus the Newick string.
std::string dendrogram_to_json(const Dendrogram& tree);
Dendrogram dendrogram_from_json(std::string_view text);

// CSV with columns sentence,best,correct.
std::string matches_to_csv(const MatchResult& result);
MatchResult matches_from_csv(std::string_view text);

// Per-layer accuracy CSV with columns layer,accuracy.
std::string layer_values_to_csv(const std::vector<int>& layers,
                                const std::vector<double>& values,
                                std::string_view column);

// JSON record of a single score.
std::string score_to_json(const SimilarityScore& score, const IndexSpec& spec);

}  // namespace xsim
