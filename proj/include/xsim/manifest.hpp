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

// Dataset manifest: a JSON file at the dataset root describing which XEMB
// file holds each (language, layer) and the shared corpus dimensions.
//
//   {
//     "dataset_id": "xnli-ext",
//     "model_name": "bert-base-multilingual-cased",
//     "languages": ["en", "et"],
//     "num_layers": 13,
//     "hidden_dim": 768,
//     "num_sentences": 10000,
//     "alignment_note": "<kAlignmentNote>",
//     "files": {"en": ["en/layer_00.xemb", ...], "et": [...]}
//   }
//
// files[lang][layer] is relative to the dataset root.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "xsim/embstore.hpp"

namespace xsim {

inline constexpr const char* kManifestFileName = "manifest.json";
inline constexpr const char* kAlignmentNote =
    "row i of every language file is the same sentence; rows are mutual "
    "translations";

struct DatasetManifest {
  std::string dataset_id;
  std::string model_name;
  std::vector<std::string> languages;
  int num_layers = 0;
  std::uint32_t hidden_dim = 0;
  std::uint64_t num_sentences = 0;
  std::string alignment_note = kAlignmentNote;
  std::map<std::string, std::vector<std::string>> files;
  // Directory the manifest was loaded from; not serialized.
  std::filesystem::path root;

  bool has_language(const std::string& lang) const;
  std::filesystem::path file_for(const std::string& lang, int layer) const;

  // Structural checks only (no file access). Throws ValidationError.
  void validate_structure() const;
  // validate_structure plus: every file exists and its header matches
  // hidden_dim and num_sentences.
  void validate_files() const;

  // Reads the token set of (lang, layer) and checks it against the manifest.
  TokenEmbeddingSet load(const std::string& lang, int layer) const;

  std::string to_json() const;
};

// `path` may name the manifest file or the dataset directory. Throws IoError
// ("manifest not found") or ValidationError.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(const std::string& json_text,
                               const std::filesystem::path& root);
void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& dir);

// Default relative path used by writers: "<lang>/layer_<NN>.xemb".
std::string default_layer_file(const std::string& lang, int layer);

}  // namespace xsim
