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

#include "xsim/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "json.hpp"
#include "xsim/fileutil.hpp"

namespace xsim {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

bool DatasetManifest::has_language(const std::string& lang) const {
  return std::find(languages.begin(), languages.end(), lang) !=
         languages.end();
}

fs::path DatasetManifest::file_for(const std::string& lang, int layer) const {
  if (!has_language(lang)) {
    throw ValidationError("language '" + lang + "' is not in the manifest");
  }
  if (layer < 0 || layer >= num_layers) {
    throw ValidationError("layer " + std::to_string(layer) +
                          " out of range [0, " + std::to_string(num_layers) +
                          ")");
  }
  const auto it = files.find(lang);
  if (it == files.end() || static_cast<int>(it->second.size()) <= layer) {
    throw ValidationError("manifest has no file for (" + lang + ", layer " +
                          std::to_string(layer) + ")");
  }
  return root / it->second[static_cast<std::size_t>(layer)];
}

void DatasetManifest::validate_structure() const {
  if (languages.empty()) throw ValidationError("manifest lists no languages");
  if (num_layers <= 0) throw ValidationError("num_layers must be positive");
  if (hidden_dim == 0) throw ValidationError("hidden_dim must be positive");
  if (num_sentences == 0) {
    throw ValidationError("num_sentences must be positive");
  }
  if (alignment_note != kAlignmentNote) {
    throw ValidationError("alignment_note does not declare row alignment");
  }
  std::set<std::string> seen;
  for (const auto& lang : languages) {
    if (lang.empty()) throw ValidationError("empty language code");
    if (!seen.insert(lang).second) {
      throw ValidationError("duplicate language '" + lang + "'");
    }
    const auto it = files.find(lang);
    if (it == files.end()) {
      throw ValidationError("file_index has no entry for '" + lang + "'");
    }
    if (static_cast<int>(it->second.size()) != num_layers) {
      throw ValidationError("file_index for '" + lang + "' lists " +
                            std::to_string(it->second.size()) +
                            " layers, expected " +
                            std::to_string(num_layers));
    }
    for (const auto& rel : it->second) {
      if (rel.empty() || fs::path(rel).is_absolute()) {
        throw ValidationError("file_index paths must be relative: '" + rel +
                              "'");
      }
    }
  }
  for (const auto& [lang, _] : files) {
    if (!seen.contains(lang)) {
      throw ValidationError("file_index lists unknown language '" + lang +
                            "'");
    }
  }
}

namespace {

void check_header(const DatasetManifest& m, const fs::path& path,
                  std::uint32_t dim, std::uint64_t sentences) {
  if (dim != m.hidden_dim) {
    throw ValidationError(path.string() + ": hidden_dim " +
                          std::to_string(dim) + " != manifest " +
                          std::to_string(m.hidden_dim));
  }
  if (sentences != m.num_sentences) {
    throw ValidationError(path.string() + ": num_sentences " +
                          std::to_string(sentences) + " != manifest " +
                          std::to_string(m.num_sentences));
  }
}

}  // namespace

void DatasetManifest::validate_files() const {
  validate_structure();
  for (const auto& lang : languages) {
    for (int layer = 0; layer < num_layers; ++layer) {
      const fs::path path = file_for(lang, layer);
      if (!fs::exists(path)) throw IoError("missing file " + path.string());
      const XembHeader h = read_token_header(path);
      check_header(*this, path, h.hidden_dim, h.num_sentences);
    }
  }
}

TokenEmbeddingSet DatasetManifest::load(const std::string& lang,
                                        int layer) const {
  const fs::path path = file_for(lang, layer);
  if (!fs::exists(path)) throw IoError("missing file " + path.string());
  TokenEmbeddingSet set = read_token_embeddings(path);
  check_header(*this, path, set.hidden_dim, set.num_sentences());
  set.language = lang;
  set.layer = layer;
  return set;
}

std::string DatasetManifest::to_json() const {
  json j;
  j["dataset_id"] = dataset_id;
  j["model_name"] = model_name;
  j["languages"] = languages;
  j["num_layers"] = num_layers;
  j["hidden_dim"] = hidden_dim;
  j["num_sentences"] = num_sentences;
  j["alignment_note"] = alignment_note;
  json f = json::object();
  for (const auto& lang : languages) {
    const auto it = files.find(lang);
    f[lang] = it == files.end() ? json::array() : json(it->second);
  }
  j["files"] = std::move(f);
  return j.dump(2) + "\n";
}

DatasetManifest parse_manifest(const std::string& json_text,
                               const fs::path& root) {
  DatasetManifest m;
  m.root = root;
  try {
    const json j = json::parse(json_text);
    m.dataset_id = j.at("dataset_id").get<std::string>();
    m.model_name = j.at("model_name").get<std::string>();
    m.languages = j.at("languages").get<std::vector<std::string>>();
    m.num_layers = j.at("num_layers").get<int>();
    m.hidden_dim = j.at("hidden_dim").get<std::uint32_t>();
    m.num_sentences = j.at("num_sentences").get<std::uint64_t>();
    m.alignment_note = j.at("alignment_note").get<std::string>();
    for (const auto& [lang, paths] : j.at("files").items()) {
      m.files[lang] = paths.get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
  m.validate_structure();
  return m;
}

DatasetManifest load_manifest(const fs::path& path) {
  std::error_code ec;
  const fs::path file =
      fs::is_directory(path, ec) ? path / kManifestFileName : path;
  if (!fs::is_regular_file(file, ec)) {
    throw IoError("manifest not found: " + file.string());
  }
  return parse_manifest(read_file(file), file.parent_path());
}

void save_manifest(const DatasetManifest& manifest, const fs::path& dir) {
  manifest.validate_structure();
  atomic_write_file(dir / kManifestFileName, manifest.to_json());
}

std::string default_layer_file(const std::string& lang, int layer) {
  char name[32];
  std::snprintf(name, sizeof name, "layer_%02d.xemb", layer);
  return lang + "/" + name;
}

}  // namespace xsim
