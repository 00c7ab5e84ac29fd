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

#include "xsim/cli.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "xsim/analysis.hpp"
#include "xsim/cluster.hpp"
#include "xsim/error.hpp"
#include "xsim/fileutil.hpp"
#include "xsim/manifest.hpp"
#include "xsim/parallel.hpp"
#include "xsim/pooling.hpp"
#include "xsim/results_io.hpp"
#include "xsim/simindex.hpp"
#include "xsim/synth.hpp"

namespace xsim {

namespace fs = std::filesystem;

namespace {

// Paths are taken relative to $XSIM_DATA when it is set.
struct Paths {
  std::optional<fs::path> env_root;

  fs::path resolve(const std::string& p) const {
    fs::path path(p);
    if (env_root && path.is_relative()) return *env_root / path;
    return path;
  }

  fs::path dataset(const std::string& flag) const {
    if (!flag.empty()) return resolve(flag);
    if (env_root) return *env_root;
    throw ValidationError("no dataset root: pass --data or set XSIM_DATA");
  }
};

struct IndexOptions {
  std::string kind = "cka";
  int components = 20;
  std::string reference = "first_argument";
  double rank_tolerance = 1e-10;
  double regularization = 0.0;

  IndexSpec spec() const {
    IndexSpec s;
    s.kind = parse_index_kind(kind);
    s.svcca_components = components;
    s.pwcca_reference = parse_pwcca_reference(reference);
    s.rank_tolerance = rank_tolerance;
    s.regularization = regularization;
    s.validate();
    return s;
  }
};

struct PoolingOptions {
  std::string kind = "mean";
  bool exclude_special = false;

  PoolingStrategy strategy() const {
    return {parse_pooling_kind(kind), exclude_special};
  }
};

void add_index_options(CLI::App* app, IndexOptions& o) {
  app->add_option("--index", o.kind, "Similarity index")
      ->check(CLI::IsMember({"cca", "svcca", "pwcca", "cka", "cosine"}))
      ->capture_default_str();
  app->add_option("--k,--svcca-components", o.components,
                  "SVCCA components kept per view")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--reference", o.reference,
                  "PWCCA reference view: first_argument or symmetric_mean")
      ->check(CLI::IsMember({"first_argument", "first", "symmetric_mean",
                             "symmetric"}))
      ->capture_default_str();
  app->add_option("--rank-tol", o.rank_tolerance,
                  "Relative singular-value cutoff for whitening")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--ridge", o.regularization,
                  "Ridge added to covariance eigenvalues during whitening")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
}

void add_pooling_options(CLI::App* app, PoolingOptions& o,
                         const std::string& names) {
  app->add_option(names, o.kind, "Pooling strategy")
      ->check(CLI::IsMember({"cls", "first_token", "mean"}))
      ->capture_default_str();
  app->add_flag("--exclude-special", o.exclude_special,
                "Mean pooling without the first and last token");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(',', start);
    std::string item = text.substr(start, pos - start);
    if (item.empty()) throw ValidationError("empty item in list '" + text + "'");
    out.push_back(std::move(item));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

int parse_int(const std::string& s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("not an integer: '" + s + "'");
  }
  return v;
}

// "0-4,7" -> {0, 1, 2, 3, 4, 7}
std::vector<int> parse_layers(const std::string& text) {
  std::vector<int> out;
  if (text.empty()) return out;
  for (const auto& item : split_list(text)) {
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      out.push_back(parse_int(item));
      continue;
    }
    const int lo = parse_int(item.substr(0, dash));
    const int hi = parse_int(item.substr(dash + 1));
    if (hi < lo) throw ValidationError("bad layer range '" + item + "'");
    for (int l = lo; l <= hi; ++l) out.push_back(l);
  }
  return out;
}

LanguagePair parse_pair(const std::string& text) {
  const auto items = split_list(text);
  if (items.size() != 2) {
    throw ValidationError("--pair expects two language codes, got '" + text +
                          "'");
  }
  return {items[0], items[1]};
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12f", v);
  return buf;
}

unsigned jobs_or_default(int jobs) {
  return jobs > 0 ? static_cast<unsigned>(jobs) : default_jobs();
}

void print_warnings(const std::vector<std::string>& warnings,
                    std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  Paths paths;
  if (const char* env = std::getenv("XSIM_DATA"); env && *env) {
    paths.env_root = fs::path(env);
  }

  CLI::App app{"Cross-lingual similarity of sentence representations"};
  app.name("xsim");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::string data;
  int jobs = 0;
  std::uint64_t seed = 0;
  IndexOptions index;
  PoolingOptions pooling;
  std::string out_path, lang, pair, layers, x_path, y_path, matrix_path;
  std::string csv_path, newick_path, metric = "cosine", linkage = "average";
  std::optional<int> layer;
  bool permuted = false;

  auto add_data = [&](CLI::App* sub) {
    sub->add_option("--data", data,
                    "Dataset root (directory holding manifest.json)");
  };
  auto add_jobs = [&](CLI::App* sub) {
    sub->add_option("--jobs", jobs, "Worker threads (default: all cores)")
        ->check(CLI::NonNegativeNumber);
  };

  // pool
  auto* pool_cmd =
      app.add_subcommand("pool", "Pool one (language, layer) into an XMAT");
  add_data(pool_cmd);
  pool_cmd->add_option("--lang", lang, "Language code")->required();
  pool_cmd->add_option("--layer", layer, "Layer index")->required();
  add_pooling_options(pool_cmd, pooling, "--strategy,--pooling");
  pool_cmd->add_option("--out", out_path, "Output XMAT path")->required();

  // score
  auto* score_cmd =
      app.add_subcommand("score", "Score two sentence matrices");
  score_cmd->add_option("--x", x_path, "Reference XMAT");
  score_cmd->add_option("--y", y_path, "Target XMAT");
  add_data(score_cmd);
  score_cmd->add_option("--pair", pair, "src,tgt (with --data and --layer)");
  score_cmd->add_option("--layer", layer, "Layer index");
  add_pooling_options(score_cmd, pooling, "--pooling");
  add_index_options(score_cmd, index);
  score_cmd->add_flag("--permuted", permuted,
                      "Cosine against a seeded derangement of Y's rows");
  score_cmd->add_option("--seed", seed, "Seed for --permuted");
  score_cmd->add_option("--out", out_path, "Also write the JSON record here");

  // profile
  auto* profile_cmd =
      app.add_subcommand("profile", "Per-layer score for one language pair");
  add_data(profile_cmd);
  profile_cmd->add_option("--pair", pair, "src,tgt")->required();
  profile_cmd->add_option("--layers", layers, "Layer selection, e.g. 0-4,7");
  add_pooling_options(profile_cmd, pooling, "--pooling");
  add_index_options(profile_cmd, index);
  profile_cmd->add_flag("--permuted", permuted,
                        "Cosine against a seeded derangement of the target");
  profile_cmd->add_option("--seed", seed, "Seed for --permuted");
  profile_cmd->add_option("--out", out_path, "JSON output (default stdout)");
  profile_cmd->add_option("--csv", csv_path, "Also write layer,score CSV");
  add_jobs(profile_cmd);

  // pairwise
  auto* pairwise_cmd =
      app.add_subcommand("pairwise", "All-pairs language matrix at a layer");
  add_data(pairwise_cmd);
  pairwise_cmd->add_option("--layer", layer, "Layer index")->required();
  add_pooling_options(pairwise_cmd, pooling, "--pooling");
  add_index_options(pairwise_cmd, index);
  pairwise_cmd->add_option("--out", out_path, "CSV output (default stdout)");
  add_jobs(pairwise_cmd);

  // match
  auto* match_cmd =
      app.add_subcommand("match", "Translation matching probe");
  match_cmd->add_option("--x", x_path, "Source XMAT");
  match_cmd->add_option("--y", y_path, "Target XMAT");
  add_data(match_cmd);
  match_cmd->add_option("--pair", pair, "src,tgt (with --data)");
  match_cmd->add_option("--layer", layer,
                        "Layer index (omit for a per-layer profile)");
  match_cmd->add_option("--layers", layers, "Layer selection for a profile");
  add_pooling_options(match_cmd, pooling, "--pooling");
  match_cmd->add_option("--metric", metric, "cosine or euclidean")
      ->check(CLI::IsMember({"cosine", "euclidean"}))
      ->capture_default_str();
  match_cmd->add_option("--out", out_path,
                        "Per-sentence matches CSV, or layer,accuracy CSV");
  add_jobs(match_cmd);

  // summary
  auto* summary_cmd = app.add_subcommand(
      "summary", "Per-layer quartiles and outlier pairs");
  add_data(summary_cmd);
  summary_cmd->add_option("--layers", layers, "Layer selection, e.g. 0-12");
  add_pooling_options(summary_cmd, pooling, "--pooling");
  add_index_options(summary_cmd, index);
  summary_cmd->add_option("--out", out_path, "JSON output (default stdout)");
  add_jobs(summary_cmd);

  // cluster
  auto* cluster_cmd = app.add_subcommand(
      "cluster", "Agglomerative clustering of a pairwise matrix");
  cluster_cmd->add_option("--matrix", matrix_path, "Pairwise CSV")
      ->required();
  cluster_cmd->add_option("--linkage", linkage, "average, complete or single")
      ->check(CLI::IsMember({"average", "upgma", "complete", "single"}))
      ->capture_default_str();
  cluster_cmd->add_option("--newick", newick_path, "Newick output");
  cluster_cmd->add_option("--out", out_path, "Merge-list JSON output");

  // synth
  SynthConfig synth;
  std::string synth_langs = "en,et";
  auto* synth_cmd =
      app.add_subcommand("synth", "Write a synthetic aligned dataset");
  synth_cmd->add_option("--out", out_path, "Dataset directory")->required();
  synth_cmd->add_option("--langs", synth_langs, "Language codes")
      ->capture_default_str();
  synth_cmd->add_option("--num-layers", synth.num_layers)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--sentences", synth.num_sentences)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--dim", synth.hidden_dim)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--min-tokens", synth.min_tokens)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--max-tokens", synth.max_tokens)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  synth_cmd->add_option("--seed", seed, "Generator seed");

  // validate
  auto* validate_cmd =
      app.add_subcommand("validate", "Check a dataset manifest and its files");
  add_data(validate_cmd);

  std::vector<const char*> argv;
  argv.push_back("xsim");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const auto load = [&] {
      return load_manifest(paths.dataset(data));
    };
    const auto write_or_print = [&](const std::string& path,
                                    const std::string& text) {
      if (path.empty()) {
        out << text;
      } else {
        atomic_write_file(paths.resolve(path), text);
      }
    };

    if (*pool_cmd) {
      const auto manifest = load();
      SentenceMatrix m = pool(manifest.load(lang, *layer), pooling.strategy());
      write_matrix(m, paths.resolve(out_path));
      out << "wrote " << m.rows() << "x" << m.cols() << " "
          << to_string(m.pooling) << " matrix for " << lang << " layer "
          << *layer << "\n";
    } else if (*score_cmd) {
      const IndexSpec spec = index.spec();
      SentenceMatrix x, y;
      if (!x_path.empty() || !y_path.empty()) {
        if (x_path.empty() || y_path.empty()) {
          throw ValidationError("--x and --y must be given together");
        }
        x = read_matrix(paths.resolve(x_path));
        y = read_matrix(paths.resolve(y_path));
      } else {
        if (pair.empty() || !layer) {
          throw ValidationError("pass --x/--y or --pair with --layer");
        }
        const auto manifest = load();
        const auto p = parse_pair(pair);
        x = pool(manifest.load(p.source, *layer), pooling.strategy());
        y = pool(manifest.load(p.target, *layer), pooling.strategy());
      }
      SimilarityScore s;
      if (permuted) {
        if (spec.kind != IndexKind::kCosine) {
          throw ValidationError("--permuted requires --index cosine");
        }
        s.kind = spec.kind;
        s.value = cosine_permuted(x.to_f64(), y.to_f64(), seed);
      } else {
        s = score(x, y, spec);
      }
      print_warnings(s.warnings, err);
      const std::string record = score_to_json(s, spec);
      out << fixed(s.value) << "\n" << record;
      if (!out_path.empty()) atomic_write_file(paths.resolve(out_path), record);
    } else if (*profile_cmd) {
      const auto manifest = load();
      ProfileOptions opts;
      opts.layers = parse_layers(layers);
      opts.permuted_target = permuted;
      opts.seed = seed;
      opts.jobs = jobs_or_default(jobs);
      const LayerProfile profile = layer_profile(
          manifest, parse_pair(pair), index.spec(), pooling.strategy(), opts);
      write_or_print(out_path, profile_to_json(profile));
      if (!csv_path.empty()) {
        atomic_write_file(paths.resolve(csv_path), profile_to_csv(profile));
      }
    } else if (*pairwise_cmd) {
      const auto manifest = load();
      const PairwiseMatrix m =
          pairwise_matrix(manifest, *layer, index.spec(), pooling.strategy(),
                          jobs_or_default(jobs));
      write_or_print(out_path, pairwise_to_csv(m));
    } else if (*match_cmd) {
      const MatchMetric mm = parse_match_metric(metric);
      if (!x_path.empty() || !y_path.empty()) {
        if (x_path.empty() || y_path.empty()) {
          throw ValidationError("--x and --y must be given together");
        }
        const MatchResult r =
            match_sentences(read_matrix(paths.resolve(x_path)).to_f64(),
                            read_matrix(paths.resolve(y_path)).to_f64(), mm);
        out << fixed(r.accuracy) << "\n";
        if (!out_path.empty()) {
          atomic_write_file(paths.resolve(out_path), matches_to_csv(r));
        }
      } else {
        if (pair.empty()) {
          throw ValidationError("pass --x/--y or --pair with --data");
        }
        const auto manifest = load();
        const auto p = parse_pair(pair);
        if (layer) {
          const SentenceMatrix x =
              pool(manifest.load(p.source, *layer), pooling.strategy());
          const SentenceMatrix y =
              pool(manifest.load(p.target, *layer), pooling.strategy());
          const MatchResult r = match_sentences(x.to_f64(), y.to_f64(), mm);
          out << fixed(r.accuracy) << "\n";
          if (!out_path.empty()) {
            atomic_write_file(paths.resolve(out_path), matches_to_csv(r));
          }
        } else {
          const auto selected = resolve_layers(manifest, parse_layers(layers));
          const auto acc =
              matching_profile(manifest, p, pooling.strategy(), mm, selected,
                               jobs_or_default(jobs));
          write_or_print(out_path,
                         layer_values_to_csv(selected, acc, "accuracy"));
        }
      }
    } else if (*summary_cmd) {
      const auto manifest = load();
      const SummaryReport r =
          layer_summary(manifest, index.spec(), pooling.strategy(),
                        parse_layers(layers), jobs_or_default(jobs));
      write_or_print(out_path, summary_to_json(r));
      if (!out_path.empty()) out << "best layer " << r.best_layer << "\n";
    } else if (*cluster_cmd) {
      const PairwiseMatrix m =
          pairwise_from_csv(read_file(paths.resolve(matrix_path)));
      const Dendrogram tree =
          agglomerative_cluster(m, parse_linkage(linkage));
      const std::string newick = to_newick(tree);
      out << newick << "\n";
      if (!newick_path.empty()) {
        atomic_write_file(paths.resolve(newick_path), newick + "\n");
      }
      if (!out_path.empty()) {
        atomic_write_file(paths.resolve(out_path), dendrogram_to_json(tree));
      }
    } else if (*synth_cmd) {
      synth.languages = split_list(synth_langs);
      synth.seed = seed;
      const fs::path dir = paths.resolve(out_path);
      fs::create_directories(dir);
      const auto m = write_synthetic_dataset(synth, dir);
      out << "wrote " << m.languages.size() << " languages x "
          << m.num_layers << " layers to " << dir.string() << "\n";
    } else if (*validate_cmd) {
      const auto manifest = load();
      manifest.validate_files();
      out << "ok: " << manifest.languages.size() << " languages, "
          << manifest.num_layers << " layers, " << manifest.num_sentences
          << " sentences, dim " << manifest.hidden_dim << "\n";
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace xsim
