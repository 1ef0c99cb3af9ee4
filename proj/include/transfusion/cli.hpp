// Copyright 2026 The TransFusion Authors. All Rights Reserved.
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

// Command-line front end: project, build-trainset, fuse, evaluate, prompt.
//
// Exit codes: 0 success, 1 input error, 2 nothing produced, 3 backend failure.

#ifndef TRANSFUSION_CLI_HPP_
#define TRANSFUSION_CLI_HPP_

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "transfusion/config.hpp"
#include "transfusion/conll_io.hpp"
#include "transfusion/error.hpp"
#include "transfusion/evaluation.hpp"
#include "transfusion/fusion.hpp"
#include "transfusion/projection.hpp"
#include "transfusion/prompts.hpp"
#include "transfusion/services.hpp"
#include "transfusion/text_io.hpp"

namespace transfusion::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kZeroYield = 2,
  kBackendError = 3,
};

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string marker_style;
  std::string mode;
};

namespace detail {

inline void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path,
                  std::string("pipeline config JSON (default: $") + kConfigEnvVar + ")");
  cmd->add_option("--seed", flags.seed, "seed for mock backends");
  cmd->add_option("--marker-style", flags.marker_style, "xml or square");
}

// Config from --config, then $TRANSFUSION_CONFIG, then defaults; flags win.
inline PipelineConfig resolve_config(const CommonFlags& flags) {
  PipelineConfig config;
  std::string path = flags.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnvVar); env != nullptr) path = env;
  }
  if (!path.empty()) config = load_config(path);
  if (flags.seed) config.seed = *flags.seed;
  if (!flags.marker_style.empty()) config.marker_style = marker_style_from_string(flags.marker_style);
  return config;
}

inline BatchOptions batching(const PipelineConfig& c) { return {c.batch_size, c.max_in_flight}; }

inline std::string rejection_log(const std::vector<Rejection>& rejections) {
  std::string out;
  for (const auto& r : rejections) {
    nlohmann::ordered_json j;
    j["index"] = r.index;
    j["reason"] = r.reason;
    out += j.dump() + "\n";
  }
  return out;
}

inline void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
  } else {
    write_text_file(path, text);
  }
}

inline std::vector<TokenSequence> read_token_lines(const std::string& path) {
  std::vector<TokenSequence> out;
  const std::string text = read_text_file(path);
  for (auto line : split_lines(strip_bom(text))) {
    out.push_back(split_whitespace(line));
  }
  return out;
}

// ----------------------------------------------------------------------------

struct ProjectArgs {
  CommonFlags common;
  std::string input, output, method = "markers", alignments, target, src_lang, tgt_lang,
      rejections;
};

inline int run_project(const ProjectArgs& a, std::ostream& out, std::ostream& err) {
  const Document src = read_conll(a.input);
  Document projected{{}, a.output};
  std::vector<Rejection> rejections;

  if (a.method == "alignment") {
    if (a.alignments.empty() || a.target.empty()) {
      throw InputError("alignment projection needs --alignments and --target");
    }
    std::vector<std::vector<AlignmentLink>> links;
    try {
      links = parse_alignment_file(read_text_file(a.alignments));
    } catch (const InputError& e) {
      throw InputError(a.alignments + ": " + e.what());
    }
    auto targets = read_token_lines(a.target);
    while (!links.empty() && links.size() > src.sentences.size() && links.back().empty()) {
      links.pop_back();
    }
    while (!targets.empty() && targets.size() > src.sentences.size() && targets.back().empty()) {
      targets.pop_back();
    }
    if (links.size() != src.sentences.size() || targets.size() != src.sentences.size()) {
      throw InputError("alignment (" + std::to_string(links.size()) + " lines) and target (" +
                       std::to_string(targets.size()) + " lines) must match the " +
                       std::to_string(src.sentences.size()) + " input sentences");
    }
    for (std::size_t i = 0; i < src.sentences.size(); ++i) {
      try {
        projected.sentences.push_back(
            project_by_alignment(src.sentences[i], links[i], targets[i], a.tgt_lang));
      } catch (const InputError& e) {
        throw InputError("sentence " + std::to_string(i) + ": " + e.what());
      }
    }
  } else if (a.method == "markers") {
    const PipelineConfig config = resolve_config(a.common);
    if (a.tgt_lang.empty()) throw InputError("marker projection needs --tgt-lang");
    const ParseMode mode =
        a.common.mode.empty() ? config.projection_mode : parse_mode_from_string(a.common.mode);
    const std::string src_lang = a.src_lang.empty() ? config.src_languages.at(0) : a.src_lang;
    const LabelSet labels = config.label_set();
    const auto translator = make_translator(config.mt_endpoint, config);

    std::vector<std::string> marked;
    for (const auto& s : src.sentences) {
      marked.push_back(insert_markers(s, labels, config.marker_style).text);
    }
    const auto translated = transfusion::detail::translate_all(
        *translator, marked, src_lang, a.tgt_lang, true, batching(config));
    for (std::size_t i = 0; i < src.sentences.size(); ++i) {
      auto outcome = project_by_markers(src.sentences[i], translated[i], labels,
                                        {mode, config.marker_style, a.tgt_lang});
      if (outcome.ok()) {
        projected.sentences.push_back(std::move(*outcome.sentence));
      } else {
        rejections.push_back({i, outcome.reason});
      }
    }
  } else {
    throw InputError("unknown projection method '" + a.method + "' (markers or alignment)");
  }

  emit(a.output, serialize_conll(projected), out);
  emit(a.rejections, rejection_log(rejections), err);
  if (!src.sentences.empty() && projected.sentences.empty()) return kZeroYield;
  return kOk;
}

// ----------------------------------------------------------------------------

struct TrainsetArgs {
  CommonFlags common;
  std::string input, output, stats, rejections, src_lang, tgt_lang;
  bool include_source = false;
};

inline int run_build_trainset(const TrainsetArgs& a, std::ostream& out, std::ostream& err) {
  const PipelineConfig config = resolve_config(a.common);
  const Document src = read_conll(a.input);
  const auto translator = make_translator(config.mt_endpoint, config);

  TrainsetOptions options;
  options.src_lang = a.src_lang.empty() ? config.src_languages.at(0) : a.src_lang;
  options.labels = config.label_set();
  options.style = config.marker_style;
  options.mode =
      a.common.mode.empty() ? config.projection_mode : parse_mode_from_string(a.common.mode);
  options.batching = batching(config);
  options.include_source_only = a.include_source;

  const MixedDataset data = build_mixed_trainset(src, *translator, a.tgt_lang, options);

  std::string jsonl;
  for (const auto& ex : data.examples) jsonl += to_jsonl_line(ex);
  emit(a.output, jsonl, out);

  const ProjectionStats totals = data.totals();
  nlohmann::ordered_json stats;
  stats["tgt_lang"] = a.tgt_lang;
  stats["sentences"] = src.sentences.size();
  stats["accepted"] = totals.accepted;
  stats["rejected"] = totals.rejected;
  stats["examples"] = data.examples.size();
  stats["per_language"] = nlohmann::ordered_json::object();
  for (const auto& [lang, s] : data.per_language) {
    stats["per_language"][lang] = {{"accepted", s.accepted}, {"rejected", s.rejected}};
  }
  emit(a.stats, stats.dump(2) + "\n", err);
  if (!a.rejections.empty()) emit(a.rejections, rejection_log(data.rejections), err);
  if (!src.sentences.empty() && totals.accepted == 0) return kZeroYield;
  return kOk;
}

// ----------------------------------------------------------------------------

struct FuseArgs {
  CommonFlags common;
  std::string input, output, predictions, tgt_lang;
};

inline int run_fuse(const FuseArgs& a, std::ostream& out, std::ostream&) {
  const std::string mode = a.common.mode.empty() ? "transfusion-input" : a.common.mode;
  if (mode != "transfusion-input" && mode != "translate-correct") {
    throw InputError("unknown fuse mode '" + mode + "' (transfusion-input or translate-correct)");
  }
  if (mode == "translate-correct" && a.predictions.empty()) {
    throw InputError("translate-correct mode needs --predictions");
  }
  const PipelineConfig config = resolve_config(a.common);
  config.validate();
  const Document tgt = read_conll(a.input, {}, a.tgt_lang);
  const auto translator = make_translator(config.mt_endpoint, config);

  if (mode == "transfusion-input") {
    std::vector<std::shared_ptr<const Tagger>> taggers;
    std::vector<SourceAnnotator> annotators;
    for (const auto& lang : config.src_languages) {
      taggers.push_back(make_tagger(config.tagger_endpoints.at(lang), config));
      annotators.push_back({lang, taggers.back().get()});
    }
    InferenceOptions options;
    options.tgt_lang = a.tgt_lang;
    options.labels = config.label_set();
    options.style = config.marker_style;
    options.batching = batching(config);
    const auto examples = build_inference_inputs(tgt, *translator, annotators, options);
    std::string jsonl;
    for (const auto& ex : examples) jsonl += to_jsonl_line(ex);
    emit(a.output, jsonl, out);
    return kOk;
  }

  const Document predictions = read_conll(a.predictions, {}, a.tgt_lang);
  if (predictions.sentences.size() != tgt.sentences.size()) {
    throw InputError("predictions have " + std::to_string(predictions.sentences.size()) +
                     " sentences, input has " + std::to_string(tgt.sentences.size()));
  }
  for (std::size_t i = 0; i < tgt.sentences.size(); ++i) {
    if (predictions.sentences[i].tokens != tgt.sentences[i].tokens) {
      throw InputError("sentence " + std::to_string(i) + ": prediction tokens differ from input");
    }
  }
  const std::string& src_lang = config.src_languages.at(0);
  const auto tagger = make_tagger(config.tagger_endpoints.at(src_lang), config);
  TranslateCorrectOptions options;
  options.src_lang = src_lang;
  options.tgt_lang = a.tgt_lang;
  options.labels = config.label_set();
  options.style = config.marker_style;
  options.batching = batching(config);
  emit(a.output, serialize_conll(translate_correct(predictions, *translator, *tagger, options)),
       out);
  return kOk;
}

// ----------------------------------------------------------------------------

struct EvaluateArgs {
  std::string gold, pred, manifest, output;
  bool json_to_stdout = false;
};

inline ScoreReport score_files(const std::string& gold, const std::string& pred) {
  return score(read_conll(gold), read_conll(pred));
}

inline int run_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream&) {
  nlohmann::ordered_json report;
  std::string table;
  if (!a.manifest.empty()) {
    nlohmann::json manifest;
    try {
      manifest = nlohmann::json::parse(read_text_file(a.manifest));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(a.manifest + ": " + e.what());
    }
    const auto base = std::filesystem::path(a.manifest).parent_path();
    auto resolve = [&base](const std::string& p) {
      std::filesystem::path path(p);
      return (path.is_relative() ? base / path : path).string();
    };
    std::map<std::string, ScoreReport> reports;
    for (const auto& [lang, files] : manifest.items()) {
      try {
        reports[lang] = score_files(resolve(files.at("gold").get<std::string>()),
                                    resolve(files.at("pred").get<std::string>()));
      } catch (const nlohmann::json::exception& e) {
        throw InputError(a.manifest + ": entry '" + lang + "': " + e.what());
      } catch (const InputError& e) {
        throw InputError(lang + ": " + e.what());
      }
    }
    const AggregateReport agg = aggregate(reports);
    report["languages"] = nlohmann::ordered_json::object();
    for (const auto& [lang, r] : reports) report["languages"][lang] = to_json(r);
    report["aggregate"] = to_json(agg);
    table = render_table(agg);
  } else {
    if (a.gold.empty() || a.pred.empty()) {
      throw InputError("evaluate needs --gold and --pred, or --manifest");
    }
    const ScoreReport r = score_files(a.gold, a.pred);
    report = to_json(r);
    table = render_table(r);
  }
  const std::string json_text = report.dump(2) + "\n";
  if (!a.output.empty()) write_text_file(a.output, json_text);
  out << (a.json_to_stdout ? json_text : table);
  return kOk;
}

// ----------------------------------------------------------------------------

struct PromptArgs {
  CommonFlags common;
  std::string input, english, kind = "self-fusion", language_name, alternative, output;
  bool send = false;
  double temperature = 0.0;
};

struct EnglishTagged {
  TokenSequence tokens;
  TagSequence tags;
};

inline std::vector<EnglishTagged> read_english_jsonl(const std::string& path) {
  std::vector<EnglishTagged> out;
  const std::string text = read_text_file(path);
  const auto lines = split_lines(strip_bom(text));
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (split_whitespace(lines[n]).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(lines[n]);
      EnglishTagged e{j.at("tokens").get<TokenSequence>(), j.at("tags").get<TagSequence>()};
      if (e.tokens.size() != e.tags.size()) throw InputError("tokens and tags differ in length");
      for (const auto& t : e.tags) parse_tag(t);
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path + ": line " + std::to_string(n + 1) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError(path + ": line " + std::to_string(n + 1) + ": " + e.what());
    }
  }
  return out;
}

inline int run_prompt(const PromptArgs& a, std::ostream& out, std::ostream&) {
  if (a.kind != "self-fusion" && a.kind != "selection") {
    throw InputError("unknown prompt kind '" + a.kind + "' (self-fusion or selection)");
  }
  const Document tgt = read_conll(a.input);
  const auto english = read_english_jsonl(a.english);
  if (english.size() != tgt.sentences.size()) {
    throw InputError("English file has " + std::to_string(english.size()) +
                     " sentences, target has " + std::to_string(tgt.sentences.size()));
  }
  std::optional<Document> alternative;
  if (a.kind == "selection") {
    if (a.alternative.empty()) throw InputError("selection prompts need --alternative");
    alternative = read_conll(a.alternative);
    if (alternative->sentences.size() != tgt.sentences.size()) {
      throw InputError("alternative predictions have " +
                       std::to_string(alternative->sentences.size()) + " sentences, target has " +
                       std::to_string(tgt.sentences.size()));
    }
  }
  const std::string language = a.language_name.empty() ? "the target language" : a.language_name;

  const PipelineConfig config = resolve_config(a.common);
  const LabelSet labels = config.label_set();
  std::shared_ptr<const Generator> generator;
  if (a.send) {
    if (!config.generate_endpoint) throw InputError("--send needs generate_endpoint in the config");
    generator = make_generator(*config.generate_endpoint, config);
  }

  std::vector<std::string> prompts;
  for (std::size_t i = 0; i < tgt.sentences.size(); ++i) {
    const Sentence& s = tgt.sentences[i];
    if (a.kind == "self-fusion") {
      std::vector<TaggedToken> tagged;
      for (std::size_t k = 0; k < english[i].tokens.size(); ++k) {
        tagged.emplace_back(english[i].tokens[k], english[i].tags[k]);
      }
      if (tagged.empty()) throw InputError("English sentence " + std::to_string(i) + " is empty");
      prompts.push_back(build_self_fusion_prompt(s.tokens, tagged, language, labels));
    } else {
      prompts.push_back(build_selection_prompt(join_tokens(s.tokens),
                                               join_tokens(english[i].tokens),
                                               labeled_surfaces(s),
                                               labeled_surfaces(alternative->sentences[i]),
                                               language));
    }
  }

  std::vector<std::string> replies;
  if (generator) {
    replies = run_batched<std::string>(
        prompts.size(), batching(config), [&](std::size_t begin, std::size_t end) {
          std::vector<std::string> r;
          for (std::size_t i = begin; i < end; ++i) {
            try {
              r.push_back(generator->generate({prompts[i], a.temperature}));
            } catch (const BackendError& e) {
              throw BackendError("prompt " + std::to_string(i) + ": " + e.what());
            }
          }
          return r;
        });
  }

  std::string jsonl;
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    nlohmann::ordered_json j;
    j["id"] = i;
    j["prompt"] = prompts[i];
    if (generator) j["reply"] = replies[i];
    jsonl += j.dump() + "\n";
  }
  emit(a.output, jsonl, out);
  return kOk;
}

}  // namespace detail

// Parses argv and runs one subcommand. Never throws.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Cross-lingual NER label projection and translation-and-fusion toolkit",
               "transfusion"};
  app.require_subcommand(1);

  detail::ProjectArgs project;
  auto* project_cmd = app.add_subcommand("project", "project entity labels onto another language");
  detail::add_common(project_cmd, project.common);
  project_cmd->add_option("--input", project.input, "source CoNLL file")->required();
  project_cmd->add_option("--output", project.output, "projected CoNLL file ('-' for stdout)")
      ->required();
  project_cmd->add_option("--method", project.method, "markers or alignment");
  project_cmd->add_option("--mode", project.common.mode, "strict or lenient marker parsing");
  project_cmd->add_option("--alignments", project.alignments, "Pharaoh i-j links, one line per sentence");
  project_cmd->add_option("--target", project.target, "target tokens, one sentence per line");
  project_cmd->add_option("--src-lang", project.src_lang, "source language code");
  project_cmd->add_option("--tgt-lang", project.tgt_lang, "target language code");
  project_cmd->add_option("--rejections", project.rejections, "rejection log JSONL (default stderr)");

  detail::TrainsetArgs trainset;
  auto* trainset_cmd =
      app.add_subcommand("build-trainset", "build fusion training examples by mark-then-translate");
  detail::add_common(trainset_cmd, trainset.common);
  trainset_cmd->add_option("--input", trainset.input, "annotated source CoNLL file")->required();
  trainset_cmd->add_option("--tgt-lang", trainset.tgt_lang, "target language code")->required();
  trainset_cmd->add_option("--output", trainset.output, "fusion examples JSONL ('-' for stdout)")
      ->required();
  trainset_cmd->add_option("--stats", trainset.stats, "stats JSON (default stderr)");
  trainset_cmd->add_option("--rejections", trainset.rejections, "rejection log JSONL");
  trainset_cmd->add_option("--src-lang", trainset.src_lang, "source language code");
  trainset_cmd->add_option("--mode", trainset.common.mode, "strict or lenient marker parsing");
  trainset_cmd->add_flag("--include-source", trainset.include_source,
                         "also emit source-only examples");

  detail::FuseArgs fuse;
  auto* fuse_cmd = app.add_subcommand("fuse", "fuse high-resource annotations into target text");
  detail::add_common(fuse_cmd, fuse.common);
  fuse_cmd->add_option("--input", fuse.input, "target CoNLL file (labels ignored)")->required();
  fuse_cmd->add_option("--tgt-lang", fuse.tgt_lang, "target language code")->required();
  fuse_cmd->add_option("--output", fuse.output, "output file ('-' for stdout)")->required();
  fuse_cmd->add_option("--mode", fuse.common.mode, "transfusion-input or translate-correct");
  fuse_cmd->add_option("--predictions", fuse.predictions, "target predictions CoNLL");

  detail::EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "entity-level precision, recall and F1");
  evaluate_cmd->add_option("--gold", evaluate.gold, "gold CoNLL file");
  evaluate_cmd->add_option("--pred", evaluate.pred, "predicted CoNLL file");
  evaluate_cmd->add_option("--manifest", evaluate.manifest,
                           "JSON {lang: {\"gold\": path, \"pred\": path}}");
  evaluate_cmd->add_option("--output", evaluate.output, "report JSON file");
  evaluate_cmd->add_flag("--json", evaluate.json_to_stdout, "print JSON instead of the table");

  detail::PromptArgs prompt;
  auto* prompt_cmd = app.add_subcommand("prompt", "build Self-Fusion prompts");
  detail::add_common(prompt_cmd, prompt.common);
  prompt_cmd->add_option("--input", prompt.input, "target CoNLL file")->required();
  prompt_cmd->add_option("--english", prompt.english,
                         "tagged English JSONL {\"tokens\", \"tags\"}")->required();
  prompt_cmd->add_option("--kind", prompt.kind, "self-fusion or selection");
  prompt_cmd->add_option("--language-name", prompt.language_name, "e.g. Wolof");
  prompt_cmd->add_option("--alternative", prompt.alternative,
                         "second candidate predictions CoNLL (selection)");
  prompt_cmd->add_option("--output", prompt.output, "prompts JSONL ('-' for stdout)")->required();
  prompt_cmd->add_flag("--send", prompt.send, "send prompts to the generate endpoint");
  prompt_cmd->add_option("--temperature", prompt.temperature, "generation temperature");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*project_cmd) return detail::run_project(project, out, err);
    if (*trainset_cmd) return detail::run_build_trainset(trainset, out, err);
    if (*fuse_cmd) return detail::run_fuse(fuse, out, err);
    if (*evaluate_cmd) return detail::run_evaluate(evaluate, out, err);
    if (*prompt_cmd) return detail::run_prompt(prompt, out, err);
  } catch (const BackendError& e) {
    err << "error: backend failure: " << e.what() << "\n";
    return kBackendError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace transfusion::cli

#endif  // TRANSFUSION_CLI_HPP_
