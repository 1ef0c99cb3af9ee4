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

// Pipeline configuration and construction of service backends from
// endpoint strings.
//
// Endpoints are either "http://host:port[/prefix]" or a mock specification
// "mock:<kind>[?key=value&...]":
//
//   translators  mock:identity
//                mock:dictionary?seed=7&reverse=1&pivot=eng
//                (either may add &corrupt=<token>, see MarkerCorruptingTranslator)
//   taggers      mock:oracle?gold=<conll>
//                mock:noisy?gold=<conll>&flip_rate=0.2&seed=3
//   generators   mock:canned?file=<jsonl of {"prompt", "reply"}>
//
// Relative paths are resolved against the configuration file's directory.
// A mock without an explicit seed uses the configuration seed.

#ifndef TRANSFUSION_CONFIG_HPP_
#define TRANSFUSION_CONFIG_HPP_

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "transfusion/conll_io.hpp"
#include "transfusion/error.hpp"
#include "transfusion/http_client.hpp"
#include "transfusion/marker_codec.hpp"
#include "transfusion/ner_core.hpp"
#include "transfusion/services.hpp"
#include "transfusion/text_io.hpp"

namespace transfusion {

inline constexpr const char* kConfigEnvVar = "TRANSFUSION_CONFIG";

struct PipelineConfig {
  std::string mt_endpoint;
  std::map<std::string, std::string> tagger_endpoints;  // language -> endpoint
  std::optional<std::string> generate_endpoint;
  std::vector<std::string> src_languages{"eng"};  // first is the primary source
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
  MarkerStyle marker_style = MarkerStyle::kXml;
  ParseMode projection_mode = ParseMode::kLenient;

  std::vector<std::string> labels{"PER", "LOC", "ORG"};
  std::uint64_t seed = 0;
  int max_retries = 3;
  int backoff_ms = 200;
  int timeout_ms = 120000;
  std::string api_token;
  std::filesystem::path base_dir;  // for relative paths in mock endpoints

  LabelSet label_set() const { return LabelSet(labels); }

  // Invariants needed by commands that talk to backends.
  void validate() const {
    if (src_languages.empty()) throw InputError("config: src_languages must not be empty");
    if (batch_size == 0) throw InputError("config: batch_size must be positive");
    if (max_in_flight == 0) throw InputError("config: max_in_flight must be positive");
    for (const auto& lang : src_languages) {
      if (tagger_endpoints.find(lang) == tagger_endpoints.end()) {
        throw InputError("config: no tagger endpoint for source language '" + lang + "'");
      }
    }
    label_set();
  }
};

inline std::string to_string(MarkerStyle style) {
  return style == MarkerStyle::kXml ? "xml" : "square";
}

inline MarkerStyle marker_style_from_string(std::string_view s) {
  if (s == "xml") return MarkerStyle::kXml;
  if (s == "square") return MarkerStyle::kSquare;
  throw InputError("unknown marker style '" + std::string(s) + "' (xml or square)");
}

inline std::string to_string(ParseMode mode) {
  return mode == ParseMode::kStrict ? "strict" : "lenient";
}

inline ParseMode parse_mode_from_string(std::string_view s) {
  if (s == "strict") return ParseMode::kStrict;
  if (s == "lenient") return ParseMode::kLenient;
  throw InputError("unknown projection mode '" + std::string(s) + "' (strict or lenient)");
}

inline PipelineConfig config_from_json(const nlohmann::json& j,
                                       std::filesystem::path base_dir = {}) {
  PipelineConfig c;
  c.base_dir = std::move(base_dir);
  try {
    c.mt_endpoint = j.value("mt_endpoint", c.mt_endpoint);
    c.tagger_endpoints = j.value("tagger_endpoints", c.tagger_endpoints);
    if (j.contains("generate_endpoint") && !j["generate_endpoint"].is_null()) {
      c.generate_endpoint = j["generate_endpoint"].get<std::string>();
    }
    c.src_languages = j.value("src_languages", c.src_languages);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.marker_style = marker_style_from_string(j.value("marker_style", std::string("xml")));
    c.projection_mode = parse_mode_from_string(j.value("projection_mode", std::string("lenient")));
    c.labels = j.value("labels", c.labels);
    c.seed = j.value("seed", c.seed);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    c.api_token = j.value("api_token", c.api_token);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

// ---------------------------------------------------------------------------
// Endpoint factories

struct MockSpec {
  std::string kind;
  std::map<std::string, std::string> params;

  std::string get(const std::string& key, const std::string& fallback = {}) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
  bool has(const std::string& key) const { return params.count(key) != 0; }
};

inline std::optional<MockSpec> parse_mock_spec(std::string_view endpoint) {
  constexpr std::string_view prefix = "mock:";
  if (endpoint.substr(0, prefix.size()) != prefix) return std::nullopt;
  endpoint.remove_prefix(prefix.size());
  MockSpec spec;
  const auto q = endpoint.find('?');
  spec.kind = std::string(endpoint.substr(0, q));
  if (q == std::string_view::npos) return spec;
  std::string_view rest = endpoint.substr(q + 1);
  while (!rest.empty()) {
    const auto amp = rest.find('&');
    const std::string_view item = rest.substr(0, amp);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw InputError("mock endpoint parameter '" + std::string(item) + "' needs a value");
    }
    spec.params[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
    if (amp == std::string_view::npos) break;
    rest.remove_prefix(amp + 1);
  }
  return spec;
}

namespace detail {

inline std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("bad " + what + " '" + s + "'");
  }
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("bad " + what + " '" + s + "'");
  }
}

inline std::filesystem::path resolve(const PipelineConfig& c, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !c.base_dir.empty()) path = c.base_dir / path;
  return path;
}

inline HttpOptions http_options(const PipelineConfig& c) {
  HttpOptions o;
  o.bearer_token = c.api_token;
  o.max_retries = c.max_retries;
  o.backoff = std::chrono::milliseconds(c.backoff_ms);
  o.timeout = std::chrono::milliseconds(c.timeout_ms);
  o.max_in_flight = c.max_in_flight;
  return o;
}

inline Document load_gold(const PipelineConfig& c, const MockSpec& spec) {
  if (!spec.has("gold")) throw InputError("mock:" + spec.kind + " needs gold=<conll file>");
  return read_conll(resolve(c, spec.get("gold")));
}

}  // namespace detail

inline std::shared_ptr<const Translator> make_translator(const std::string& endpoint,
                                                         const PipelineConfig& c) {
  if (endpoint.empty()) throw InputError("no machine translation endpoint configured");
  auto spec = parse_mock_spec(endpoint);
  if (!spec) return std::make_shared<HttpTranslator>(endpoint, detail::http_options(c));
  std::shared_ptr<const Translator> base;
  if (spec->kind == "identity") {
    base = std::make_shared<IdentityTranslator>();
  } else if (spec->kind == "dictionary") {
    const std::uint64_t seed =
        spec->has("seed") ? detail::parse_u64(spec->get("seed"), "seed") : c.seed;
    base = std::make_shared<DictionaryTranslator>(seed, spec->get("reverse", "0") == "1",
                                                  spec->get("pivot", "eng"));
  } else {
    throw InputError("unknown mock translator '" + spec->kind + "'");
  }
  if (spec->has("corrupt")) {
    return std::make_shared<MarkerCorruptingTranslator>(base, spec->get("corrupt"));
  }
  return base;
}

inline std::shared_ptr<const Tagger> make_tagger(const std::string& endpoint,
                                                 const PipelineConfig& c) {
  auto spec = parse_mock_spec(endpoint);
  if (!spec) return std::make_shared<HttpTagger>(endpoint, detail::http_options(c));
  if (spec->kind == "oracle") return std::make_shared<OracleTagger>(detail::load_gold(c, *spec));
  if (spec->kind == "noisy") {
    const std::uint64_t seed =
        spec->has("seed") ? detail::parse_u64(spec->get("seed"), "seed") : c.seed;
    return std::make_shared<NoisyTagger>(
        detail::load_gold(c, *spec), detail::parse_double(spec->get("flip_rate", "0"), "flip_rate"),
        seed);
  }
  throw InputError("unknown mock tagger '" + spec->kind + "'");
}

inline std::shared_ptr<const Generator> make_generator(const std::string& endpoint,
                                                       const PipelineConfig& c) {
  auto spec = parse_mock_spec(endpoint);
  if (!spec) return std::make_shared<HttpGenerator>(endpoint, detail::http_options(c));
  if (spec->kind != "canned") throw InputError("unknown mock generator '" + spec->kind + "'");
  auto generator = std::make_shared<CannedGenerator>();
  if (spec->has("file")) {
    const auto path = detail::resolve(c, spec->get("file"));
    const std::string text = read_text_file(path);
    const auto lines = split_lines(text);
    for (std::size_t n = 0; n < lines.size(); ++n) {
      if (lines[n].empty()) continue;
      try {
        const auto j = nlohmann::json::parse(lines[n]);
        generator->add(j.at("prompt").get<std::string>(), j.at("reply").get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        throw InputError(path.string() + ": line " + std::to_string(n + 1) + ": " + e.what());
      }
    }
  }
  return generator;
}

}  // namespace transfusion

#endif  // TRANSFUSION_CONFIG_HPP_
