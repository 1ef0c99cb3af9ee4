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

// Contracts for the external model services (machine translation, NER
// tagging, text generation) and deterministic mock backends.

#ifndef TRANSFUSION_SERVICES_HPP_
#define TRANSFUSION_SERVICES_HPP_

#include <algorithm>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "transfusion/conll_io.hpp"
#include "transfusion/error.hpp"
#include "transfusion/marker_codec.hpp"
#include "transfusion/ner_core.hpp"

namespace transfusion {

using json = nlohmann::json;

struct TranslateRequest {
  std::vector<std::string> texts;
  std::string src_lang;
  std::string tgt_lang;
  bool preserve_markers = true;
};

struct TagRequest {
  std::vector<TokenSequence> sentences;
  std::string language;
  LabelSet label_set;
};

struct GenerateRequest {
  std::string prompt;
  double temperature = 0.0;
};

inline void validate(const TranslateRequest& req) {
  if (req.texts.empty()) throw InputError("translate request has no texts");
  if (req.src_lang.empty() || req.tgt_lang.empty()) {
    throw InputError("translate request needs source and target language codes");
  }
  for (std::size_t i = 0; i < req.texts.size(); ++i) {
    if (req.texts[i].empty()) {
      throw InputError("translate request text " + std::to_string(i) + " is empty");
    }
  }
}

inline void validate(const TagRequest& req) {
  if (req.sentences.empty()) throw InputError("tag request has no sentences");
  if (req.language.empty()) throw InputError("tag request needs a language code");
  for (std::size_t i = 0; i < req.sentences.size(); ++i) {
    if (req.sentences[i].empty()) {
      throw InputError("tag request sentence " + std::to_string(i) + " is empty");
    }
  }
}

inline void validate(const GenerateRequest& req) {
  if (req.prompt.empty()) throw InputError("generate request has an empty prompt");
  if (!(req.temperature >= 0.0)) throw InputError("generate temperature must be >= 0");
}

// Public entry points validate the request and check that the backend kept
// the batch count (and, for tagging, per-sentence lengths); implementations
// override the do_* hooks. Implementations must be safe for concurrent use.
class Translator {
 public:
  virtual ~Translator() = default;

  std::vector<std::string> translate(const TranslateRequest& req) const {
    validate(req);
    auto out = do_translate(req);
    if (out.size() != req.texts.size()) {
      throw ProtocolError("translator returned " + std::to_string(out.size()) +
                          " texts for " + std::to_string(req.texts.size()) + " inputs");
    }
    return out;
  }

 protected:
  virtual std::vector<std::string> do_translate(const TranslateRequest& req) const = 0;
};

class Tagger {
 public:
  virtual ~Tagger() = default;

  std::vector<TagSequence> tag(const TagRequest& req) const {
    validate(req);
    auto out = do_tag(req);
    if (out.size() != req.sentences.size()) {
      throw ProtocolError("tagger returned " + std::to_string(out.size()) +
                          " sequences for " + std::to_string(req.sentences.size()) +
                          " sentences");
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].size() != req.sentences[i].size()) {
        throw ProtocolError("tagger returned " + std::to_string(out[i].size()) +
                            " tags for sentence " + std::to_string(i) + " of " +
                            std::to_string(req.sentences[i].size()) + " tokens");
      }
    }
    return out;
  }

 protected:
  virtual std::vector<TagSequence> do_tag(const TagRequest& req) const = 0;
};

class Generator {
 public:
  virtual ~Generator() = default;

  std::string generate(const GenerateRequest& req) const {
    validate(req);
    return do_generate(req);
  }

 protected:
  virtual std::string do_generate(const GenerateRequest& req) const = 0;
};

// ---------------------------------------------------------------------------
// Wire format (HTTP POST bodies)

inline json to_json(const TranslateRequest& req) {
  return {{"texts", req.texts},
          {"src_lang", req.src_lang},
          {"tgt_lang", req.tgt_lang},
          {"preserve_markers", req.preserve_markers}};
}

inline json to_json(const TagRequest& req) {
  return {{"sentences", req.sentences},
          {"language", req.language},
          {"label_set", req.label_set.names()}};
}

inline json to_json(const GenerateRequest& req) {
  return {{"prompt", req.prompt}, {"temperature", req.temperature}};
}

inline TranslateRequest translate_request_from_json(const json& j) {
  return {j.at("texts").get<std::vector<std::string>>(), j.at("src_lang").get<std::string>(),
          j.at("tgt_lang").get<std::string>(), j.value("preserve_markers", true)};
}

inline TagRequest tag_request_from_json(const json& j) {
  return {j.at("sentences").get<std::vector<TokenSequence>>(), j.at("language").get<std::string>(),
          LabelSet(j.value("label_set", std::vector<std::string>{}))};
}

inline GenerateRequest generate_request_from_json(const json& j) {
  return {j.at("prompt").get<std::string>(), j.value("temperature", 0.0)};
}

// Responses: {"texts": [...]}, {"tags": [[...], ...]}, {"text": "..."}.
// Errors: {"error": "..."} with a non-2xx status.

// ---------------------------------------------------------------------------
// Mock backends

namespace detail {

inline std::uint64_t fnv1a(std::string_view data,
                           std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::string sentence_key(const TokenSequence& tokens) {
  return join_tokens(tokens, "\x1f");
}

inline bool is_marker_token(std::string_view token) {
  return match_marker(token, MarkerStyle::kXml).has_value() ||
         match_marker(token, MarkerStyle::kSquare).has_value();
}

}  // namespace detail

// Returns every text unchanged.
class IdentityTranslator : public Translator {
 protected:
  std::vector<std::string> do_translate(const TranslateRequest& req) const override {
    return req.texts;
  }
};

// Invertible pseudo-translator with a published rule.
//
// Every ASCII letter is rotated within its case by shift = seed % 25 + 1
// positions when translating out of the pivot language, and back by the same
// amount when translating into it; other bytes are unchanged. With reversal
// enabled the token order of the whole text is reversed and each marker token
// swaps between its opening and closing form, so a marked entity keeps its
// brackets. Marker tokens (<L>, </L>, [L], [/L]) are never rotated. Pairs
// that do not involve the pivot exactly once are unsupported.
class DictionaryTranslator : public Translator {
 public:
  explicit DictionaryTranslator(std::uint64_t seed, bool reverse = false,
                                std::string pivot = "eng")
      : shift_(static_cast<int>(seed % 25) + 1), reverse_(reverse), pivot_(std::move(pivot)) {}

  int shift() const { return shift_; }
  bool reverses() const { return reverse_; }
  const std::string& pivot() const { return pivot_; }

  std::string map_token(std::string_view token, bool outbound) const {
    std::string out(token);
    if (detail::is_marker_token(token)) return out;
    const int k = outbound ? shift_ : 26 - shift_;
    for (char& c : out) {
      if (c >= 'a' && c <= 'z') c = static_cast<char>('a' + (c - 'a' + k) % 26);
      else if (c >= 'A' && c <= 'Z') c = static_cast<char>('A' + (c - 'A' + k) % 26);
    }
    return out;
  }

 protected:
  std::vector<std::string> do_translate(const TranslateRequest& req) const override {
    const bool outbound = req.src_lang == pivot_ && req.tgt_lang != pivot_;
    const bool inbound = req.tgt_lang == pivot_ && req.src_lang != pivot_;
    if (!outbound && !inbound) {
      throw BackendError("unsupported language pair " + req.src_lang + " -> " + req.tgt_lang);
    }
    std::vector<std::string> out;
    out.reserve(req.texts.size());
    for (const auto& text : req.texts) {
      TokenSequence tokens = split_whitespace(text);
      for (auto& token : tokens) token = map_token(token, outbound);
      if (reverse_) {
        std::reverse(tokens.begin(), tokens.end());
        for (auto& token : tokens) token = flip_marker(token);
      }
      out.push_back(join_tokens(tokens));
    }
    return out;
  }

 private:
  static std::string flip_marker(const std::string& token) {
    for (auto style : {MarkerStyle::kXml, MarkerStyle::kSquare}) {
      if (auto m = match_marker(token, style)) {
        return m->closing ? open_marker(m->label, style) : close_marker(m->label, style);
      }
    }
    return token;
  }

  int shift_;
  bool reverse_;
  std::string pivot_;
};

// Wraps another translator and deletes the first marker token from the
// output of every input text that contains `trigger` as a token. Inputs
// without markers pass through unchanged.
class MarkerCorruptingTranslator : public Translator {
 public:
  MarkerCorruptingTranslator(std::shared_ptr<const Translator> inner, std::string trigger)
      : inner_(std::move(inner)), trigger_(std::move(trigger)) {}

 protected:
  std::vector<std::string> do_translate(const TranslateRequest& req) const override {
    auto out = inner_->translate(req);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto source = split_whitespace(req.texts[i]);
      if (std::find(source.begin(), source.end(), trigger_) == source.end()) continue;
      auto tokens = split_whitespace(out[i]);
      auto it = std::find_if(tokens.begin(), tokens.end(),
                             [](const std::string& t) { return detail::is_marker_token(t); });
      if (it != tokens.end()) tokens.erase(it);
      out[i] = join_tokens(tokens);
    }
    return out;
  }

 private:
  std::shared_ptr<const Translator> inner_;
  std::string trigger_;
};

// Looks sentences up in a gold document by exact token sequence.
class OracleTagger : public Tagger {
 public:
  explicit OracleTagger(const Document& gold) {
    for (const auto& sentence : gold.sentences) {
      gold_.emplace(detail::sentence_key(sentence.tokens), tags_of(sentence));
      for (const auto& span : sentence.spans) labels_.add(span.label);
    }
  }

  const LabelSet& gold_labels() const { return labels_; }

 protected:
  std::vector<TagSequence> do_tag(const TagRequest& req) const override {
    std::vector<TagSequence> out;
    out.reserve(req.sentences.size());
    for (const auto& tokens : req.sentences) {
      auto it = gold_.find(detail::sentence_key(tokens));
      if (it == gold_.end()) {
        throw BackendError("oracle tagger has no gold annotation for '" +
                           join_tokens(tokens) + "'");
      }
      out.push_back(it->second);
    }
    return out;
  }

 private:
  std::unordered_map<std::string, TagSequence> gold_;
  LabelSet labels_;
};

// Oracle tags with each tag independently replaced, with probability
// flip_rate, by a different tag drawn uniformly from {O, B-L, I-L}. The
// random stream of a sentence depends only on the seed and its tokens.
class NoisyTagger : public Tagger {
 public:
  NoisyTagger(const Document& gold, double flip_rate, std::uint64_t seed)
      : oracle_(gold), flip_rate_(flip_rate), seed_(seed) {
    if (!(flip_rate >= 0.0 && flip_rate <= 1.0)) {
      throw InputError("flip rate must lie in [0, 1]");
    }
  }

 protected:
  std::vector<TagSequence> do_tag(const TagRequest& req) const override {
    auto out = oracle_.tag(req);
    const LabelSet& labels = req.label_set.empty() ? oracle_.gold_labels() : req.label_set;
    std::vector<std::string> inventory{std::string(kOutsideTag)};
    for (const auto& name : labels.names()) {
      inventory.push_back("B-" + name);
      inventory.push_back("I-" + name);
    }
    for (std::size_t s = 0; s < out.size(); ++s) {
      std::mt19937_64 rng(detail::fnv1a(detail::sentence_key(req.sentences[s]),
                                        detail::fnv1a(std::to_string(seed_))));
      for (auto& tag : out[s]) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u >= flip_rate_ || inventory.size() < 2) continue;
        std::vector<std::string> others;
        for (const auto& t : inventory) {
          if (t != tag) others.push_back(t);
        }
        tag = others[rng() % others.size()];
      }
    }
    return out;
  }

 private:
  OracleTagger oracle_;
  double flip_rate_;
  std::uint64_t seed_;
};

// Replies from a table keyed by the 64-bit FNV-1a hash of the prompt.
class CannedGenerator : public Generator {
 public:
  void add(std::string_view prompt, std::string reply) {
    replies_[detail::fnv1a(prompt)] = std::move(reply);
  }

 protected:
  std::string do_generate(const GenerateRequest& req) const override {
    auto it = replies_.find(detail::fnv1a(req.prompt));
    if (it == replies_.end()) throw BackendError("no canned response for prompt");
    return it->second;
  }

 private:
  std::unordered_map<std::uint64_t, std::string> replies_;
};

}  // namespace transfusion

#endif  // TRANSFUSION_SERVICES_HPP_
