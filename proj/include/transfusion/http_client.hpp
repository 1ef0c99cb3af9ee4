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

// HTTP+JSON clients for the model services. Each service exposes
//   POST <base>/translate   {"texts", "src_lang", "tgt_lang", "preserve_markers"} -> {"texts"}
//   POST <base>/tag         {"sentences", "language", "label_set"}              -> {"tags"}
//   POST <base>/generate    {"prompt", "temperature"}                           -> {"text"}
// and reports failures as {"error": "..."} with a non-2xx status.

#ifndef TRANSFUSION_HTTP_CLIENT_HPP_
#define TRANSFUSION_HTTP_CLIENT_HPP_

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "transfusion/error.hpp"
#include "transfusion/services.hpp"

namespace transfusion {

struct HttpOptions {
  std::string bearer_token;  // sent as "Authorization: Bearer ..." when set
  int max_retries = 3;
  std::chrono::milliseconds backoff{200};  // doubled after each failed attempt
  std::chrono::milliseconds timeout{120000};
  std::size_t max_in_flight = 4;
};

namespace detail {

class InFlightLimit {
 public:
  explicit InFlightLimit(std::size_t limit) : available_(limit == 0 ? 1 : limit) {}

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return available_ > 0; });
    --available_;
  }

  void release() {
    {
      std::lock_guard lock(mu_);
      ++available_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t available_;
};

}  // namespace detail

// One service base URL ("http://host:port[/prefix]").
class HttpEndpoint {
 public:
  HttpEndpoint(const std::string& url, HttpOptions options)
      : options_(std::move(options)),
        limit_(std::make_shared<detail::InFlightLimit>(options_.max_in_flight)) {
    const std::string scheme = "http://";
    if (url.rfind(scheme, 0) != 0) {
      throw InputError("unsupported endpoint URL '" + url + "' (expected http://host:port)");
    }
    const auto slash = url.find('/', scheme.size());
    origin_ = url.substr(0, slash);
    if (slash != std::string::npos) {
      prefix_ = url.substr(slash);
      while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }
  }

  const std::string& origin() const { return origin_; }

  // POSTs `body` to prefix + path. Transport failures, 429 and 5xx are
  // retried with exponential backoff; other non-2xx statuses fail at once.
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const {
    const std::string target = prefix_ + path;
    const std::string payload = body.dump();
    std::string last_error;
    auto delay = options_.backoff;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(delay);
        delay *= 2;
      }
      httplib::Result result = send(target, payload);
      if (!result) {
        last_error = "transport error: " + httplib::to_string(result.error());
        continue;
      }
      const int status = result->status;
      if (status >= 200 && status < 300) {
        try {
          return nlohmann::json::parse(result->body);
        } catch (const nlohmann::json::exception& e) {
          throw ProtocolError(origin_ + target + ": response is not JSON: " + e.what());
        }
      }
      last_error = "HTTP " + std::to_string(status) + ": " + error_message(result->body);
      if (status != 429 && status < 500) break;
    }
    throw BackendError(origin_ + target + ": " + last_error);
  }

 private:
  httplib::Result send(const std::string& target, const std::string& payload) const {
    limit_->acquire();
    struct Release {
      detail::InFlightLimit* limit;
      ~Release() { limit->release(); }
    } release{limit_.get()};

    httplib::Client client(origin_);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
        options_.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    if (!options_.bearer_token.empty()) client.set_bearer_token_auth(options_.bearer_token);
    return client.Post(target, payload, "application/json");
  }

  static std::string error_message(const std::string& body) {
    auto parsed = nlohmann::json::parse(body, nullptr, false);
    if (parsed.is_object() && parsed.contains("error") && parsed["error"].is_string()) {
      return parsed["error"].get<std::string>();
    }
    return body.substr(0, 200);
  }

  HttpOptions options_;
  std::shared_ptr<detail::InFlightLimit> limit_;
  std::string origin_;
  std::string prefix_;
};

namespace detail {

template <typename T>
T field(const nlohmann::json& j, const char* name, const std::string& where) {
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(where + ": bad '" + name + "' field: " + e.what());
  }
}

}  // namespace detail

class HttpTranslator : public Translator {
 public:
  HttpTranslator(const std::string& url, HttpOptions options = {})
      : endpoint_(url, std::move(options)) {}

 protected:
  std::vector<std::string> do_translate(const TranslateRequest& req) const override {
    return detail::field<std::vector<std::string>>(endpoint_.post("/translate", to_json(req)),
                                                   "texts", endpoint_.origin() + "/translate");
  }

 private:
  HttpEndpoint endpoint_;
};

class HttpTagger : public Tagger {
 public:
  HttpTagger(const std::string& url, HttpOptions options = {})
      : endpoint_(url, std::move(options)) {}

 protected:
  std::vector<TagSequence> do_tag(const TagRequest& req) const override {
    return detail::field<std::vector<TagSequence>>(endpoint_.post("/tag", to_json(req)), "tags",
                                                   endpoint_.origin() + "/tag");
  }

 private:
  HttpEndpoint endpoint_;
};

class HttpGenerator : public Generator {
 public:
  HttpGenerator(const std::string& url, HttpOptions options = {})
      : endpoint_(url, std::move(options)) {}

 protected:
  std::string do_generate(const GenerateRequest& req) const override {
    return detail::field<std::string>(endpoint_.post("/generate", to_json(req)), "text",
                                      endpoint_.origin() + "/generate");
  }

 private:
  HttpEndpoint endpoint_;
};

}  // namespace transfusion

#endif  // TRANSFUSION_HTTP_CLIENT_HPP_
