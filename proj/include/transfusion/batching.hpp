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

#ifndef TRANSFUSION_BATCHING_HPP_
#define TRANSFUSION_BATCHING_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <iterator>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "transfusion/error.hpp"

namespace transfusion {

struct BatchOptions {
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
};

// Calls fn(begin, end) on consecutive ranges of [0, n) of at most
// batch_size items, with at most max_in_flight calls running at once. Each
// call must return exactly end - begin results; they are reassembled in input
// order whatever the completion order. If calls throw, the exception from the
// lowest-indexed failing batch is rethrown after all workers stop.
template <typename T, typename Fn>
std::vector<T> run_batched(std::size_t n, const BatchOptions& options, Fn&& fn) {
  if (options.batch_size == 0) throw InputError("batch_size must be positive");
  if (options.max_in_flight == 0) throw InputError("max_in_flight must be positive");
  const std::size_t batches = (n + options.batch_size - 1) / options.batch_size;

  std::vector<std::vector<T>> results(batches);
  std::vector<std::exception_ptr> errors(batches);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&]() {
    while (!failed.load()) {
      const std::size_t b = next.fetch_add(1);
      if (b >= batches) return;
      const std::size_t begin = b * options.batch_size;
      const std::size_t end = std::min(n, begin + options.batch_size);
      try {
        results[b] = fn(begin, end);
        if (results[b].size() != end - begin) {
          throw ProtocolError("batch [" + std::to_string(begin) + ", " + std::to_string(end) +
                              ") returned " + std::to_string(results[b].size()) + " results");
        }
      } catch (...) {
        errors[b] = std::current_exception();
        failed.store(true);
      }
    }
  };

  const std::size_t workers = std::min(options.max_in_flight, batches);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<T> out;
  out.reserve(n);
  for (auto& r : results) {
    std::move(r.begin(), r.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace transfusion

#endif  // TRANSFUSION_BATCHING_HPP_
