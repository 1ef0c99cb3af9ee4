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

#ifndef TRANSFUSION_ERROR_HPP_
#define TRANSFUSION_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace transfusion {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed data or arguments supplied by the caller (files, tags, spans).
class InputError : public Error {
 public:
  using Error::Error;
};

// A model service failed: transport error, non-2xx status, or a response
// that violates the wire contract.
class BackendError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public BackendError {
 public:
  using BackendError::BackendError;
};

}  // namespace transfusion

#endif  // TRANSFUSION_ERROR_HPP_
