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

// Umbrella header.

#ifndef TRANSFUSION_TRANSFUSION_HPP_
#define TRANSFUSION_TRANSFUSION_HPP_

#include "transfusion/batching.hpp"
#include "transfusion/config.hpp"
#include "transfusion/conll_io.hpp"
#include "transfusion/error.hpp"
#include "transfusion/evaluation.hpp"
#include "transfusion/fusion.hpp"
#include "transfusion/http_client.hpp"
#include "transfusion/marker_codec.hpp"
#include "transfusion/ner_core.hpp"
#include "transfusion/projection.hpp"
#include "transfusion/prompts.hpp"
#include "transfusion/services.hpp"

#endif  // TRANSFUSION_TRANSFUSION_HPP_
