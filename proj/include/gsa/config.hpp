/* Copyright 2026 The gsaseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "gsa/segnet.hpp"
#include "gsa/train.hpp"

namespace gsa {

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};

// Line-oriented `key = value` text with `[model]` / `[train]` sections and
// `#` comments. Unknown sections or keys, duplicates and malformed values are
// ParseErrors carrying the 1-based line number. Absent keys keep their
// defaults; the result is validated.
RunConfig parse_config(std::string_view text);

// Sets one field. `line` is reported in errors (0 for command-line overrides).
void apply_setting(RunConfig& cfg, std::string_view section, std::string_view key,
                   std::string_view value, std::size_t line);

// "section.key=value"; validates the whole config afterwards.
void apply_override(RunConfig& cfg, std::string_view assignment);

// Text that parse_config() maps back to `cfg`.
std::string format_config(const RunConfig& cfg);

}  // namespace gsa
