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

#include "gsa/config.hpp"

#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>
#include <vector>

namespace gsa {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected,
                            std::size_t line) {
  throw ParseError("config: '" + std::string(key) + "' expects " + expected + ", got '" +
                       std::string(value) + "'",
                   line);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, std::size_t line) {
  value = trim(value);
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    if constexpr (std::is_floating_point_v<T>) {
      bad_value(key, value, "a number", line);
    } else {
      bad_value(key, value, "an integer", line);
    }
  }
  return out;
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view value, std::size_t line) {
  std::vector<T> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = value.find(',', start);
    out.push_back(parse_number<T>(key, value.substr(start, comma - start), line));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

void apply_setting(RunConfig& cfg, std::string_view section, std::string_view key,
                   std::string_view value, std::size_t line) {
  value = trim(value);
  ModelConfig& m = cfg.model;
  TrainConfig& t = cfg.train;
  if (section == "model") {
    if (key == "head") {
      auto h = parse_head(value);
      if (!h) bad_value(key, value, "a head variant", line);
      m.head = *h;
    } else if (key == "decoder") {
      auto d = parse_decoder(value);
      if (!d) bad_value(key, value, "plain or sa_dec", line);
      m.decoder = *d;
    } else if (key == "dilations") {
      m.dilations = parse_list<int>(key, value, line);
    } else if (key == "head_channels") {
      m.head_channels = parse_number<std::int64_t>(key, value, line);
    } else if (key == "decoder_channels") {
      m.decoder_channels = parse_number<std::int64_t>(key, value, line);
    } else if (key == "low_level_channels") {
      m.low_level_channels = parse_number<std::int64_t>(key, value, line);
    } else if (key == "fxn_channels") {
      m.fxn_channels = parse_list<std::int64_t>(key, value, line);
    } else if (key == "num_classes") {
      m.num_classes = parse_number<int>(key, value, line);
    } else if (key == "output_stride") {
      m.output_stride = parse_number<int>(key, value, line);
    } else if (key == "gamma") {
      m.gamma = parse_number<std::int64_t>(key, value, line);
    } else if (key == "embed_channels") {
      m.embed_channels = parse_number<std::int64_t>(key, value, line);
    } else if (key == "seed") {
      m.seed = parse_number<std::uint64_t>(key, value, line);
    } else {
      throw ParseError("config: unknown key 'model." + std::string(key) + "'", line);
    }
  } else if (section == "train") {
    if (key == "base_lr") {
      t.base_lr = parse_number<double>(key, value, line);
    } else if (key == "power") {
      t.power = parse_number<double>(key, value, line);
    } else if (key == "max_iter") {
      t.max_iter = parse_number<std::int64_t>(key, value, line);
    } else if (key == "batch_size") {
      t.batch_size = parse_number<std::int64_t>(key, value, line);
    } else if (key == "crop") {
      const auto v = parse_list<std::int64_t>(key, value, line);
      if (v.size() != 2) bad_value(key, value, "two integers 'h,w'", line);
      t.crop_h = v[0];
      t.crop_w = v[1];
    } else if (key == "scale_range") {
      const auto v = parse_list<double>(key, value, line);
      if (v.size() != 2) bad_value(key, value, "two numbers 'lo,hi'", line);
      t.scale_lo = v[0];
      t.scale_hi = v[1];
    } else if (key == "flip_prob") {
      t.flip_prob = parse_number<double>(key, value, line);
    } else if (key == "momentum") {
      t.momentum = parse_number<double>(key, value, line);
    } else if (key == "weight_decay") {
      t.weight_decay = parse_number<double>(key, value, line);
    } else if (key == "eval_every") {
      t.eval_every = parse_number<std::int64_t>(key, value, line);
    } else if (key == "warmup_iters") {
      t.warmup_iters = parse_number<std::int64_t>(key, value, line);
    } else if (key == "seed") {
      t.seed = parse_number<std::uint64_t>(key, value, line);
    } else {
      throw ParseError("config: unknown key 'train." + std::string(key) + "'", line);
    }
  } else {
    throw ParseError("config: unknown section '" + std::string(section) + "'", line);
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::string section;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? text.size() - start : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("config: malformed section header", line_no);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "model" && section != "train") {
        throw ParseError("config: unknown section '" + section + "'", line_no);
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("config: expected 'key = value'", line_no);
    if (section.empty()) throw ParseError("config: key outside of a section", line_no);
    const std::string key(trim(line.substr(0, eq)));
    if (!seen.insert(section + "." + key).second) {
      throw ParseError("config: duplicate key '" + section + "." + key + "'", line_no);
    }
    apply_setting(cfg, section, key, line.substr(eq + 1), line_no);
  }
  cfg.model.validate();
  cfg.train.validate();
  return cfg;
}

void apply_override(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq) {
    throw ParseError("override must look like 'section.key=value', got '" +
                         std::string(assignment) + "'",
                     0);
  }
  apply_setting(cfg, trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
                assignment.substr(eq + 1), 0);
  cfg.model.validate();
  cfg.train.validate();
}

std::string format_config(const RunConfig& cfg) {
  auto join = [](const auto& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    return os.str();
  };
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  const ModelConfig& m = cfg.model;
  const TrainConfig& t = cfg.train;
  std::ostringstream os;
  os << "[model]\n"
     << "head = " << to_string(m.head) << "\n"
     << "decoder = " << to_string(m.decoder) << "\n"
     << "dilations = " << join(m.dilations) << "\n"
     << "head_channels = " << m.head_channels << "\n"
     << "decoder_channels = " << m.decoder_channels << "\n"
     << "low_level_channels = " << m.low_level_channels << "\n"
     << "fxn_channels = " << join(m.fxn_channels) << "\n"
     << "num_classes = " << m.num_classes << "\n"
     << "output_stride = " << m.output_stride << "\n"
     << "gamma = " << m.gamma << "\n"
     << "embed_channels = " << m.embed_channels << "\n"
     << "seed = " << m.seed << "\n\n"
     << "[train]\n"
     << "base_lr = " << num(t.base_lr) << "\n"
     << "power = " << num(t.power) << "\n"
     << "max_iter = " << t.max_iter << "\n"
     << "batch_size = " << t.batch_size << "\n"
     << "crop = " << t.crop_h << "," << t.crop_w << "\n"
     << "scale_range = " << num(t.scale_lo) << "," << num(t.scale_hi) << "\n"
     << "flip_prob = " << num(t.flip_prob) << "\n"
     << "momentum = " << num(t.momentum) << "\n"
     << "weight_decay = " << num(t.weight_decay) << "\n"
     << "warmup_iters = " << t.warmup_iters << "\n"
     << "eval_every = " << t.eval_every << "\n"
     << "seed = " << t.seed << "\n";
  return os.str();
}

}  // namespace gsa
