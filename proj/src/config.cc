// Copyright 2026 The Audio Spectral Enhancement Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ase/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ase/error.h"

namespace ase {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T ParseNumber(std::string_view key, std::string_view value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::kConfig, "bad value for " + std::string(key) +
                                        ": '" + std::string(value) + "'");
  }
  return out;
}

using Setter = std::function<void(RunConfig&, std::string_view, std::string_view)>;

template <typename T, typename Field>
Setter Set(Field field) {
  return [field](RunConfig& cfg, std::string_view key, std::string_view v) {
    field(cfg) = ParseNumber<T>(key, v);
  };
}

const std::map<std::string, Setter, std::less<>>& Setters() {
  static const auto* setters = new std::map<std::string, Setter, std::less<>>{
      {"n_blocks", Set<size_t>([](RunConfig& c) -> size_t& { return c.model.n_blocks; })},
      {"latent_channels", Set<size_t>([](RunConfig& c) -> size_t& { return c.model.latent_channels; })},
      {"kernel_size", Set<size_t>([](RunConfig& c) -> size_t& { return c.model.kernel_size; })},
      {"base_lr", Set<double>([](RunConfig& c) -> double& { return c.train.base_lr; })},
      {"batch_size", Set<size_t>([](RunConfig& c) -> size_t& { return c.train.batch_size; })},
      {"epochs", Set<size_t>([](RunConfig& c) -> size_t& { return c.train.epochs; })},
      {"min_lr", Set<double>([](RunConfig& c) -> double& { return c.train.min_lr; })},
      {"max_lr", Set<double>([](RunConfig& c) -> double& { return c.train.max_lr; })},
      {"period", Set<size_t>([](RunConfig& c) -> size_t& { return c.train.period; })},
      {"decay", Set<double>([](RunConfig& c) -> double& { return c.train.decay; })},
      {"beta1", Set<double>([](RunConfig& c) -> double& { return c.train.beta1; })},
      {"beta2", Set<double>([](RunConfig& c) -> double& { return c.train.beta2; })},
      {"eps", Set<double>([](RunConfig& c) -> double& { return c.train.eps; })},
      {"seed", Set<uint64_t>([](RunConfig& c) -> uint64_t& { return c.train.seed; })},
      {"checkpoint_every", Set<size_t>([](RunConfig& c) -> size_t& { return c.train.checkpoint_every; })},
      {"crop_length", Set<size_t>([](RunConfig& c) -> size_t& { return c.train.crop_length; })},
      {"k1", Set<double>([](RunConfig& c) -> double& { return c.ssim.k1; })},
      {"k2", Set<double>([](RunConfig& c) -> double& { return c.ssim.k2; })},
      {"dynamic_range", Set<double>([](RunConfig& c) -> double& { return c.ssim.dynamic_range; })},
      {"range_fraction", Set<double>([](RunConfig& c) -> double& { return c.ssim.range_fraction; })},
      {"mode",
       [](RunConfig& c, std::string_view key, std::string_view v) {
         if (v == "triangular") {
           c.train.mode = LrMode::kTriangular;
         } else if (v == "constant") {
           c.train.mode = LrMode::kConstant;
         } else {
           throw Error(ErrorCode::kConfig, "bad value for " + std::string(key) +
                                               ": '" + std::string(v) + "'");
         }
       }},
  };
  return *setters;
}

}  // namespace

RunConfig ParseConfig(std::string_view text, RunConfig base) {
  size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfig,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = Trim(line.substr(0, eq));
    const std::string_view value = Trim(line.substr(eq + 1));
    const auto& setters = Setters();
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw Error(ErrorCode::kConfig, "unknown config key '" + std::string(key) + "'");
    }
    it->second(base, key, value);
  }
  try {
    base.model.Validate();
    base.train.Validate();
    base.ssim.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  return base;
}

RunConfig LoadConfig(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str(), std::move(base));
}

}  // namespace ase
