/*
 * Copyright 2026 The FedSim Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSIM_TOOLS_JSON_IO_H_
#define FEDSIM_TOOLS_JSON_IO_H_

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fedsim::cli {

using Json = nlohmann::ordered_json;

// Serializes `value` with two-space indentation; floating-point numbers are
// written with 17 significant digits.
std::string dump_json(const Json& value);

Json parse_json_file(const std::filesystem::path& path);

// Schema-checked access to one JSON object. Every error names the full key
// path (e.g. "base.local.batch_size") and is raised as ErrorCode::kConfig.
class ObjectReader {
 public:
  ObjectReader(const Json& object, std::string path);

  // Rejects any key not in `allowed`.
  void allow_only(std::initializer_list<std::string_view> allowed) const;

  bool has(std::string_view key) const;
  const Json& raw(std::string_view key) const;

  std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
  std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  double get_double(std::string_view key, double fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;
  std::string get_string(std::string_view key, const std::string& fallback) const;
  std::optional<double> get_optional_double(std::string_view key) const;
  std::optional<std::uint64_t> get_optional_u64(std::string_view key) const;

  ObjectReader object(std::string_view key) const;
  std::vector<ObjectReader> object_array(std::string_view key) const;
  std::vector<double> double_array(std::string_view key) const;
  std::vector<std::string> string_array(std::string_view key) const;
  std::vector<std::uint64_t> u64_array(std::string_view key) const;
  std::vector<std::int64_t> int_array(std::string_view key) const;

  std::string key_path(std::string_view key) const;
  [[noreturn]] void fail_at(std::string_view key, const std::string& message) const;

 private:
  const Json& at(std::string_view key) const;

  const Json& object_;
  std::string path_;
};

std::string json_type_name(const Json& value);

}  // namespace fedsim::cli

#endif  // FEDSIM_TOOLS_JSON_IO_H_
