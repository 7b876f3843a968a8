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

#include "fedsim/json_io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fedsim/error.h"
#include "fedsim/format.h"

namespace fedsim::cli {
namespace {

void dump_into(const Json& v, int indent, std::string& out) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        out += Json(it.key()).dump();
        out += ": ";
        dump_into(it.value(), indent + 1, out);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(v.begin(), v.end(), [](const Json& e) {
        return !e.is_object() && !e.is_array();
      });
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const Json& e : v) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += inner;
        dump_into(e, indent + 1, out);
      }
      out += flat ? "]" : "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_double(d) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string dump_json(const Json& value) {
  std::string out;
  dump_into(value, 0, out);
  out += '\n';
  return out;
}

Json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return Json::parse(text.str());
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kFormat, path.string() + ": invalid JSON: " + e.what());
  }
}

std::string json_type_name(const Json& value) {
  switch (value.type()) {
    case Json::value_t::null: return "null";
    case Json::value_t::object: return "object";
    case Json::value_t::array: return "array";
    case Json::value_t::string: return "string";
    case Json::value_t::boolean: return "boolean";
    case Json::value_t::number_integer:
    case Json::value_t::number_unsigned: return "integer";
    case Json::value_t::number_float: return "number";
    default: return "value";
  }
}

ObjectReader::ObjectReader(const Json& object, std::string path)
    : object_(object), path_(std::move(path)) {
  if (!object_.is_object()) {
    fail(ErrorCode::kConfig, "schema error at " + (path_.empty() ? std::string("<root>") : path_) +
                                 ": expected object, got " + json_type_name(object_));
  }
}

std::string ObjectReader::key_path(std::string_view key) const {
  return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
}

void ObjectReader::fail_at(std::string_view key, const std::string& message) const {
  fail(ErrorCode::kConfig, "schema error at " + key_path(key) + ": " + message);
}

void ObjectReader::allow_only(std::initializer_list<std::string_view> allowed) const {
  for (auto it = object_.begin(); it != object_.end(); ++it) {
    bool known = false;
    for (std::string_view a : allowed) known = known || a == it.key();
    if (!known) fail_at(it.key(), "unknown key");
  }
}

bool ObjectReader::has(std::string_view key) const {
  return object_.contains(std::string(key));
}

const Json& ObjectReader::at(std::string_view key) const {
  return object_.at(std::string(key));
}

const Json& ObjectReader::raw(std::string_view key) const {
  if (!has(key)) fail_at(key, "missing key");
  return at(key);
}

std::int64_t ObjectReader::get_int(std::string_view key, std::int64_t fallback) const {
  if (!has(key)) return fallback;
  const Json& v = at(key);
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    fail_at(key, "integer out of range");
  }
  if (!v.is_number_integer()) fail_at(key, "expected integer, got " + json_type_name(v));
  return v.get<std::int64_t>();
}

std::uint64_t ObjectReader::get_u64(std::string_view key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const Json& v = at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) fail_at(key, "expected non-negative integer");
  fail_at(key, "expected integer, got " + json_type_name(v));
}

double ObjectReader::get_double(std::string_view key, double fallback) const {
  if (!has(key)) return fallback;
  const Json& v = at(key);
  if (!v.is_number()) fail_at(key, "expected number, got " + json_type_name(v));
  return v.get<double>();
}

bool ObjectReader::get_bool(std::string_view key, bool fallback) const {
  if (!has(key)) return fallback;
  const Json& v = at(key);
  if (!v.is_boolean()) fail_at(key, "expected boolean, got " + json_type_name(v));
  return v.get<bool>();
}

std::string ObjectReader::get_string(std::string_view key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  const Json& v = at(key);
  if (!v.is_string()) fail_at(key, "expected string, got " + json_type_name(v));
  return v.get<std::string>();
}

std::optional<double> ObjectReader::get_optional_double(std::string_view key) const {
  if (!has(key) || at(key).is_null()) return std::nullopt;
  return get_double(key, 0.0);
}

std::optional<std::uint64_t> ObjectReader::get_optional_u64(std::string_view key) const {
  if (!has(key) || at(key).is_null()) return std::nullopt;
  return get_u64(key, 0);
}

ObjectReader ObjectReader::object(std::string_view key) const {
  return ObjectReader(raw(key), key_path(key));
}

std::vector<ObjectReader> ObjectReader::object_array(std::string_view key) const {
  const Json& v = raw(key);
  if (!v.is_array()) fail_at(key, "expected array, got " + json_type_name(v));
  std::vector<ObjectReader> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.emplace_back(v[i], key_path(key) + "[" + std::to_string(i) + "]");
  }
  return out;
}

namespace {

template <typename T, typename Check>
std::vector<T> typed_array(const ObjectReader& r, const Json& v, std::string_view key,
                           const char* expected, Check check) {
  if (!v.is_array()) r.fail_at(key, std::string("expected array, got ") + json_type_name(v));
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!check(v[i])) {
      r.fail_at(std::string(key) + "[" + std::to_string(i) + "]",
                std::string("expected ") + expected + ", got " + json_type_name(v[i]));
    }
    out.push_back(v[i].get<T>());
  }
  return out;
}

}  // namespace

std::vector<double> ObjectReader::double_array(std::string_view key) const {
  return typed_array<double>(*this, raw(key), key, "number",
                             [](const Json& e) { return e.is_number(); });
}

std::vector<std::string> ObjectReader::string_array(std::string_view key) const {
  return typed_array<std::string>(*this, raw(key), key, "string",
                                  [](const Json& e) { return e.is_string(); });
}

std::vector<std::uint64_t> ObjectReader::u64_array(std::string_view key) const {
  return typed_array<std::uint64_t>(*this, raw(key), key, "non-negative integer",
                                    [](const Json& e) { return e.is_number_unsigned(); });
}

std::vector<std::int64_t> ObjectReader::int_array(std::string_view key) const {
  return typed_array<std::int64_t>(*this, raw(key), key, "integer",
                                   [](const Json& e) { return e.is_number_integer(); });
}

}  // namespace fedsim::cli
