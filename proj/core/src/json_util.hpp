#pragma once

#include <string>
#include <string_view>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "edgeplace/error.hpp"
#include "edgeplace/topology.hpp"

namespace edgeplace::detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, std::string_view where) {
  if (!obj.is_object()) throw ParseError(fmt::format("{}: expected an object", where));
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(fmt::format("{}: missing field '{}'", where, key));
  return *it;
}

inline const nlohmann::json* optional_field(const nlohmann::json& obj, const char* key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

inline std::string get_string(const nlohmann::json& v, std::string_view where) {
  if (!v.is_string()) throw ParseError(fmt::format("{}: expected a string", where));
  return v.get<std::string>();
}

inline double get_number(const nlohmann::json& v, std::string_view where) {
  if (!v.is_number()) throw ParseError(fmt::format("{}: expected a number", where));
  return v.get<double>();
}

inline bool get_bool(const nlohmann::json& v, std::string_view where) {
  if (!v.is_boolean()) throw ParseError(fmt::format("{}: expected a boolean", where));
  return v.get<bool>();
}

inline ResourceVector parse_resources(const nlohmann::json& v, const std::string& where) {
  if (!v.is_object()) throw ParseError(fmt::format("{}: expected an object", where));
  ResourceVector r;
  r.cpu = get_number(require(v, "cpu", where), where + ".cpu");
  r.mem_gb = get_number(require(v, "mem_gb", where), where + ".mem_gb");
  r.storage_gb = get_number(require(v, "storage_gb", where), where + ".storage_gb");
  return r;
}

inline nlohmann::json parse_json_text(std::string_view text, std::string_view what) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", what, e.what()));
  }
}

}  // namespace edgeplace::detail
