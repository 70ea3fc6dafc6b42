#pragma once

#include <algorithm>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include "vsim/error.hpp"
#include "vsim/scene_graph.hpp"

// Strict-schema helpers shared by the JSON readers.
namespace vsim::detail {

inline void check_keys(const json& doc, const std::string& path, std::initializer_list<std::string_view> required,
                       std::initializer_list<std::string_view> optional) {
  if (!doc.is_object()) throw schema_error(path.empty() ? "/" : path, "expected object");
  for (auto key : required) {
    if (!doc.contains(std::string(key))) throw schema_error(path + "/" + std::string(key), "missing required key");
  }
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                 std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) throw schema_error(path + "/" + key, "unknown key");
  }
}

inline std::string get_string(const json& doc, const std::string& key, const std::string& path) {
  const auto& v = doc.at(key);
  if (!v.is_string()) throw schema_error(path + "/" + key, "expected string");
  return v.get<std::string>();
}

inline std::string get_id(const json& doc, const std::string& key, const std::string& path) {
  std::string id = get_string(doc, key, path);
  if (!is_valid_identifier(id)) throw schema_error(path + "/" + key, "invalid identifier '" + id + "'");
  return id;
}

inline std::optional<std::string> opt_string(const json& doc, const std::string& key, const std::string& path) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return get_string(doc, key, path);
}

inline const json& get_array(const json& doc, const std::string& key, const std::string& path) {
  const auto& v = doc.at(key);
  if (!v.is_array()) throw schema_error(path + "/" + key, "expected array");
  return v;
}

inline int get_int(const json& doc, const std::string& key, const std::string& path) {
  const auto& v = doc.at(key);
  if (!v.is_number_integer()) throw schema_error(path + "/" + key, "expected integer");
  return v.get<int>();
}

inline bool get_bool(const json& doc, const std::string& key, const std::string& path) {
  const auto& v = doc.at(key);
  if (!v.is_boolean()) throw schema_error(path + "/" + key, "expected boolean");
  return v.get<bool>();
}

}  // namespace vsim::detail
