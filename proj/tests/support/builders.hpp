#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <utility>

#include "similo/model.hpp"

namespace build {

inline similo::PropertyRecord node(
    std::size_t index, const std::string& xpath, similo::Rect rect,
    std::initializer_list<std::pair<similo::PropertyKey, std::string>> values = {}) {
  similo::PropertyRecord r;
  r.document_index = index;
  r.rect = rect;
  r.set(similo::PropertyKey::kXPath, xpath);
  for (const auto& [k, v] : values) r.set(k, v);
  similo::normalize_record(r);
  return r;
}

inline similo::VisualElement element(
    int widget_id,
    std::initializer_list<std::pair<similo::PropertyKey, std::initializer_list<std::string>>>
        values) {
  similo::VisualElement e;
  e.widget_id = widget_id;
  for (const auto& [k, vs] : values) {
    for (const auto& v : vs) e.at(k).insert(v);
  }
  for (const auto& x : e.at(similo::PropertyKey::kXPath)) e.member_xpaths.insert(x);
  return e;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("similo_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path fixtures() { return SIMILO_FIXTURES_DIR; }

}  // namespace build
