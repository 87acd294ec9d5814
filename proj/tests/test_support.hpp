#pragma once

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace tagsync::test {

/// Compares `actual` with tests/golden/<name>. Set TAGSYNC_UPDATE_GOLDEN=1 to
/// (re)write the file instead.
inline void check_golden(const std::string& name, const std::string& actual) {
  const std::filesystem::path path = std::filesystem::path(TAGSYNC_GOLDEN_DIR) / name;
  if (std::getenv("TAGSYNC_UPDATE_GOLDEN") != nullptr) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << actual;
    MESSAGE("updated golden " << path.string());
    return;
  }
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing golden file " << path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == actual);
}

inline std::string fmt17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

/// Per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tagsync_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string scenario_path(const std::string& name) {
  return (std::filesystem::path(TAGSYNC_SCENARIO_DIR) / name).string();
}

}  // namespace tagsync::test
