// Shared test fixtures.
#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "ereval/core_model.hpp"

namespace fixtures {

// Truth {{r1,r2,r3},{r4,r5}} and prediction {{r1,r2},{r3,r4,r5}}.
inline ereval::Clustering canonical_truth() {
  return ereval::Clustering::from_clusters({{"r1", "r2", "r3"}, {"r4", "r5"}}, {"t1", "t2"});
}
inline ereval::Clustering canonical_prediction() {
  return ereval::Clustering::from_clusters({{"r1", "r2"}, {"r3", "r4", "r5"}}, {"p1", "p2"});
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("ereval-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace fixtures
