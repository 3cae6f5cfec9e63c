#pragma once

#include "ilpcm/multiplex.hpp"

#include <armadillo>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace testutil {

// Fresh directory under the build tree's temp area, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 eng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("ilpcm-test-" + tag + "-" + std::to_string(eng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Random directed multiplex with edge probability q.
inline ilpcm::Multiplex random_multiplex(std::size_t n, std::size_t K, double q, unsigned seed,
                                         bool directed = true) {
  std::mt19937_64 eng(seed);
  std::bernoulli_distribution B(q);
  std::vector<ilpcm::View> views;
  for (std::size_t k = 0; k < K; ++k) {
    ilpcm::View v;
    v.name = "v" + std::to_string(k + 1);
    v.directed = directed;
    v.adjacency.zeros(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || (!directed && j < i)) continue;
        v.adjacency(i, j) = B(eng) ? 1.0 : 0.0;
        if (!directed) v.adjacency(j, i) = v.adjacency(i, j);
      }
    }
    views.push_back(std::move(v));
  }
  return ilpcm::Multiplex(std::move(views), 0);
}

}  // namespace testutil
