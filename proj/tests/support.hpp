#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "somqe/image.hpp"

namespace somqe::test {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("somqe_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline RasterImage random_image(int w, int h, std::mt19937& gen, int lo = 0, int hi = 255) {
  std::uniform_int_distribution<int> dist(lo, hi);
  RasterImage img(w, h);
  for (auto& px : img.pixels()) {
    for (auto& c : px) c = static_cast<std::uint8_t>(dist(gen));
  }
  return img;
}

inline double relative_error(double actual, double expected) {
  if (actual == expected) return 0.0;
  return std::fabs(actual - expected) / std::fabs(expected);
}

}  // namespace somqe::test
