#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

namespace somqe {

using Rgb = std::array<std::uint8_t, 3>;

/// Row-major 8-bit RGB raster.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, Rgb fill = {0, 0, 0});
  RasterImage(int width, int height, std::vector<Rgb> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  Rgb& at(int x, int y) { return pixels_[index(x, y)]; }
  const Rgb& at(int x, int y) const { return pixels_[index(x, y)]; }

  const std::vector<Rgb>& pixels() const { return pixels_; }
  std::vector<Rgb>& pixels() { return pixels_; }

  bool operator==(const RasterImage&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> pixels_;
};

struct RoiSpec {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool operator==(const RoiSpec&) const = default;
};

struct NormalizationReport {
  std::array<std::uint8_t, 3> i_min{};
  std::array<std::uint8_t, 3> i_max{};
  bool degenerate = false;
};

struct NormalizedImage {
  RasterImage image;
  NormalizationReport report;
};

struct Shift {
  int dx = 0;
  int dy = 0;

  bool operator==(const Shift&) const = default;
};

struct AlignedImage {
  RasterImage image;
  Shift shift;
};

// Decodes PNG (8/16-bit gray, gray+alpha, RGB, RGBA, palette) and binary
// PGM/PPM (P5/P6). Gray is expanded to equal channels; alpha is dropped.
RasterImage load_image(const std::filesystem::path& path);

RasterImage decode_png(const std::vector<std::uint8_t>& bytes);
RasterImage decode_pnm(const std::vector<std::uint8_t>& bytes);

// 8-bit RGB PNG, no timestamps, so equal images produce equal bytes.
std::vector<std::uint8_t> encode_png(const RasterImage& image);
void save_png(const RasterImage& image, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_ppm(const RasterImage& image);

RasterImage crop_roi(const RasterImage& image, const RoiSpec& roi);

/// Per-channel min/max stretch to the full 0..255 range.
///
/// Each channel v maps to round((v - min) / (max - min) * 255), rounding half
/// away from zero. A channel with max == min becomes all zeros and the report
/// is flagged degenerate.
NormalizedImage contrast_normalize(const RasterImage& image);

// Integer luma used for alignment: floor((r + g + b) / 3).
std::uint8_t luma(const Rgb& px);

/// Exhaustive integer-translation search over [-max_shift, max_shift]^2.
///
/// The returned shift (dx, dy) is the offset applied to `moving`:
/// out(x, y) = moving(x - dx, y - dy), zero outside. The cost is the mean
/// squared luma difference over the overlap. Ties go to the smaller shift
/// magnitude, then to row-major (dy, dx) order.
AlignedImage align_translation(const RasterImage& reference,
                               const RasterImage& moving, int max_shift);

RasterImage translate(const RasterImage& image, Shift shift);

}  // namespace somqe
