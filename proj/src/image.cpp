#include "somqe/image.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>

#include "somqe/error.hpp"

namespace somqe {

namespace {
__extension__ using u128 = unsigned __int128;
}  // namespace

RasterImage::RasterImage(int width, int height, Rgb fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw InputError("image dimensions must be non-negative");
  }
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

RasterImage::RasterImage(int width, int height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 0 || height < 0 ||
      pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InputError("pixel count does not match " + std::to_string(width) + "x" +
                     std::to_string(height));
  }
}

RasterImage crop_roi(const RasterImage& image, const RoiSpec& roi) {
  if (roi.x < 0 || roi.y < 0 || roi.w <= 0 || roi.h <= 0 ||
      roi.x > image.width() - roi.w || roi.y > image.height() - roi.h) {
    throw BoundsError("roi (" + std::to_string(roi.x) + "," + std::to_string(roi.y) +
                      "," + std::to_string(roi.w) + "x" + std::to_string(roi.h) +
                      ") exceeds image " + std::to_string(image.width()) + "x" +
                      std::to_string(image.height()));
  }
  RasterImage out(roi.w, roi.h);
  for (int y = 0; y < roi.h; ++y) {
    const auto* src = &image.at(roi.x, roi.y + y);
    std::copy(src, src + roi.w, &out.at(0, y));
  }
  return out;
}

NormalizedImage contrast_normalize(const RasterImage& image) {
  if (image.empty()) {
    throw InputError("cannot normalize an empty image");
  }
  NormalizationReport report;
  report.i_min = {255, 255, 255};
  report.i_max = {0, 0, 0};
  for (const auto& px : image.pixels()) {
    for (int c = 0; c < 3; ++c) {
      report.i_min[c] = std::min(report.i_min[c], px[c]);
      report.i_max[c] = std::max(report.i_max[c], px[c]);
    }
  }

  // Lookup table per channel. round((v - lo) * 255 / span) with the half case
  // rounded up, done in integers so it is exact.
  std::array<std::array<std::uint8_t, 256>, 3> table{};
  for (int c = 0; c < 3; ++c) {
    const int lo = report.i_min[c];
    const int span = report.i_max[c] - lo;
    if (span == 0) {
      report.degenerate = true;
      table[c].fill(0);
      continue;
    }
    for (int v = lo; v <= report.i_max[c]; ++v) {
      const int num = (v - lo) * 255;
      table[c][v] = static_cast<std::uint8_t>((2 * num + span) / (2 * span));
    }
  }

  RasterImage out = image;
  for (auto& px : out.pixels()) {
    for (int c = 0; c < 3; ++c) px[c] = table[c][px[c]];
  }
  return {std::move(out), report};
}

std::uint8_t luma(const Rgb& px) {
  return static_cast<std::uint8_t>((px[0] + px[1] + px[2]) / 3);
}

RasterImage translate(const RasterImage& image, Shift shift) {
  RasterImage out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    const int sy = y - shift.dy;
    if (sy < 0 || sy >= image.height()) continue;
    for (int x = 0; x < image.width(); ++x) {
      const int sx = x - shift.dx;
      if (sx < 0 || sx >= image.width()) continue;
      out.at(x, y) = image.at(sx, sy);
    }
  }
  return out;
}

AlignedImage align_translation(const RasterImage& reference,
                               const RasterImage& moving, int max_shift) {
  if (reference.width() != moving.width() || reference.height() != moving.height()) {
    throw InputError("alignment needs equal dimensions, got " +
                     std::to_string(reference.width()) + "x" +
                     std::to_string(reference.height()) + " and " +
                     std::to_string(moving.width()) + "x" +
                     std::to_string(moving.height()));
  }
  const int w = reference.width();
  const int h = reference.height();
  if (max_shift < 0 || 2 * max_shift >= std::min(w, h)) {
    throw InputError("max_shift must be in [0, min(width, height) / 2)");
  }

  std::vector<int> ref_gray(reference.size());
  std::vector<int> mov_gray(moving.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    ref_gray[i] = luma(reference.pixels()[i]);
    mov_gray[i] = luma(moving.pixels()[i]);
  }

  // Costs are compared as exact fractions ssd / area.
  Shift best{};
  std::uint64_t best_ssd = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t best_area = 1;
  int best_mag = std::numeric_limits<int>::max();
  for (int dy = -max_shift; dy <= max_shift; ++dy) {
    for (int dx = -max_shift; dx <= max_shift; ++dx) {
      std::uint64_t ssd = 0;
      const int x0 = std::max(0, dx);
      const int x1 = std::min(w, w + dx);
      const int y0 = std::max(0, dy);
      const int y1 = std::min(h, h + dy);
      for (int y = y0; y < y1; ++y) {
        const int* r = &ref_gray[static_cast<std::size_t>(y) * w];
        const int* m = &mov_gray[static_cast<std::size_t>(y - dy) * w];
        for (int x = x0; x < x1; ++x) {
          const int d = r[x] - m[x - dx];
          ssd += static_cast<std::uint64_t>(d * d);
        }
      }
      const auto area = static_cast<std::uint64_t>(x1 - x0) * static_cast<std::uint64_t>(y1 - y0);
      const int mag = dx * dx + dy * dy;
      const u128 lhs = static_cast<u128>(ssd) * best_area;
      const u128 rhs = static_cast<u128>(best_ssd) * area;
      // Candidates arrive in row-major order, so equal cost and magnitude
      // keeps the earlier one.
      if (lhs < rhs || (lhs == rhs && mag < best_mag)) {
        best = {dx, dy};
        best_ssd = ssd;
        best_area = area;
        best_mag = mag;
      }
    }
  }
  return {translate(moving, best), best};
}

}  // namespace somqe
