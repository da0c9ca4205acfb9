#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "somqe/image.hpp"

namespace somqe {

// Gray levels below are written to all three channels.

struct ExtentSeriesSpec {
  int image_size = 128;
  int background_level = 2;
  int foreground_level = 60;
  std::vector<double> extents{0.01, 0.04, 0.09, 0.16, 0.25, 0.36};

  void validate() const;
};

// Levels default to decreasing contrast, so the last image (the default
// training anchor) is the lowest-contrast one.
struct IntensitySeriesSpec {
  int image_size = 128;
  int background_level = 2;
  double extent = 0.25;
  std::vector<int> foreground_levels{255, 210, 160, 110, 60, 10};

  void validate() const;
};

// Time series whose centered square grows (or shrinks) across frames, with
// independent per-pixel, per-channel noise in [-noise_amplitude, +noise_amplitude].
struct GrowthSeriesSpec {
  int image_size = 128;
  int background_level = 40;
  int foreground_level = 200;
  double extent_first = 0.04;
  double extent_last = 0.36;
  int frames = 25;
  int noise_amplitude = 5;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthImage {
  RasterImage image;
  double extent_requested = 0.0;
  double extent_actual = 0.0;
  int side = 0;
  int foreground_level = 0;
  int background_level = 0;
};

int square_side(int image_size, double extent);

// Background everywhere except a centered side x side square.
RasterImage centered_square(int image_size, int side, int background_level,
                            int foreground_level);

std::vector<SynthImage> gen_extent_series(const ExtentSeriesSpec& spec);
std::vector<SynthImage> gen_intensity_series(const IntensitySeriesSpec& spec);
std::vector<SynthImage> gen_growth_series(const GrowthSeriesSpec& spec);

}  // namespace somqe
