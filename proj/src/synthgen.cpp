#include "somqe/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "somqe/error.hpp"
#include "somqe/rng.hpp"

namespace somqe {

namespace {

class Violations {
 public:
  template <typename T>
  Violations& operator()(bool ok, const std::string& field, const T& detail) {
    if (!ok) text_ << "\n  " << field << ": " << detail;
    return *this;
  }

  void throw_if_any(const char* what) const {
    const std::string s = text_.str();
    if (!s.empty()) throw ValidationError(std::string("invalid ") + what + s);
  }

 private:
  std::ostringstream text_;
};

bool gray_level(int v) { return v >= 0 && v <= 255; }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

Rgb gray(int level) {
  const auto v = static_cast<std::uint8_t>(level);
  return {v, v, v};
}

SynthImage make_square_image(int size, double extent, int background, int foreground) {
  const int side = square_side(size, extent);
  SynthImage out;
  out.image = centered_square(size, side, background, foreground);
  out.extent_requested = extent;
  out.extent_actual = static_cast<double>(side) * side / (static_cast<double>(size) * size);
  out.side = side;
  out.foreground_level = foreground;
  out.background_level = background;
  return out;
}

}  // namespace

int square_side(int image_size, double extent) {
  const long side = std::lround(image_size * std::sqrt(extent));
  if (side > image_size) {
    throw ValidationError("extent " + fmt(extent) + " needs a square wider than the image");
  }
  return static_cast<int>(side);
}

RasterImage centered_square(int image_size, int side, int background_level,
                            int foreground_level) {
  RasterImage img(image_size, image_size, gray(background_level));
  const int offset = (image_size - side) / 2;
  for (int y = offset; y < offset + side; ++y) {
    for (int x = offset; x < offset + side; ++x) {
      img.at(x, y) = gray(foreground_level);
    }
  }
  return img;
}

void ExtentSeriesSpec::validate() const {
  Violations v;
  v(image_size > 0, "image_size", "must be positive");
  v(gray_level(background_level), "background_level", "must be in 0..255");
  v(gray_level(foreground_level), "foreground_level", "must be in 0..255");
  v(foreground_level != background_level, "foreground_level", "must differ from background_level");
  v(!extents.empty(), "extents", "must not be empty");
  for (std::size_t i = 0; i < extents.size(); ++i) {
    const std::string field = "extents[" + std::to_string(i) + "]";
    v(extents[i] >= 0.0 && extents[i] <= 1.0, field, fmt(extents[i]) + " outside [0, 1]");
    if (i > 0) v(extents[i] > extents[i - 1], field, "extents must be strictly increasing");
  }
  v.throw_if_any("extent series spec");
}

void IntensitySeriesSpec::validate() const {
  Violations v;
  v(image_size > 0, "image_size", "must be positive");
  v(gray_level(background_level), "background_level", "must be in 0..255");
  v(extent > 0.0 && extent <= 1.0, "extent", fmt(extent) + " outside (0, 1]");
  v(!foreground_levels.empty(), "foreground_levels", "must not be empty");
  const bool increasing = std::adjacent_find(foreground_levels.begin(), foreground_levels.end(),
                                             std::greater_equal<>()) == foreground_levels.end();
  const bool decreasing = std::adjacent_find(foreground_levels.begin(), foreground_levels.end(),
                                             std::less_equal<>()) == foreground_levels.end();
  v(increasing || decreasing, "foreground_levels", "must be strictly monotone");
  for (std::size_t i = 0; i < foreground_levels.size(); ++i) {
    const std::string field = "foreground_levels[" + std::to_string(i) + "]";
    v(gray_level(foreground_levels[i]), field, "must be in 0..255");
    v(foreground_levels[i] != background_level, field, "must differ from background_level");
  }
  v.throw_if_any("intensity series spec");
}

void GrowthSeriesSpec::validate() const {
  Violations v;
  v(image_size > 0, "image_size", "must be positive");
  v(gray_level(background_level), "background_level", "must be in 0..255");
  v(gray_level(foreground_level), "foreground_level", "must be in 0..255");
  v(foreground_level != background_level, "foreground_level", "must differ from background_level");
  v(extent_first >= 0.0 && extent_first <= 1.0, "extent_first", fmt(extent_first) + " outside [0, 1]");
  v(extent_last >= 0.0 && extent_last <= 1.0, "extent_last", fmt(extent_last) + " outside [0, 1]");
  v(frames >= 2, "frames", "must be at least 2");
  v(noise_amplitude >= 0 && noise_amplitude <= 255, "noise_amplitude", "must be in 0..255");
  v.throw_if_any("growth series spec");
}

std::vector<SynthImage> gen_extent_series(const ExtentSeriesSpec& spec) {
  spec.validate();
  std::vector<SynthImage> out;
  out.reserve(spec.extents.size());
  for (double extent : spec.extents) {
    out.push_back(make_square_image(spec.image_size, extent, spec.background_level,
                                    spec.foreground_level));
  }
  return out;
}

std::vector<SynthImage> gen_intensity_series(const IntensitySeriesSpec& spec) {
  spec.validate();
  std::vector<SynthImage> out;
  out.reserve(spec.foreground_levels.size());
  for (int level : spec.foreground_levels) {
    out.push_back(make_square_image(spec.image_size, spec.extent, spec.background_level, level));
  }
  return out;
}

std::vector<SynthImage> gen_growth_series(const GrowthSeriesSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int span = 2 * spec.noise_amplitude + 1;
  std::vector<SynthImage> out;
  out.reserve(static_cast<std::size_t>(spec.frames));
  for (int i = 0; i < spec.frames; ++i) {
    const double extent = spec.extent_first + (spec.extent_last - spec.extent_first) *
                                                  static_cast<double>(i) / (spec.frames - 1);
    SynthImage frame = make_square_image(spec.image_size, extent, spec.background_level,
                                         spec.foreground_level);
    if (spec.noise_amplitude > 0) {
      for (auto& px : frame.image.pixels()) {
        for (auto& c : px) {
          const int noise = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(span))) -
                            spec.noise_amplitude;
          c = static_cast<std::uint8_t>(std::clamp(c + noise, 0, 255));
        }
      }
    }
    out.push_back(std::move(frame));
  }
  return out;
}

}  // namespace somqe
