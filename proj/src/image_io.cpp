#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <png.h>

#include "somqe/error.hpp"
#include "somqe/image.hpp"

namespace somqe {

namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw IoError("read failed for " + path.string());
  }
  return bytes;
}

class PnmReader {
 public:
  explicit PnmReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  int next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw DecodeError("PNM header: expected an integer");
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_++] - '0');
      if (value > 1'000'000) throw DecodeError("PNM header: value too large");
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates the header from the raster.
  void end_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw DecodeError("PNM header: missing separator before raster");
    }
    ++pos_;
  }

  std::size_t position() const { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 2;
};

bool is_png(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

bool is_pnm(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6');
}

}  // namespace

RasterImage decode_pnm(const std::vector<std::uint8_t>& bytes) {
  if (!is_pnm(bytes)) {
    throw DecodeError("not a binary PGM/PPM file");
  }
  const int channels = bytes[1] == '6' ? 3 : 1;
  PnmReader reader(bytes);
  const int width = reader.next_int();
  const int height = reader.next_int();
  const int maxval = reader.next_int();
  reader.end_header();
  if (width <= 0 || height <= 0) {
    throw DecodeError("PNM dimensions must be positive");
  }
  if (maxval <= 0 || maxval > 65535) {
    throw DecodeError("PNM maxval out of range");
  }
  const int sample_bytes = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  const std::size_t need = count * static_cast<std::size_t>(channels * sample_bytes);
  if (bytes.size() - reader.position() < need) {
    throw DecodeError("PNM raster truncated");
  }

  const std::uint8_t* p = bytes.data() + reader.position();
  auto sample = [&]() -> std::uint8_t {
    unsigned v = *p++;
    if (sample_bytes == 2) v = (v << 8) | *p++;
    if (v > static_cast<unsigned>(maxval)) throw DecodeError("PNM sample exceeds maxval");
    if (maxval == 255) return static_cast<std::uint8_t>(v);
    return static_cast<std::uint8_t>((v * 510u + static_cast<unsigned>(maxval)) /
                                     (2u * static_cast<unsigned>(maxval)));
  };

  std::vector<Rgb> pixels(count);
  for (auto& px : pixels) {
    if (channels == 1) {
      const auto g = sample();
      px = {g, g, g};
    } else {
      px[0] = sample();
      px[1] = sample();
      px[2] = sample();
    }
  }
  return RasterImage(width, height, std::move(pixels));
}

RasterImage decode_png(const std::vector<std::uint8_t>& bytes) {
  if (!is_png(bytes)) {
    throw DecodeError("not a PNG file");
  }
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw DecodeError("PNG: " + msg);
  }
  // Decode as RGBA so alpha is dropped rather than composited.
  img.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw DecodeError("PNG: " + msg);
  }
  const int width = static_cast<int>(img.width);
  const int height = static_cast<int>(img.height);
  png_image_free(&img);

  std::vector<Rgb> pixels(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = {buffer[4 * i], buffer[4 * i + 1], buffer[4 * i + 2]};
  }
  return RasterImage(width, height, std::move(pixels));
}

RasterImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  if (is_png(bytes)) return decode_png(bytes);
  if (is_pnm(bytes)) return decode_pnm(bytes);
  throw DecodeError("unsupported image format: " + path.string());
}

std::vector<std::uint8_t> encode_png(const RasterImage& image) {
  if (image.empty()) {
    throw InputError("cannot encode an empty image");
  }
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_RGB;

  static_assert(sizeof(Rgb) == 3);
  const void* raster = image.pixels().data();
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, raster, 0, nullptr)) {
    throw IoError(std::string("PNG encode: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, raster, 0, nullptr)) {
    throw IoError(std::string("PNG encode: ") + img.message);
  }
  out.resize(size);
  return out;
}

void save_png(const RasterImage& image, const std::filesystem::path& path) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

std::vector<std::uint8_t> encode_ppm(const RasterImage& image) {
  const std::string header = "P6\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (const auto& px : image.pixels()) {
    out.insert(out.end(), px.begin(), px.end());
  }
  return out;
}

}  // namespace somqe
