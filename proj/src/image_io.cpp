#include "cubepad/image_io.hpp"

#include <png.h>

#include <csetjmp>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "cubepad/tensor_io.hpp"

namespace cubepad {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports errors by longjmp. All C++ objects live in the caller's
// frame and are created before setjmp, so the jump never skips a destructor.
struct PngErrorState {
  char message[256] = {};
};

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof(state->message), "%s", msg);
  png_longjmp(png, 1);
}
void png_warning_fn(png_structp, png_const_charp) {}

struct PngReadHandles {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadHandles() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct PngWriteHandles {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteHandles() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

EquirectMap read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw FormatError(path.string() + ": not a PNG file");

  PngErrorState err;
  PngReadHandles h;
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  int depth = 0, color = 0;

  h.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
  if (!h.png) throw IoError("png_create_read_struct failed");
  h.info = png_create_info_struct(h.png);
  if (!h.info) throw IoError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(h.png))) throw FormatError(path.string() + ": " + err.message);

  png_init_io(h.png, file.get());
  png_set_sig_bytes(h.png, 8);
  png_read_info(h.png, h.info);
  width = png_get_image_width(h.png, h.info);
  height = png_get_image_height(h.png, h.info);
  depth = png_get_bit_depth(h.png, h.info);
  color = png_get_color_type(h.png, h.info);
  if (depth != 8)
    throw FormatError(path.string() + ": unsupported PNG bit depth " + std::to_string(depth));
  std::size_t channels = 0;
  switch (color) {
    case PNG_COLOR_TYPE_GRAY:
      channels = 1;
      break;
    case PNG_COLOR_TYPE_GRAY_ALPHA:
      png_set_strip_alpha(h.png);
      channels = 1;
      break;
    case PNG_COLOR_TYPE_RGB:
      channels = 3;
      break;
    case PNG_COLOR_TYPE_RGB_ALPHA:
      png_set_strip_alpha(h.png);
      channels = 3;
      break;
    case PNG_COLOR_TYPE_PALETTE:
      png_set_palette_to_rgb(h.png);
      if (png_get_valid(h.png, h.info, PNG_INFO_tRNS)) png_set_strip_alpha(h.png);
      channels = 3;
      break;
    default:
      throw FormatError(path.string() + ": unsupported PNG color type");
  }
  png_read_update_info(h.png, h.info);
  const std::size_t rowbytes = png_get_rowbytes(h.png, h.info);
  if (rowbytes != width * channels) throw FormatError(path.string() + ": unexpected PNG row layout");

  pixels.resize(rowbytes * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * rowbytes;
  png_read_image(h.png, rows.data());
  png_read_end(h.png, nullptr);

  const std::size_t plane = std::size_t{width} * height;
  std::vector<float> data(channels * plane);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      for (std::size_t c = 0; c < channels; ++c)
        data[c * plane + y * width + x] = pixels[y * rowbytes + x * channels + c] / 255.0f;
  return EquirectMap(channels, height, width, std::move(data));
}

std::array<float, 3> jet(float v) {
  v = std::clamp(v, 0.0f, 1.0f);
  auto ramp = [](float t) { return std::clamp(1.5f - std::fabs(4.0f * t), 0.0f, 1.0f); };
  return {ramp(v - 0.75f), ramp(v - 0.5f), ramp(v - 0.25f)};
}

void write_png(const Tensor& image, const std::filesystem::path& path, bool colormap) {
  const std::size_t c = image.dim(0), height = image.dim(1), w = image.dim(2);
  const std::size_t out_channels = (c == 1 && colormap) ? 3 : c;
  const std::size_t plane = height * w;
  std::vector<png_byte> pixels(out_channels * plane);
  auto to_byte = [](float v) {
    return static_cast<png_byte>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
  };
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t o = (y * w + x) * out_channels;
      if (out_channels != c) {
        const auto rgb = jet(image[y * w + x]);
        for (int k = 0; k < 3; ++k) pixels[o + k] = to_byte(rgb[k]);
      } else {
        for (std::size_t k = 0; k < c; ++k) pixels[o + k] = to_byte(image[k * plane + y * w + x]);
      }
    }
  }

  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  PngErrorState err;
  PngWriteHandles h;
  h.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
  if (!h.png) throw IoError("png_create_write_struct failed");
  h.info = png_create_info_struct(h.png);
  if (!h.info) throw IoError("png_create_info_struct failed");
  if (setjmp(png_jmpbuf(h.png))) throw IoError(path.string() + ": " + err.message);

  png_init_io(h.png, file.get());
  png_set_IHDR(h.png, h.info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(height), 8,
               out_channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(h.png, h.info);
  for (std::size_t y = 0; y < height; ++y) png_write_row(h.png, pixels.data() + y * w * out_channels);
  png_write_end(h.png, nullptr);
  if (std::fflush(file.get()) != 0) throw IoError("write failed for " + path.string());
}

// PFM stores rows bottom-to-top, channels interleaved.
EquirectMap read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string kind;
  std::size_t w = 0, h = 0;
  double scale = 0.0;
  in >> kind >> w >> h >> scale;
  if (!in || (kind != "Pf" && kind != "PF") || w == 0 || h == 0 || scale == 0.0)
    throw FormatError(path.string() + ": bad PFM header");
  in.get();  // single whitespace byte before the raster
  const std::size_t channels = kind == "PF" ? 3 : 1;
  const std::size_t count = channels * w * h;
  std::vector<std::uint8_t> raw(count * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw FormatError(path.string() + ": PFM raster truncated");
  in.peek();
  if (!in.eof()) throw FormatError(path.string() + ": trailing bytes after PFM raster");

  const bool little = scale < 0.0;
  std::vector<float> data(count);
  const std::size_t plane = w * h;
  for (std::size_t row = 0; row < h; ++row) {
    const std::size_t y = h - 1 - row;
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < channels; ++c) {
        const std::uint8_t* b = raw.data() + 4 * ((row * w + x) * channels + c);
        std::uint32_t bits = little ? (b[0] | b[1] << 8 | b[2] << 16 | std::uint32_t{b[3]} << 24)
                                    : (b[3] | b[2] << 8 | b[1] << 16 | std::uint32_t{b[0]} << 24);
        data[c * plane + y * w + x] = std::bit_cast<float>(bits);
      }
    }
  }
  if (!all_finite(data)) throw DataError(path.string() + ": PFM contains NaN or Inf");
  return EquirectMap(channels, h, w, std::move(data));
}

void write_pfm(const Tensor& image, const std::filesystem::path& path) {
  const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << (c == 3 ? "PF" : "Pf") << '\n' << w << ' ' << h << "\n-1.0\n";
  std::vector<std::uint8_t> raw;
  raw.reserve(image.size() * 4);
  const std::size_t plane = w * h;
  for (std::size_t row = 0; row < h; ++row) {
    const std::size_t y = h - 1 - row;
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t k = 0; k < c; ++k) {
        const auto bits = std::bit_cast<std::uint32_t>(image[k * plane + y * w + x]);
        for (int i = 0; i < 4; ++i) raw.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
      }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

EquirectMap read_image(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pfm") return read_pfm(path);
  if (ext == ".cpt") return EquirectMap(read_tensor(path));
  throw FormatError(path.string() + ": unsupported image extension '" + ext + "'");
}

void write_image(const Tensor& image, const std::filesystem::path& path,
                 const ImageExportOptions& options) {
  if (image.ndim() != 3) throw ShapeError("image export needs dims [c,h,w]");
  const std::string ext = lower_extension(path);
  if (ext == ".cpt") return write_tensor(image, path);
  if (image.dim(0) != 1 && image.dim(0) != 3)
    throw FormatError("image export supports 1 or 3 channels, got " + std::to_string(image.dim(0)));
  if (!all_finite(image.data())) throw DataError("refusing to export non-finite image");
  if (ext == ".png") return write_png(image, path, options.colormap);
  if (ext == ".pfm") return write_pfm(image, path);
  throw FormatError(path.string() + ": unsupported image extension '" + ext + "'");
}

}  // namespace cubepad
