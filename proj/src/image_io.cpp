#include "amod/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "amod/common.hpp"

namespace amod {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Frame from_bytes(const std::vector<unsigned char>& bytes, int h, int w, int c) {
  Frame img(h, w, c);
  constexpr float kInv = 1.0f / 255.0f;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch)
        img(ch, y, x) =
            kInv * bytes[(static_cast<std::size_t>(y) * w + x) * c + ch];
  return img;
}

std::vector<unsigned char> to_bytes(const Frame& img) {
  const int h = img.height(), w = img.width(), c = img.channels();
  std::vector<unsigned char> bytes(static_cast<std::size_t>(h) * w * c);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch) {
        float v = img(ch, y, x);
        v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
        bytes[(static_cast<std::size_t>(y) * w + x) * c + ch] =
            static_cast<unsigned char>(v * 255.0f + 0.5f);
      }
  return bytes;
}

Frame read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw DataError("cannot open image: " + path.string());

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("png: allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("png: allocation failed");
  }
  std::vector<png_bytep> rows;
  std::vector<unsigned char> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("undecodable image: " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int bit_depth = png_get_bit_depth(png, info);
  int color_type = png_get_color_type(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("png: unsupported channel count in " + path.string());
  }

  std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = buffer.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  // Drop any row padding.
  std::vector<unsigned char> packed(static_cast<std::size_t>(h) * w * channels);
  for (png_uint_32 y = 0; y < h; ++y)
    std::memcpy(packed.data() + static_cast<std::size_t>(y) * w * channels,
                buffer.data() + y * stride, static_cast<std::size_t>(w) * channels);
  return from_bytes(packed, static_cast<int>(h), static_cast<int>(w), channels);
}

Frame read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P6") throw DataError("ppm: expected P6 in " + path.string());
  auto next_int = [&in, &path]() {
    // Skips whitespace and '#' comments, per the PNM grammar.
    for (;;) {
      int ch = in.peek();
      if (ch == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(ch)) {
        in.get();
      } else {
        break;
      }
    }
    long v = -1;
    in >> v;
    if (!in || v < 0) throw DataError("ppm: malformed header in " + path.string());
    return v;
  };
  long w = next_int();
  long h = next_int();
  long maxval = next_int();
  if (maxval != 255) throw DataError("ppm: only maxval 255 supported: " + path.string());
  in.get();  // single whitespace after maxval
  std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
    throw DataError("undecodable image: " + path.string());
  return from_bytes(bytes, static_cast<int>(h), static_cast<int>(w), 3);
}

}  // namespace

Frame read_image(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(c));
  if (ext == ".png") return read_png(path);
  if (ext == ".ppm") return read_ppm(path);
  throw DataError("unsupported image format: " + path.string());
}

void write_png(const std::filesystem::path& path, const Frame& img) {
  if (img.channels() != 1 && img.channels() != 3)
    throw DataError("write_png: expected 1 or 3 channels");
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw DataError("cannot write image: " + path.string());

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("png: allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("png: allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("png: write failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), 8,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<unsigned char> bytes = to_bytes(img);
  std::size_t stride = static_cast<std::size_t>(img.width()) * img.channels();
  for (int y = 0; y < img.height(); ++y)
    png_write_row(png, bytes.data() + static_cast<std::size_t>(y) * stride);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_ppm(const std::filesystem::path& path, const Frame& img) {
  if (img.channels() != 3) throw DataError("write_ppm: expected 3 channels");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image: " + path.string());
  out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<unsigned char> bytes = to_bytes(img);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace amod
