// Copyright (c) 2026 The structaug authors.
// Licensed under the Apache License 2.0.

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include "structaug/image.hpp"

namespace structaug {

namespace {

uint8_t quantize8(double v) {
  const double c = std::min(1.0, std::max(0.0, v));
  return static_cast<uint8_t>(std::lround(c * 255.0));
}

bool has_suffix(const std::string& s, const std::string& suf) {
  if (s.size() < suf.size()) return false;
  std::string tail = s.substr(s.size() - suf.size());
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return tail == suf;
}

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

void put_u32_le(std::ofstream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                        static_cast<unsigned char>((v >> 8) & 0xFF),
                        static_cast<unsigned char>((v >> 16) & 0xFF),
                        static_cast<unsigned char>((v >> 24) & 0xFF)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32_le(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

Image load_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open PNG file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng: read struct allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng: info struct allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng: failed to decode " + path);
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  // Normalize everything to 8-bit gray or RGB.
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int out_channels = png_get_channels(png, info);
  if (out_channels != 1 && out_channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("PNG has unsupported channel count after normalization: " + path);
  }

  std::vector<uint8_t> rowbuf(static_cast<size_t>(w) * out_channels);
  Image img(static_cast<int>(h), static_cast<int>(w), out_channels);
  const size_t N = img.pixel_count();
  for (png_uint_32 i = 0; i < h; ++i) {
    png_read_row(png, rowbuf.data(), nullptr);
    for (png_uint_32 j = 0; j < w; ++j)
      for (int c = 0; c < out_channels; ++c)
        img.data[static_cast<size_t>(c) * N + static_cast<size_t>(i) * w + j] =
            rowbuf[static_cast<size_t>(j) * out_channels + c] / 255.0;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void save_png(const Image& img, const std::string& path) {
  if (img.channels != 1 && img.channels != 3)
    throw IoError("save_png: only 1- or 3-channel images supported");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open PNG file for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng: write struct allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng: info struct allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng: failed to encode " + path);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const size_t N = img.pixel_count();
  std::vector<uint8_t> rowbuf(static_cast<size_t>(img.width) * img.channels);
  for (int i = 0; i < img.height; ++i) {
    for (int j = 0; j < img.width; ++j)
      for (int c = 0; c < img.channels; ++c)
        rowbuf[static_cast<size_t>(j) * img.channels + c] = quantize8(
            img.data[static_cast<size_t>(c) * N + static_cast<size_t>(i) * img.width + j]);
    png_write_row(png, rowbuf.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PPM file: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P6") throw IoError("not a binary PPM (P6) file: " + path);
  auto next_int = [&in, &path]() {
    // skip whitespace and '#' comment lines
    int ch = in.peek();
    while (ch == '#' || std::isspace(ch)) {
      if (ch == '#') in.ignore(1 << 20, '\n');
      else in.get();
      ch = in.peek();
    }
    long v = -1;
    in >> v;
    if (!in || v < 0) throw IoError("malformed PPM header: " + path);
    return v;
  };
  const long w = next_int();
  const long h = next_int();
  const long maxval = next_int();
  if (maxval != 255) throw IoError("only maxval 255 PPM supported: " + path);
  in.get();  // single whitespace after header

  std::vector<uint8_t> buf(static_cast<size_t>(w) * h * 3);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size()))
    throw IoError("truncated PPM payload: " + path);

  Image img(static_cast<int>(h), static_cast<int>(w), 3);
  const size_t N = img.pixel_count();
  for (size_t p = 0; p < N; ++p)
    for (int c = 0; c < 3; ++c) img.data[static_cast<size_t>(c) * N + p] = buf[p * 3 + c] / 255.0;
  return img;
}

void save_ppm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open PPM file for writing: " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  const size_t N = img.pixel_count();
  std::vector<uint8_t> buf(N * 3);
  for (size_t p = 0; p < N; ++p)
    for (int c = 0; c < 3; ++c) {
      // grayscale saved as PPM replicates the single plane
      const size_t src = img.channels == 3 ? static_cast<size_t>(c) * N + p : p;
      buf[p * 3 + c] = quantize8(img.data[src]);
    }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("failed writing PPM payload: " + path);
}

Image load_image(const std::string& path) {
  if (has_suffix(path, ".png")) return load_png(path);
  if (has_suffix(path, ".ppm")) return load_ppm(path);
  throw IoError("unsupported image extension (expect .png or .ppm): " + path);
}

void save_image(const Image& img, const std::string& path) {
  if (has_suffix(path, ".png")) return save_png(img, path);
  if (has_suffix(path, ".ppm")) return save_ppm(img, path);
  throw IoError("unsupported image extension (expect .png or .ppm): " + path);
}

void save_tensor(const std::string& path, const GridVector& v, int m, int n, int channels) {
  if (v.size() != static_cast<size_t>(m) * n * channels)
    throw ConfigError("save_tensor: length does not match header dimensions");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open tensor file for writing: " + path);
  out.write("SAUG", 4);
  put_u32_le(out, static_cast<uint32_t>(m));
  put_u32_le(out, static_cast<uint32_t>(n));
  put_u32_le(out, static_cast<uint32_t>(channels));
  std::vector<float> buf(v.size());
  for (size_t i = 0; i < v.size(); ++i) buf[i] = static_cast<float>(v[i]);
  static_assert(sizeof(float) == 4);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * 4));
  if (!out) throw IoError("failed writing tensor payload: " + path);
}

GridVector load_tensor(const std::string& path, int* m, int* n, int* channels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tensor file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SAUG", 4) != 0)
    throw IoError("bad tensor magic (expected SAUG): " + path);
  const uint32_t hm = get_u32_le(in);
  const uint32_t hn = get_u32_le(in);
  const uint32_t hc = get_u32_le(in);
  if (!in) throw IoError("truncated tensor header: " + path);
  const size_t count = static_cast<size_t>(hm) * hn * hc;
  if (count == 0 || count > (1u << 28)) throw IoError("implausible tensor dimensions: " + path);
  std::vector<float> buf(count);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count * 4));
  if (in.gcount() != static_cast<std::streamsize>(count * 4))
    throw IoError("truncated tensor payload: " + path);
  GridVector v(count);
  for (size_t i = 0; i < count; ++i) v[i] = buf[i];
  if (m) *m = static_cast<int>(hm);
  if (n) *n = static_cast<int>(hn);
  if (channels) *channels = static_cast<int>(hc);
  return v;
}

}  // namespace structaug
