#include "pnp/core/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <vector>

namespace pnp {

namespace {

std::string lower_ext(const std::string& path) {
  const auto pos = path.find_last_of('.');
  if (pos == std::string::npos) return "";
  std::string ext = path.substr(pos + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// ---- PGM (binary P5, 8- or 16-bit big-endian) ----

int pgm_next_token(std::istream& in, std::string& tok) {
  tok.clear();
  int ch = in.get();
  while (ch != EOF) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
    } else if (std::isspace(ch)) {
      ch = in.get();
    } else {
      break;
    }
  }
  while (ch != EOF && !std::isspace(ch)) {
    tok.push_back(char(ch));
    ch = in.get();
  }
  return tok.empty() ? EOF : 0;
}

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string tok;
  if (pgm_next_token(in, tok) == EOF || tok != "P5")
    throw IoError(path + ": not a binary PGM (P5) file");
  long vals[3];
  for (long& v : vals) {
    if (pgm_next_token(in, tok) == EOF) throw IoError(path + ": truncated PGM header");
    v = std::stol(tok);
  }
  const long w = vals[0], h = vals[1], maxval = vals[2];
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw IoError(path + ": invalid PGM header");
  Image img(h, w, 1);
  const bool wide = maxval > 255;
  std::vector<unsigned char> row(size_t(w) * (wide ? 2 : 1));
  for (long i = 0; i < h; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), std::streamsize(row.size()));
    if (!in) throw IoError(path + ": truncated PGM data");
    for (long j = 0; j < w; ++j) {
      const unsigned v = wide ? (unsigned(row[2 * j]) << 8) | row[2 * j + 1] : row[j];
      img(i, j, 0) = double(v) / double(maxval);
    }
  }
  return img;
}

void write_pgm(const std::string& path, const Image& img, int bit_depth) {
  if (img.channels() != 1) throw IoError("PGM supports grayscale only");
  const int maxval = bit_depth == 16 ? 65535 : 255;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P5\n" << img.width() << " " << img.height() << "\n" << maxval << "\n";
  for (Eigen::Index i = 0; i < img.height(); ++i)
    for (Eigen::Index j = 0; j < img.width(); ++j) {
      const unsigned v = unsigned(quantize_unit(img(i, j, 0), maxval));
      if (bit_depth == 16) {
        out.put(char(v >> 8));
        out.put(char(v & 0xff));
      } else {
        out.put(char(v));
      }
    }
  if (!out) throw IoError("write failed for " + path);
}

// ---- PNG via libpng ----

Image read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng init failed");
  }
  // declared ahead of setjmp so an error longjmp never crosses live objects
  std::vector<std::vector<unsigned char>> rows;
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": PNG decode error");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int depth = png_get_bit_depth(png, info);
  int color = png_get_color_type(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  depth = png_get_bit_depth(png, info);
  color = png_get_color_type(png, info);
  const int channels = (color == PNG_COLOR_TYPE_RGB) ? 3 : 1;
  const int maxval = depth == 16 ? 65535 : 255;

  rows.resize(h);
  row_ptrs.resize(h);
  const size_t stride = size_t(w) * channels * (depth / 8);
  for (png_uint_32 i = 0; i < h; ++i) {
    rows[i].resize(stride);
    row_ptrs[i] = rows[i].data();
  }
  png_read_image(png, row_ptrs.data());
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(h, w, channels);
  for (png_uint_32 i = 0; i < h; ++i)
    for (png_uint_32 j = 0; j < w; ++j)
      for (int c = 0; c < channels; ++c) {
        unsigned v;
        if (depth == 16) {
          const size_t off = (size_t(j) * channels + c) * 2;
          v = (unsigned(rows[i][off]) << 8) | rows[i][off + 1];
        } else {
          v = rows[i][size_t(j) * channels + c];
        }
        img(i, j, c) = double(v) / double(maxval);
      }
  return img;
}

void write_png(const std::string& path, const Image& img, int bit_depth) {
  if (img.channels() != 1 && img.channels() != 3)
    throw IoError("PNG export supports 1 or 3 channels");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng init failed");
  }
  std::vector<unsigned char> row;  // ahead of setjmp
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path + ": PNG encode error");
  }
  png_init_io(png, fp.get());
  const int color = img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, png_uint_32(img.width()), png_uint_32(img.height()), bit_depth, color,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const int maxval = bit_depth == 16 ? 65535 : 255;
  const size_t stride = size_t(img.width()) * img.channels() * (bit_depth / 8);
  row.resize(stride);
  for (Eigen::Index i = 0; i < img.height(); ++i) {
    size_t off = 0;
    for (Eigen::Index j = 0; j < img.width(); ++j)
      for (Eigen::Index c = 0; c < img.channels(); ++c) {
        const unsigned v = unsigned(quantize_unit(img(i, j, c), maxval));
        if (bit_depth == 16) {
          row[off++] = (unsigned char)(v >> 8);
          row[off++] = (unsigned char)(v & 0xff);
        } else {
          row[off++] = (unsigned char)(v);
        }
      }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

double quantize_unit(double v, int maxval) {
  v = std::clamp(v, 0.0, 1.0);
  return std::nearbyint(v * maxval);  // default FP mode: round half to even
}

Image read_image(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "pgm") return read_pgm(path);
  if (ext == "png") return read_png(path);
  throw IoError("unsupported image format: " + path);
}

void write_image(const std::string& path, const Image& img, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw IoError("bit depth must be 8 or 16");
  if (!img.all_finite()) throw NumericError("refusing to export non-finite image");
  const std::string ext = lower_ext(path);
  if (ext == "pgm")
    write_pgm(path, img, bit_depth);
  else if (ext == "png")
    write_png(path, img, bit_depth);
  else
    throw IoError("unsupported image format: " + path);
}

BinaryMask read_mask(const std::string& path) {
  const Image img = read_image(path);
  if (img.channels() != 1) throw IoError("mask image must be grayscale");
  BinaryMask m(img.height(), img.width());
  for (Eigen::Index i = 0; i < img.height(); ++i)
    for (Eigen::Index j = 0; j < img.width(); ++j) m.set(i, j, img(i, j, 0) > 0.5);
  return m;
}

void write_mask(const std::string& path, const BinaryMask& mask) {
  Image img(mask.height, mask.width, 1);
  for (Eigen::Index i = 0; i < mask.height; ++i)
    for (Eigen::Index j = 0; j < mask.width; ++j) img(i, j, 0) = mask.observed(i, j) ? 1.0 : 0.0;
  write_image(path, img, 8);
}

}  // namespace pnp
