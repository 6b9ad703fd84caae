#include "idnet/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace idnet {

namespace {

std::uint32_t bswap32(std::uint32_t x)
{
  return (x >> 24) | ((x >> 8) & 0x0000FF00U) | ((x << 8) & 0x00FF0000U) | (x << 24);
}

// Skips whitespace and '#' comments, then reads one token.
std::string header_token(std::istream &in)
{
  std::string tok;
  int         c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {}
      continue;
    }
    if (!std::isspace(c)) { break; }
  }
  if (c == EOF) { throw ParseError("", "truncated image header"); }
  tok.push_back(static_cast<char>(c));
  while ((c = in.peek()) != EOF && !std::isspace(c)) { tok.push_back(static_cast<char>(in.get())); }
  return tok;
}

long header_int(std::istream &in, char const *what)
{
  std::string const tok = header_token(in);
  char             *end = nullptr;
  long const        v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || v <= 0) {
    throw ParseError("", std::string("bad ") + what + " '" + tok + "' in image header");
  }
  return v;
}

std::ifstream open_binary(std::string const &path)
{
  std::ifstream file(path, std::ios::binary);
  if (!file) { throw IoError("cannot open '" + path + "'"); }
  return file;
}

} // namespace

void write_pfm(std::ostream &out, Grid const &img)
{
  if (img.size() == 0) { throw ArgumentError("write_pfm: empty image"); }
  out << "Pf\n" << img.cols() << " " << img.rows() << "\n-1.0\n";
  std::vector<char> row(static_cast<std::size_t>(img.cols()) * 4);
  for (Index i = img.rows() - 1; i >= 0; i--) {
    for (Index j = 0; j < img.cols(); j++) {
      auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(img(i, j)));
      if constexpr (std::endian::native == std::endian::big) { bits = bswap32(bits); }
      std::memcpy(row.data() + 4 * j, &bits, 4);
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) { throw IoError("write_pfm: write failed"); }
}

void write_pfm(std::string const &path, Grid const &img)
{
  std::ofstream file(path, std::ios::binary);
  if (!file) { throw IoError("cannot open '" + path + "' for writing"); }
  write_pfm(file, img);
}

GridStack read_pfm(std::istream &in)
{
  std::string const magic = header_token(in);
  std::size_t       channels;
  if (magic == "Pf") {
    channels = 1;
  } else if (magic == "PF") {
    channels = 3;
  } else {
    throw ParseError("", "not a PFM file (magic '" + magic + "')");
  }
  long const        width = header_int(in, "width");
  long const        height = header_int(in, "height");
  std::string const scale_tok = header_token(in);
  double            scale;
  try {
    scale = std::stod(scale_tok);
  } catch (std::exception const &) {
    throw ParseError("", "bad PFM scale '" + scale_tok + "'");
  }
  if (scale == 0.0 || !std::isfinite(scale)) { throw ParseError("", "bad PFM scale '" + scale_tok + "'"); }
  in.get(); // single whitespace byte ends the header
  bool const file_little = scale < 0.0;
  bool const swap = file_little != (std::endian::native == std::endian::little);

  GridStack         out(channels, Grid(height, width));
  std::vector<char> row(static_cast<std::size_t>(width) * channels * 4);
  for (long i = height - 1; i >= 0; i--) {
    in.read(row.data(), static_cast<std::streamsize>(row.size()));
    if (in.gcount() != static_cast<std::streamsize>(row.size())) { throw ParseError("", "truncated PFM data"); }
    for (long j = 0; j < width; j++) {
      for (std::size_t c = 0; c < channels; c++) {
        std::uint32_t bits;
        std::memcpy(&bits, row.data() + 4 * (static_cast<std::size_t>(j) * channels + c), 4);
        if (swap) { bits = bswap32(bits); }
        out[c](i, j) = static_cast<double>(std::bit_cast<float>(bits));
      }
    }
  }
  return out;
}

GridStack read_pfm(std::string const &path)
{
  auto file = open_binary(path);
  return read_pfm(file);
}

GridStack read_pnm(std::istream &in)
{
  std::string const magic = header_token(in);
  if (magic != "P2" && magic != "P3" && magic != "P5" && magic != "P6") {
    throw ParseError("", "unsupported netpbm magic '" + magic + "'");
  }
  bool const        ascii = magic == "P2" || magic == "P3";
  std::size_t const channels = (magic == "P3" || magic == "P6") ? 3 : 1;
  long const        width = header_int(in, "width");
  long const        height = header_int(in, "height");
  long const        maxval = header_int(in, "maxval");
  if (maxval > 65535) { throw ParseError("", "netpbm maxval exceeds 65535"); }
  if (!ascii) { in.get(); }

  GridStack    out(channels, Grid(height, width));
  double const inv = 1.0 / static_cast<double>(maxval);
  int const    bytes = maxval > 255 ? 2 : 1;
  for (long i = 0; i < height; i++) {
    for (long j = 0; j < width; j++) {
      for (std::size_t c = 0; c < channels; c++) {
        long value;
        if (ascii) {
          std::string const tok = header_token(in);
          value = std::strtol(tok.c_str(), nullptr, 10);
        } else {
          unsigned char b[2] = {0, 0};
          in.read(reinterpret_cast<char *>(b), bytes);
          if (in.gcount() != bytes) { throw ParseError("", "truncated netpbm data"); }
          value = bytes == 2 ? (b[0] << 8 | b[1]) : b[0];
        }
        if (value < 0 || value > maxval) { throw ParseError("", "netpbm sample out of range"); }
        out[c](i, j) = static_cast<double>(value) * inv;
      }
    }
  }
  return out;
}

GridStack read_pnm(std::string const &path)
{
  auto file = open_binary(path);
  return read_pnm(file);
}

GridStack read_png(std::string const &path)
{
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot read PNG '" + path + "': " + image.message);
  }
  bool const color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::size_t const     channels = color ? 3 : 1;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode PNG '" + path + "': " + image.message);
  }
  Index const H = image.height;
  Index const W = image.width;
  GridStack   out(channels, Grid(H, W));
  for (Index i = 0; i < H; i++) {
    for (Index j = 0; j < W; j++) {
      for (std::size_t c = 0; c < channels; c++) {
        std::size_t const k = (static_cast<std::size_t>(i * W + j)) * channels + c;
        out[c](i, j) = buffer[k] / 255.0;
      }
    }
  }
  return out;
}

void write_png(std::string const &path, GridStack const &channels)
{
  validate_stack(channels, "write_png");
  if (channels.size() != 1 && channels.size() != 3) { throw ArgumentError("write_png: need 1 or 3 channels"); }
  Index const H = channels.front().rows();
  Index const W = channels.front().cols();
  png_image   image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(W);
  image.height = static_cast<png_uint_32>(H);
  image.format = channels.size() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(static_cast<std::size_t>(H * W) * channels.size());
  for (Index i = 0; i < H; i++) {
    for (Index j = 0; j < W; j++) {
      for (std::size_t c = 0; c < channels.size(); c++) {
        double const x = std::clamp(channels[c](i, j), 0.0, 1.0);
        buffer[static_cast<std::size_t>(i * W + j) * channels.size() + c] =
          static_cast<png_byte>(std::lround(255.0 * x));
      }
    }
  }
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path + "': " + image.message);
  }
}

GridStack read_image(std::string const &path)
{
  auto file = open_binary(path);
  char magic[8] = {};
  file.read(magic, sizeof magic);
  if (file.gcount() >= 8 && std::memcmp(magic, "\x89PNG\r\n\x1a\n", 8) == 0) { return read_png(path); }
  if (file.gcount() < 2 || magic[0] != 'P') { throw ParseError("", "unrecognized image format '" + path + "'"); }
  file.clear();
  file.seekg(0);
  if (magic[1] == 'f' || magic[1] == 'F') { return read_pfm(file); }
  return read_pnm(file);
}

} // namespace idnet
