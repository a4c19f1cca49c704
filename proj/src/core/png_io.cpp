#include "illum/png_io.hpp"

#include <png.h>

#include <array>
#include <cstring>
#include <fstream>
#include <iterator>

#include "illum/error.hpp"

namespace illum {

namespace fs = std::filesystem;

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

struct PngImage {
  png_image img{};
  PngImage() {
    img.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&img); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

png_image gray_header(const Image& image) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_GRAY;
  return img;
}

Image finish_read(PngImage& p, const std::string& what) {
  p.img.format = PNG_FORMAT_GRAY;
  Image out(static_cast<int>(p.img.width), static_cast<int>(p.img.height));
  if (!png_image_finish_read(&p.img, nullptr, out.pixels().data(), 0, nullptr))
    throw Error(ErrorKind::io, what + ": " + p.img.message);
  return out;
}

fs::path temp_sibling(const fs::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  return tmp;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.empty()) throw Error(ErrorKind::dimension, "cannot encode an empty image");
  png_image img = gray_header(image);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.pixels().data(), 0, nullptr))
    throw Error(ErrorKind::io, std::string("png encode: ") + img.message);
  std::vector<std::uint8_t> bytes(size);
  if (!png_image_write_to_memory(&img, bytes.data(), &size, 0, image.pixels().data(), 0, nullptr))
    throw Error(ErrorKind::io, std::string("png encode: ") + img.message);
  bytes.resize(size);
  return bytes;
}

Image decode_png(const std::vector<std::uint8_t>& bytes) {
  PngImage p;
  if (!png_image_begin_read_from_memory(&p.img, bytes.data(), bytes.size()))
    throw Error(ErrorKind::io, std::string("png decode: ") + p.img.message);
  return finish_read(p, "png decode");
}

void write_png(const fs::path& path, const Image& image) {
  const auto bytes = encode_png(image);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Image read_png(const fs::path& path) {
  PngImage p;
  if (!png_image_begin_read_from_file(&p.img, path.c_str()))
    throw Error(ErrorKind::io, path.string() + ": " + p.img.message);
  return finish_read(p, path.string());
}

void write_mask_png(const fs::path& path, const Mask& mask) { write_png(path, mask_to_image(mask)); }

Mask read_mask_png(const fs::path& path) { return image_to_mask(read_png(path)); }

void write_file_atomic(const fs::path& path, std::string_view contents) {
  const auto tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::io, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::io, "cannot move " + tmp.string() + " into place");
  }
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::array<int, 256> lookup;
  lookup.fill(-1);
  for (int i = 0; i < 64; ++i) lookup[static_cast<unsigned char>(kAlphabet[i])] = i;

  std::vector<std::uint8_t> out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    const int v = lookup[static_cast<unsigned char>(c)];
    if (v < 0) throw Error(ErrorKind::protocol, "invalid base64 character");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
    }
  }
  return out;
}

}  // namespace illum
