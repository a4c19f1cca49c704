#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "illum/image.hpp"

namespace illum {

// 8-bit single-channel PNG. Reading converts any colour type to gray.
std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(const std::vector<std::uint8_t>& bytes);

// Writes through a sibling temp file and renames, so readers never see a
// partial file.
void write_png(const std::filesystem::path& path, const Image& image);
Image read_png(const std::filesystem::path& path);

void write_mask_png(const std::filesystem::path& path, const Mask& mask);
Mask read_mask_png(const std::filesystem::path& path);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Atomic replace of a text file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace illum
