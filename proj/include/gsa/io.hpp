/* Copyright 2026 The gsaseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gsa/dataset.hpp"
#include "gsa/tensor.hpp"

namespace gsa {

// Binary PPM (P6) / PGM (P5), maxval <= 255. Decoders raise ParseError with
// the byte offset of the problem.
struct Image8 {
  std::int64_t height = 0;
  std::int64_t width = 0;
  int channels = 0;  // 3 for P6, 1 for P5
  std::vector<std::uint8_t> data;
};

std::vector<std::uint8_t> encode_pnm(const Image8& image);
Image8 decode_pnm(std::span<const std::uint8_t> bytes);

// (H, W, 3) floats in [0, 1] <-> P6 bytes, rounding to the nearest 1/255.
std::vector<std::uint8_t> encode_ppm(const Tensor& image);
Tensor decode_ppm(std::span<const std::uint8_t> bytes);
// Class ids stored verbatim as P5 grey levels.
std::vector<std::uint8_t> encode_pgm(const LabelMap& label);
LabelMap decode_pgm(std::span<const std::uint8_t> bytes);

void write_ppm(const std::filesystem::path& path, const Tensor& image);
Tensor read_ppm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const LabelMap& label);
LabelMap read_pgm(const std::filesystem::path& path);

// Palette-colorized label map for viewing; ignore pixels are white.
Tensor colorize_labels(const LabelMap& label);

// GST tensor archive, little-endian:
//   "GST1", u32 entry count, then per entry
//   u16 name length, UTF-8 name, u8 rank, rank x u32 dims, f32 payload.
using GstArchive = std::vector<std::pair<std::string, Tensor>>;

std::vector<std::uint8_t> gst_encode(const GstArchive& archive);
GstArchive gst_decode(std::span<const std::uint8_t> bytes);
void gst_write(const GstArchive& archive, const std::filesystem::path& path);
GstArchive gst_read(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
// Writes to a sibling temporary and renames, so readers never see a partial
// file.
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace gsa
