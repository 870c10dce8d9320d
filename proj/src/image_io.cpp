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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "gsa/io.hpp"

namespace gsa {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("error writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "': " + ec.message());
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::int64_t read_uint(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    std::int64_t v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > (1 << 24)) throw ParseError(std::string("pnm: ") + what + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError(std::string("pnm: expected ") + what, start);
    return v;
  }

  std::size_t pos_ = 0;
  std::span<const std::uint8_t> bytes_;
};

}  // namespace

std::vector<std::uint8_t> encode_pnm(const Image8& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw ContractError("pnm: channels must be 1 or 3");
  }
  if (image.height <= 0 || image.width <= 0 ||
      static_cast<std::int64_t>(image.data.size()) != image.height * image.width * image.channels) {
    throw ContractError("pnm: payload size does not match extents");
  }
  const std::string header = std::string(image.channels == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(image.width) + " " + std::to_string(image.height) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.data.begin(), image.data.end());
  return out;
}

Image8 decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '6' && bytes[1] != '5')) {
    throw ParseError("pnm: bad magic, expected P6 or P5", 0);
  }
  Image8 img;
  img.channels = bytes[1] == '6' ? 3 : 1;
  HeaderReader r(bytes);
  r.pos_ = 2;
  img.width = r.read_uint("width");
  img.height = r.read_uint("height");
  const std::size_t maxval_at = r.pos_;
  const std::int64_t maxval = r.read_uint("maxval");
  if (img.width <= 0 || img.height <= 0) throw ParseError("pnm: zero extent", maxval_at);
  if (maxval <= 0 || maxval > 255) {
    throw ParseError("pnm: maxval must be in 1..255, got " + std::to_string(maxval), maxval_at);
  }
  if (r.pos_ >= bytes.size() || !std::isspace(bytes[r.pos_])) {
    throw ParseError("pnm: missing whitespace after header", r.pos_);
  }
  ++r.pos_;
  const auto need = static_cast<std::size_t>(img.width * img.height * img.channels);
  if (bytes.size() - r.pos_ < need) {
    throw ParseError("pnm: truncated payload, need " + std::to_string(need) + " bytes, have " +
                         std::to_string(bytes.size() - r.pos_),
                     bytes.size());
  }
  img.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos_),
                  bytes.begin() + static_cast<std::ptrdiff_t>(r.pos_ + need));
  if (maxval != 255) {
    for (auto& v : img.data) {
      if (v > maxval) throw ParseError("pnm: sample exceeds maxval", r.pos_);
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_ppm(const Tensor& image) {
  if (image.rank() != 3 || image.dim(2) != 3) {
    throw ContractError("ppm: expected (H, W, 3) image, got " + shape_str(image.shape()));
  }
  Image8 img{image.dim(0), image.dim(1), 3, {}};
  img.data.reserve(static_cast<std::size_t>(image.numel()));
  for (float v : image.data()) {
    img.data.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)));
  }
  return encode_pnm(img);
}

Tensor decode_ppm(std::span<const std::uint8_t> bytes) {
  const Image8 img = decode_pnm(bytes);
  if (img.channels != 3) throw ParseError("ppm: expected P6, got P5", 0);
  std::vector<float> data(img.data.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(img.data[i]) / 255.0f;
  return Tensor({img.height, img.width, 3}, std::move(data));
}

std::vector<std::uint8_t> encode_pgm(const LabelMap& label) {
  return encode_pnm(Image8{label.height, label.width, 1, label.data});
}

LabelMap decode_pgm(std::span<const std::uint8_t> bytes) {
  Image8 img = decode_pnm(bytes);
  if (img.channels != 1) throw ParseError("pgm: expected P5, got P6", 0);
  return {img.height, img.width, std::move(img.data)};
}

void write_ppm(const std::filesystem::path& path, const Tensor& image) {
  write_file(path, encode_ppm(image));
}
Tensor read_ppm(const std::filesystem::path& path) { return decode_ppm(read_file(path)); }
void write_pgm(const std::filesystem::path& path, const LabelMap& label) {
  write_file(path, encode_pgm(label));
}
LabelMap read_pgm(const std::filesystem::path& path) { return decode_pgm(read_file(path)); }

Tensor colorize_labels(const LabelMap& label) {
  static constexpr float kPalette[][3] = {
      {0.0f, 0.0f, 0.0f}, {0.9f, 0.1f, 0.1f}, {0.1f, 0.8f, 0.1f}, {0.1f, 0.3f, 0.9f},
      {0.9f, 0.8f, 0.1f}, {0.8f, 0.1f, 0.8f}, {0.1f, 0.8f, 0.8f}, {0.5f, 0.5f, 0.5f},
  };
  constexpr std::size_t kColors = sizeof(kPalette) / sizeof(kPalette[0]);
  std::vector<float> data;
  data.reserve(label.data.size() * 3);
  for (auto v : label.data) {
    for (int c = 0; c < 3; ++c) {
      data.push_back(v == kIgnoreLabel ? 1.0f : kPalette[v % kColors][c]);
    }
  }
  return Tensor({label.height, label.width, 3}, std::move(data));
}

}  // namespace gsa
