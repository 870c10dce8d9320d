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

#include <bit>
#include <cstring>
#include <limits>

#include "gsa/io.hpp"

namespace gsa {
namespace {

static_assert(std::numeric_limits<float>::is_iec559, "GST payloads are IEEE-754 binary32");

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  void need(std::size_t n, const char* what) const {
    if (in_.size() - pos_ < n) {
      throw ParseError(std::string("gst: short read in ") + what, in_.size());
    }
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return in_[pos_++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    const auto v = static_cast<std::uint16_t>(in_[pos_] | (in_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

bool valid_utf8(std::span<const std::uint8_t> s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const std::uint8_t c = s[i];
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((s[i + k] & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (s[i + k] & 0x3F);
    }
    static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

}  // namespace

std::vector<std::uint8_t> gst_encode(const GstArchive& archive) {
  Writer w;
  w.bytes("GST1", 4);
  if (archive.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ContractError("gst: too many entries");
  }
  w.u32(static_cast<std::uint32_t>(archive.size()));
  for (const auto& [name, t] : archive) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw ContractError("gst: name longer than 65535 bytes");
    }
    if (!valid_utf8({reinterpret_cast<const std::uint8_t*>(name.data()), name.size()})) {
      throw ContractError("gst: name is not valid UTF-8");
    }
    if (t.rank() > 255) throw ContractError("gst: rank above 255");
    w.u16(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.u8(static_cast<std::uint8_t>(t.rank()));
    for (auto d : t.shape()) {
      if (d > std::numeric_limits<std::uint32_t>::max()) throw ContractError("gst: dim too large");
      w.u32(static_cast<std::uint32_t>(d));
    }
    for (float v : t.data()) w.f32(v);
  }
  return w.take();
}

GstArchive gst_decode(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), "GST1", 4) != 0) throw ParseError("gst: bad magic", 0);
  const std::uint32_t count = r.u32("entry count");
  GstArchive out;
  for (std::uint32_t e = 0; e < count; ++e) {
    const std::size_t entry_at = r.pos();
    const std::uint16_t len = r.u16("name length");
    const auto name_bytes = r.take(len, "name");
    if (!valid_utf8(name_bytes)) throw ParseError("gst: name is not valid UTF-8", entry_at + 2);
    const std::uint8_t rank = r.u8("rank");
    Shape shape;
    std::uint64_t numel = 1;
    for (int i = 0; i < rank; ++i) {
      const std::size_t dim_at = r.pos();
      const std::uint32_t d = r.u32("dims");
      if (d == 0) throw ParseError("gst: zero dimension", dim_at);
      numel *= d;
      if (numel > r.remaining() / 4) throw ParseError("gst: dimension product overflows payload", dim_at);
      shape.push_back(d);
    }
    const auto payload = r.take(static_cast<std::size_t>(numel) * 4, "payload");
    std::vector<float> data(static_cast<std::size_t>(numel));
    for (std::size_t i = 0; i < data.size(); ++i) {
      std::uint32_t v = 0;
      for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(payload[i * 4 + k]) << (8 * k);
      data[i] = std::bit_cast<float>(v);
    }
    out.emplace_back(std::string(name_bytes.begin(), name_bytes.end()),
                     Tensor(std::move(shape), std::move(data)));
  }
  if (r.remaining() != 0) throw ParseError("gst: trailing bytes after last entry", r.pos());
  return out;
}

void gst_write(const GstArchive& archive, const std::filesystem::path& path) {
  write_file(path, gst_encode(archive));
}

GstArchive gst_read(const std::filesystem::path& path) { return gst_decode(read_file(path)); }

}  // namespace gsa
