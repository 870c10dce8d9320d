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

#include <cstring>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "gsa/errors.hpp"
#include "gsa/gradcheck.hpp"
#include "gsa/io.hpp"

namespace gsa {
namespace {

std::vector<std::uint8_t> bytes(const std::string& s) { return {s.begin(), s.end()}; }

Tensor quantized_image(std::int64_t h, std::int64_t w, std::uint64_t seed) {
  std::mt19937 rng(static_cast<unsigned>(seed));
  std::vector<float> v(static_cast<std::size_t>(h * w * 3));
  for (auto& x : v) x = static_cast<float>(rng() % 256) / 255.0f;
  return Tensor({h, w, 3}, v);
}

TEST(Pnm, PgmHandBytes) {
  auto b = bytes("P5\n2 2\n255\n");
  for (std::uint8_t v : {0, 1, 2, 3}) b.push_back(v);
  const LabelMap l = decode_pgm(b);
  EXPECT_EQ(l.height, 2);
  EXPECT_EQ(l.width, 2);
  EXPECT_EQ(l.data, (std::vector<std::uint8_t>{0, 1, 2, 3}));
  EXPECT_EQ(l.at(1, 0), 2);
  EXPECT_EQ(encode_pgm(l), b);
}

TEST(Pnm, HeaderCommentsAndWhitespace) {
  auto b = bytes("P5 # comment\n 3\t1 # more\n255\n");
  for (std::uint8_t v : {7, 8, 9}) b.push_back(v);
  EXPECT_EQ(decode_pgm(b).data, (std::vector<std::uint8_t>{7, 8, 9}));
}

TEST(Pnm, PpmRoundTrip) {
  const Tensor img = quantized_image(5, 7, 1);
  const Tensor back = decode_ppm(encode_ppm(img));
  ASSERT_EQ(back.shape(), img.shape());
  for (std::int64_t i = 0; i < img.numel(); ++i) EXPECT_EQ(back[i], img[i]);
}

TEST(Pnm, PgmRoundTripKeepsIgnore) {
  const LabelMap l{2, 3, {0, 1, kIgnoreLabel, 4, 5, 6}};
  EXPECT_EQ(decode_pgm(encode_pgm(l)).data, l.data);
}

TEST(Pnm, Rejections) {
  EXPECT_THROW(decode_pnm(bytes("P7\n1 1\n255\n\x01")), ParseError);
  EXPECT_THROW(decode_pnm(bytes("P5\n0 1\n255\n")), ParseError);
  EXPECT_THROW(decode_pnm(bytes("P5\n2 2\n255\n\x01\x02")), ParseError);
  EXPECT_THROW(decode_pnm(bytes("P5\n1 1\n65535\n\x01\x02")), ParseError);
  EXPECT_THROW(decode_pnm(bytes("P5\n1 1\n10\n\x0b")), ParseError);
  EXPECT_THROW(decode_pnm(bytes("P5\n1 1\n255")), ParseError);
  EXPECT_THROW(decode_ppm(encode_pgm(LabelMap{1, 1, {0}})), ParseError);
  EXPECT_THROW(encode_ppm(Tensor({2, 2, 1})), ContractError);
}

TEST(Pnm, TruncationsFailCleanly) {
  const auto good = encode_ppm(quantized_image(3, 4, 2));
  for (std::size_t n = 0; n < good.size(); ++n) {
    EXPECT_THROW(decode_pnm(std::span(good).first(n)), ParseError) << "length " << n;
  }
}

TEST(Pnm, FileRoundTripAndMissingFile) {
  const auto dir = std::filesystem::temp_directory_path() / "gsa_io_test";
  std::filesystem::create_directories(dir);
  const LabelMap l{1, 2, {3, 4}};
  write_pgm(dir / "l.pgm", l);
  EXPECT_EQ(read_pgm(dir / "l.pgm").data, l.data);
  EXPECT_THROW(read_pgm(dir / "missing.pgm"), IoError);
  EXPECT_THROW(write_pgm(dir / "no" / "such" / "dir.pgm", l), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Colorize, DistinctColorsAndWhiteIgnore) {
  const Tensor c = colorize_labels(LabelMap{1, 3, {0, 1, kIgnoreLabel}});
  EXPECT_EQ(c.shape(), (Shape{1, 3, 3}));
  EXPECT_FALSE(c[0] == c[3] && c[1] == c[4] && c[2] == c[5]);
  for (int i = 6; i < 9; ++i) EXPECT_EQ(c[i], 1.0f);
}

TEST(Gst, EmptyArchive) {
  const auto b = gst_encode({});
  EXPECT_EQ(b, (std::vector<std::uint8_t>{'G', 'S', 'T', '1', 0, 0, 0, 0}));
  EXPECT_TRUE(gst_decode(b).empty());
}

TEST(Gst, ScalarLayout) {
  const auto b = gst_encode({{"a", Tensor::scalar(3.5f)}});
  const std::vector<std::uint8_t> want{'G', 'S', 'T', '1', 1, 0, 0, 0, 1, 0, 'a', 0, 0x00, 0x00, 0x60, 0x40};
  EXPECT_EQ(b, want);
  const GstArchive back = gst_decode(b);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].first, "a");
  EXPECT_EQ(back[0].second.rank(), 0);
  EXPECT_EQ(back[0].second.item(), 3.5f);
}

TEST(Gst, RandomRoundTripsPreserveOrderAndBits) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    GstArchive a;
    const int n = static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) {
      Shape s;
      const int rank = static_cast<int>(rng() % 5);
      for (int r = 0; r < rank; ++r) s.push_back(1 + static_cast<std::int64_t>(rng() % 4));
      a.emplace_back("t" + std::to_string(trial) + "/" + std::to_string(n - i),
                     random_uniform(s, rng()));
    }
    const GstArchive back = gst_decode(gst_encode(a));
    ASSERT_EQ(back.size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(back[i].first, a[i].first);
      EXPECT_EQ(back[i].second.shape(), a[i].second.shape());
      EXPECT_EQ(std::memcmp(back[i].second.data().data(), a[i].second.data().data(),
                            4 * static_cast<std::size_t>(a[i].second.numel())),
                0);
    }
  }
}

TEST(Gst, Utf8Names) {
  const GstArchive a{{"\xce\xb3/w\xc3\xa9ight", Tensor({2}, 1.0f)}};
  EXPECT_EQ(gst_decode(gst_encode(a))[0].first, a[0].first);
  EXPECT_THROW(gst_encode({{"\xff", Tensor::scalar(0)}}), ContractError);
}

TEST(Gst, Rejections) {
  auto b = gst_encode({{"w", Tensor({2, 2}, 1.0f)}});
  auto bad = b;
  bad[0] = 'X';
  EXPECT_THROW(gst_decode(bad), ParseError);
  bad = b;
  bad.push_back(0);
  EXPECT_THROW(gst_decode(bad), ParseError);
  // Dims 0xFFFFFFFF x 0xFFFFFFFF overflow any payload.
  bad = b;
  std::fill(bad.begin() + 12, bad.begin() + 20, 0xFF);
  EXPECT_THROW(gst_decode(bad), ParseError);
  bad = b;
  std::fill(bad.begin() + 12, bad.begin() + 16, 0x00);
  EXPECT_THROW(gst_decode(bad), ParseError);
}

TEST(Gst, TruncationsFailCleanly) {
  const auto b = gst_encode({{"alpha", Tensor({3, 2}, 0.5f)}, {"beta", Tensor::scalar(2)}});
  for (std::size_t n = 0; n < b.size(); ++n) {
    EXPECT_THROW(gst_decode(std::span(b).first(n)), ParseError) << "length " << n;
  }
}

TEST(Gst, RandomBytesNeverCrash) {
  std::mt19937 rng(9);
  const auto b = gst_encode({{"alpha", Tensor({3, 2}, 0.5f)}, {"beta", Tensor::scalar(2)}});
  for (int trial = 0; trial < 2000; ++trial) {
    auto m = b;
    const int flips = 1 + static_cast<int>(rng() % 3);
    for (int f = 0; f < flips; ++f) m[rng() % m.size()] = static_cast<std::uint8_t>(rng());
    try {
      gst_decode(m);
    } catch (const ParseError&) {
    }
  }
}

TEST(Gst, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "gsa_io_test.gst";
  const GstArchive a{{"x", Tensor({1, 2}, std::vector<float>{1, -2})}};
  gst_write(a, path);
  EXPECT_EQ(gst_read(path)[0].second[1], -2.0f);
  std::filesystem::remove(path);
  EXPECT_THROW(gst_read(path), IoError);
}

}  // namespace
}  // namespace gsa
