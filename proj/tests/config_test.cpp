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

#include <gtest/gtest.h>

#include "gsa/config.hpp"
#include "gsa/errors.hpp"

namespace gsa {
namespace {

TEST(Config, EmptyGivesDefaults) {
  const RunConfig c = parse_config("");
  EXPECT_EQ(c.model.head, HeadKind::gsa_aspp);
  EXPECT_EQ(c.model.dilations, ModelConfig{}.dilations);
  EXPECT_EQ(c.train.base_lr, TrainConfig{}.base_lr);
  EXPECT_EQ(format_config(c), format_config(RunConfig{}));
}

TEST(Config, ParsesSectionsListsAndComments) {
  const RunConfig c = parse_config(
      "# run\n[model]\nhead = sa_aspp  # attention\ndilations = 1, 2,4\n"
      "decoder=sa_dec\n\n[train]\ncrop = 32,48\nscale_range = 0.75,1.25\nbase_lr = 5e-2\n");
  EXPECT_EQ(c.model.head, HeadKind::sa_aspp);
  EXPECT_EQ(c.model.decoder, DecoderKind::sa_dec);
  EXPECT_EQ(c.model.dilations, (std::vector<int>{1, 2, 4}));
  EXPECT_EQ(c.train.crop_h, 32);
  EXPECT_EQ(c.train.crop_w, 48);
  EXPECT_EQ(c.train.scale_lo, 0.75);
  EXPECT_EQ(c.train.base_lr, 0.05);
}

std::size_t error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ParseError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "no ParseError for: " << text;
  return 0;
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("[model]\nhead = aspp\nhead = sa_aspp\n"), 3u);
  EXPECT_EQ(error_line("[model]\n\ncolour = red\n"), 3u);
  EXPECT_EQ(error_line("[train]\nmax_iter = 1.5\n"), 2u);
  EXPECT_EQ(error_line("[train]\nbase_lr = fast\n"), 2u);
  EXPECT_EQ(error_line("head = aspp\n"), 1u);
  EXPECT_EQ(error_line("[optimizer]\n"), 1u);
  EXPECT_EQ(error_line("[model\n"), 1u);
  EXPECT_EQ(error_line("[model]\nhead\n"), 2u);
  EXPECT_EQ(error_line("[model]\nhead = transformer\n"), 2u);
  EXPECT_EQ(error_line("[train]\ncrop = 1,2,3\n"), 2u);
}

TEST(Config, SameKeyInDifferentSectionsIsFine) {
  const RunConfig c = parse_config("[model]\nseed = 3\n[train]\nseed = 4\n");
  EXPECT_EQ(c.model.seed, 3u);
  EXPECT_EQ(c.train.seed, 4u);
}

TEST(Config, SemanticValidation) {
  EXPECT_THROW(parse_config("[model]\nnum_classes = 1\n"), ContractError);
  EXPECT_THROW(parse_config("[train]\nflip_prob = 2\n"), ContractError);
  EXPECT_THROW(parse_config("[model]\ndilations =\n"), Error);
}

TEST(Config, Overrides) {
  RunConfig c;
  apply_override(c, "model.head=aspp");
  apply_override(c, "train.max_iter = 7");
  EXPECT_EQ(c.model.head, HeadKind::aspp);
  EXPECT_EQ(c.train.max_iter, 7);
  EXPECT_THROW(apply_override(c, "max_iter=7"), ParseError);
  EXPECT_THROW(apply_override(c, "train.max_iter"), ParseError);
  EXPECT_THROW(apply_override(c, "train.nope=1"), ParseError);
  EXPECT_THROW(apply_override(c, "train.batch_size=0"), ContractError);
}

TEST(Config, FormatRoundTrip) {
  RunConfig c;
  c.model.head = HeadKind::sa_aspp_condense_only;
  c.model.dilations = {2, 5};
  c.train.base_lr = 0.1;
  c.train.scale_lo = 1.0 / 3.0;
  c.train.weight_decay = 1e-4;
  c.train.warmup_iters = 25;
  const std::string text = format_config(c);
  EXPECT_EQ(format_config(parse_config(text)), text);
  EXPECT_EQ(parse_config(text).train.scale_lo, 1.0 / 3.0);
  EXPECT_EQ(parse_config(text).train.warmup_iters, 25);
}

}  // namespace
}  // namespace gsa
