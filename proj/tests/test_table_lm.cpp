// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The gcf Authors

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "gcf/error.hpp"
#include "gcf/table_lm.hpp"
#include "test_support.hpp"

namespace gcf {
namespace {

namespace fs = std::filesystem;

class TableLmFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("gcf_table_" + std::to_string(::testing::UnitTest::GetInstance()
                                              ->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

TEST_F(TableLmFiles, MinimalFile) {
  const auto p = write("min.json", R"({"order":1,"vocab":["a","b","<eos>"],
      "eos":"<eos>","rows":{"":[0.5,-1,2]}})");
  auto lm = TableLm::load(p);
  EXPECT_EQ(lm->vocabulary().size(), 3u);
  EXPECT_EQ(lm->vocabulary().eos_id(), 2);
  EXPECT_EQ(lm->next_logits(TokenSeq{0, 1}), (LogitVector{0.5, -1.0, 2.0}));
}

TEST_F(TableLmFiles, OrderTwoLooksUpLastToken) {
  const auto p = write("o2.json", "{\"order\":2,\"vocab\":[\"a\",\"b\",\"<eos>\"],"
      "\"eos\":\"<eos>\",\"rows\":{\"\":[0,0,0],\"a\":[1,2,3],"
      "\"b\":[-1,-2,-3]}}");
  auto lm = TableLm::load(p);
  EXPECT_EQ(lm->next_logits(TokenSeq{0}), (LogitVector{1, 2, 3}));
  EXPECT_EQ(lm->next_logits(TokenSeq{0, 1}), (LogitVector{-1, -2, -3}));
  EXPECT_EQ(lm->next_logits(TokenSeq{}), (LogitVector{0, 0, 0}));
}

TEST_F(TableLmFiles, OrderThreeKeysJoinedBySeparator) {
  const auto p = write("o3.json",
      "{\"order\":3,\"vocab\":[\"a\",\"b\",\"<eos>\"],\"eos\":\"<eos>\","
      "\"fallback\":true,\"rows\":{\"a\\u0001b\":[4,5,6]}}");
  auto lm = TableLm::load(p);
  EXPECT_EQ(lm->next_logits(TokenSeq{1, 0, 1}), (LogitVector{4, 5, 6}));
  EXPECT_EQ(lm->next_logits(TokenSeq{1, 1}), (LogitVector{0, 0, 0}));
}

TEST_F(TableLmFiles, MissingContextWithoutFallbackErrorsOnQuery) {
  const auto p = write("gap.json", "{\"order\":2,\"vocab\":[\"a\",\"b\",\"<eos>\"],"
      "\"eos\":\"<eos>\",\"rows\":{\"\":[0,0,0],\"a\":[1,2,3]}}");
  auto lm = TableLm::load(p);
  EXPECT_NO_THROW(lm->next_logits(TokenSeq{0}));
  EXPECT_THROW(lm->next_logits(TokenSeq{1}), DataError);
}

TEST_F(TableLmFiles, RejectsWrongRowWidth) {
  const auto p = write("w.json", R"({"order":1,"vocab":["a","<eos>"],
      "eos":"<eos>","rows":{"":[0,0,0]}})");
  EXPECT_THROW(TableLm::load(p), DataError);
}

TEST_F(TableLmFiles, RejectsDuplicateContextKeys) {
  const auto p = write("dup.json", R"({"order":2,"vocab":["a","<eos>"],
      "eos":"<eos>","rows":{"a":[0,0],"":[1,1],"a":[2,2]}})");
  EXPECT_THROW(TableLm::load(p), DataError);
}

TEST_F(TableLmFiles, RejectsMalformedJson) {
  EXPECT_THROW(TableLm::load(write("bad.json", "{\"order\":")), DataError);
  EXPECT_THROW(TableLm::load(write("noeos.json",
                   R"({"order":1,"vocab":["a"],"eos":"<eos>","rows":{}})")),
               DataError);
  EXPECT_THROW(TableLm::load(write("long.json",
                   R"({"order":1,"vocab":["a","<eos>"],"eos":"<eos>",
                      "rows":{"a":[0,0]}})")),
               DataError);
  EXPECT_THROW(TableLm::load(dir_ / "absent.json"), DataError);
}

TEST_F(TableLmFiles, SaveLoadRoundTripIsExact) {
  RandomStream rng(1);
  auto lm = testing::random_table(4, 3, rng, 3.0);
  const auto p = dir_ / "rt.json";
  lm->save(p);
  auto back = TableLm::load(p);
  EXPECT_EQ(back->order(), lm->order());
  EXPECT_EQ(back->vocabulary(), lm->vocabulary());
  for (const auto& ctx : lm->all_contexts()) {
    EXPECT_EQ(back->next_logits(ctx), lm->next_logits(ctx));
  }
}

TEST(TableLm, AllContextsEnumeratesShortContexts) {
  RandomStream rng(2);
  auto lm = testing::random_table(3, 3, rng);
  EXPECT_EQ(lm->all_contexts().size(), 1u + 3u + 9u);
}

TEST(TableLm, FitCountsWithSmoothing) {
  Vocabulary vocab({"a", "b", "<eos>"}, "<eos>");
  // Sequences: a b <eos>, a a (EOS appended).
  auto lm = fit_table_lm(vocab, 2, {{0, 1, 2}, {0, 0}}, 1.0);
  // Empty context: a twice -> (2+1)/(2+3).
  const auto root = lm->next_logits(TokenSeq{});
  EXPECT_NEAR(root[0], std::log(3.0 / 5.0), 1e-12);
  EXPECT_NEAR(root[1], std::log(1.0 / 5.0), 1e-12);
  // Context a: followed by b, a, <eos> once each -> 2/6 each.
  const auto after_a = lm->next_logits(TokenSeq{0});
  for (double v : after_a.scores) EXPECT_NEAR(v, std::log(2.0 / 6.0), 1e-12);
  // Context <eos> never occurs as history: uniform fallback.
  EXPECT_EQ(lm->next_logits(TokenSeq{2}), (LogitVector{0, 0, 0}));
}

}  // namespace
}  // namespace gcf
