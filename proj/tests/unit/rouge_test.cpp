#include <random>

#include <gtest/gtest.h>

#include "modconf/error.hpp"
#include "modconf/rouge.hpp"
#include "test_support.hpp"

using namespace modconf;
using modconf::testing::brute_force_lcs;

TEST(Tokenize, Rules) {
  EXPECT_EQ(tokenize("The image does not contain a ball."),
            (Tokens{"the", "image", "does", "not", "contain", "a", "ball"}));
  EXPECT_EQ(tokenize(""), Tokens{});
  EXPECT_EQ(tokenize("Red,  GREEN."), (Tokens{"red", "green"}));
  EXPECT_EQ(tokenize("  ... -- ''  "), Tokens{});
  EXPECT_EQ(tokenize("don't (stop)"), (Tokens{"don't", "stop"}));
}

TEST(Lcs, Examples) {
  Tokens a{"a", "b", "c"}, x{"a", "x", "c"};
  EXPECT_EQ(lcs_length(a, x), 2u);
  EXPECT_EQ(brute_force_lcs(a, x), 2u);
  EXPECT_EQ(lcs_length(a, a), 3u);
  EXPECT_EQ(lcs_length(Tokens{}, a), 0u);
}

TEST(RougeL, Examples) {
  auto same = rouge_l_f("the cat sat", "The cat sat.");
  EXPECT_DOUBLE_EQ(same.f, 1.0);
  auto partial = rouge_l(Tokens{"a", "b", "c"}, Tokens{"a", "x", "c"});
  EXPECT_DOUBLE_EQ(partial.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(partial.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(partial.f, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(rouge_l_f("alpha beta", "gamma delta").f, 0.0);
  auto empty = rouge_l_f("", "anything");
  EXPECT_EQ(empty.precision, 0.0);
  EXPECT_EQ(empty.recall, 0.0);
  EXPECT_EQ(empty.f, 0.0);
}

TEST(RougeL, BetaWeighting) {
  // P = 1, R = 1/2. β=2: 5·(1/2)/(1/2 + 4) = 5/9.
  auto s = rouge_l(Tokens{"a"}, Tokens{"a", "b"}, 2.0);
  EXPECT_DOUBLE_EQ(s.f, 5.0 / 9.0);
  EXPECT_THROW(rouge_l(Tokens{"a"}, Tokens{"a"}, 0.0), Error);
  EXPECT_THROW(rouge_l(Tokens{"a"}, Tokens{"a"}, -1.0), Error);
}

namespace {

Tokens random_tokens(std::mt19937_64& rng, std::size_t max_len) {
  static const Tokens alphabet{"a", "b", "c"};
  Tokens t(std::uniform_int_distribution<std::size_t>(0, max_len)(rng));
  for (auto& tok : t) tok = alphabet[std::uniform_int_distribution<std::size_t>(0, 2)(rng)];
  return t;
}

}  // namespace

TEST(RougeProperties, LcsMatchesBruteForce) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 3000; ++i) {
    auto a = random_tokens(rng, 10), b = random_tokens(rng, 10);
    ASSERT_EQ(lcs_length(a, b), brute_force_lcs(a, b));
  }
}

TEST(RougeProperties, BoundsAndSymmetry) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 3000; ++i) {
    auto a = random_tokens(rng, 10), b = random_tokens(rng, 10);
    auto ab = rouge_l(a, b), ba = rouge_l(b, a);
    ASSERT_EQ(ab.f, ba.f);
    ASSERT_EQ(ab.precision, ba.recall);
    ASSERT_GE(ab.f, 0.0);
    ASSERT_LE(ab.f, 1.0);
    ASSERT_LE(ab.f, std::max(ab.precision, ab.recall) + 1e-15);
    if (ab.precision + ab.recall == 0.0) ASSERT_EQ(ab.f, 0.0);
    ASSERT_EQ(lcs_length(a, a), a.size());
  }
}
