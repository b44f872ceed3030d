#include <gtest/gtest.h>

#include "causalrag/generation.hpp"
#include "extraction_cases.hpp"
#include "generators.hpp"

namespace causalrag {
namespace {

std::vector<char> labels_of(std::string_view s) { return {s.begin(), s.end()}; }

TEST(ExtractMcq, HandBuiltSuite) {
  for (const auto& c : testing::extraction_cases()) {
    const auto labels = labels_of(c.labels);
    const auto got = extract_mcq_answer(c.completion, labels);
    if (c.expected) {
      EXPECT_EQ(got.value, std::string(*c.expected)) << c.name;
    } else {
      EXPECT_FALSE(got.parsed()) << c.name << " -> " << got.display();
    }
  }
}

TEST(ExtractMcq, ResultIsAlwaysAValidUppercaseLabel) {
  testing::Rng rng(41);
  const auto labels = labels_of("ABCD");
  const std::string alphabet = "ABCDEabcde()[]:.-* \n\tFinal answer";
  for (int trial = 0; trial < 5000; ++trial) {
    std::string s;
    const std::size_t n = testing::uniform(rng, 0, 40);
    for (std::size_t i = 0; i < n; ++i) {
      s += alphabet[testing::uniform(rng, 0, alphabet.size() - 1)];
    }
    if (trial % 3 == 0) {
      s = "Final Answer: " + s;
    }
    const auto got = extract_mcq_answer(s, labels);
    if (got.parsed()) {
      ASSERT_EQ(got.value->size(), 1u);
      EXPECT_NE(std::string("ABCD").find((*got.value)[0]), std::string::npos) << s;
    }
  }
}

TEST(ExtractMcq, NeverThrowsOnRandomBytes) {
  testing::Rng rng(43);
  const auto labels = labels_of("ABCDE");
  for (int trial = 0; trial < 5000; ++trial) {
    std::string s(testing::uniform(rng, 0, 64), '\0');
    for (auto& c : s) {
      c = static_cast<char>(testing::uniform(rng, 0, 255));
    }
    EXPECT_NO_THROW(extract_mcq_answer(s, labels));
    EXPECT_NO_THROW(extract_yesno_answer(s));
  }
}

TEST(ExtractYesNo, MarkerAndFallback) {
  EXPECT_EQ(extract_yesno_answer("Final Answer: Yes").value, "yes");
  EXPECT_EQ(extract_yesno_answer("final answer - NO.").value, "no");
  EXPECT_EQ(extract_yesno_answer("Final Answer: yes\nWait.\nFinal Answer: no").value, "no");
  EXPECT_EQ(extract_yesno_answer("The evidence says yes").value, "yes");
  EXPECT_EQ(extract_yesno_answer("Probably not, so no.\n").value, "no");
  EXPECT_FALSE(extract_yesno_answer("Final Answer: maybe").parsed());
  EXPECT_FALSE(extract_yesno_answer("nobody knows yesterday").parsed());
  EXPECT_FALSE(extract_yesno_answer("").parsed());
  EXPECT_EQ(extract_yesno_answer("").display(), "<unparseable>");
}

} // namespace
} // namespace causalrag
