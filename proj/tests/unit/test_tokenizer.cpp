#include <gtest/gtest.h>

#include "jointgen/tokenizer.hpp"

using namespace jointgen;

using Words = std::vector<std::string>;

TEST(Tokenize, LowercasesAndSplitsPunctuation) {
  EXPECT_EQ(tokenize_words("Richard Nixon."), (Words{"richard", "nixon", "."}));
}

TEST(Tokenize, PossessiveCliticIsOneToken) {
  EXPECT_EQ(tokenize_words("eisenhower 's own vice president"),
            (Words{"eisenhower", "'s", "own", "vice", "president"}));
  EXPECT_EQ(tokenize_words("Eisenhower's own"), (Words{"eisenhower", "'s", "own"}));
}

TEST(Tokenize, NumberThenComma) {
  EXPECT_EQ(tokenize_words("1870 ,"), (Words{"1870", ","}));
  EXPECT_EQ(tokenize_words("In 1870, Tesla"), (Words{"in", "1870", ",", "tesla"}));
}

TEST(Tokenize, KeepsDecimalsAndInternalPunctuation) {
  EXPECT_EQ(tokenize_words("3.14 and 1,000 well-known o'neill"),
            (Words{"3.14", "and", "1,000", "well-known", "o'neill"}));
}

TEST(Tokenize, SplitsContractions) {
  EXPECT_EQ(tokenize_words("didn't they're I'll"),
            (Words{"did", "n't", "they", "'re", "i", "'ll"}));
}

TEST(Tokenize, OffsetsPointIntoSource) {
  const std::string text = "In 1870, Tesla moved to Karlovac.";
  for (const Token& t : tokenize(text)) {
    std::string src = text.substr(t.begin, t.end - t.begin);
    for (auto& c : src) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    EXPECT_EQ(src, t.text);
  }
}

TEST(Tokenize, NonAsciiBytesAreWordCharacters) {
  EXPECT_EQ(tokenize_words("Martin Sekulić."), (Words{"martin", "sekulić", "."}));
}

TEST(Tokenize, EmptyAndWhitespace) {
  EXPECT_TRUE(tokenize(" \t\n ").empty());
  EXPECT_TRUE(tokenize("").empty());
}

TEST(Tokenize, IdempotentOnJoinedOutput) {
  const char* samples[] = {
      "In the 1960 election to choose his successor, Eisenhower endorsed his own vice "
      "president, Republican Richard Nixon against Democrat John F. Kennedy.",
      "Why didn't Tesla's teacher (Mr. Sekulić) go? It cost $3.50 -- or 1,000 dinars!",
      "\"Quoted\" text: a/b; c's d'' 'e' rock'n'roll ... end",
  };
  for (const char* s : samples) {
    const Words once = tokenize_words(s);
    EXPECT_EQ(tokenize_words(join_tokens(once)), once) << s;
  }
}

TEST(JoinTokens, SingleSpaces) {
  EXPECT_EQ(join_tokens({"a", "b", "c"}), "a b c");
  EXPECT_EQ(join_tokens({}), "");
}
