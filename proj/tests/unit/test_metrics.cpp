#include <gtest/gtest.h>

#include <cmath>

#include "jointgen/errors.hpp"
#include "jointgen/metrics.hpp"

using namespace jointgen;

using Words = std::vector<std::string>;
using Golds = std::vector<std::string>;

TEST(NormalizeAnswer, LowercaseAndStripPunctuation) {
  EXPECT_EQ(normalize_answer("Richard Nixon."), (Words{"richard", "nixon"}));
}

TEST(NormalizeAnswer, ArticlesRemoved) {
  EXPECT_TRUE(normalize_answer("the the the").empty());
  EXPECT_EQ(normalize_answer("a  b"), Words{"b"});
  EXPECT_EQ(normalize_answer("An apple, THE pear"), (Words{"apple", "pear"}));
}

TEST(NormalizeAnswer, PunctuationInsideWordsIsDeleted) {
  EXPECT_EQ(normalize_answer("john f. kennedy's"), (Words{"john", "f", "kennedys"}));
}

TEST(ExactMatch, NormalizationCollapsesBoth) {
  EXPECT_EQ(exact_match("richard nixon", Golds{"Richard Nixon ."}), 1);
}

TEST(ExactMatch, WrongAnswer) {
  EXPECT_EQ(exact_match("john f. kennedy", Golds{"richard nixon"}), 0);
}

TEST(ExactMatch, EmptyEqualsEmpty) { EXPECT_EQ(exact_match("", Golds{""}), 1); }

TEST(ExactMatch, AnyGoldSuffices) {
  EXPECT_EQ(exact_match("Nixon", Golds{"Richard Nixon", "Nixon", "Richard Nixon"}), 1);
}

TEST(TokenF1, IdenticalIsOne) {
  EXPECT_DOUBLE_EQ(token_f1("to attend school", Golds{"to attend school"}), 1.0);
}

TEST(TokenF1, Table2HandComputation) {
  EXPECT_NEAR(token_f1("to attend school at the higher real gymnasium", Golds{"to attend school"}),
              0.6, 1e-12);
}

TEST(TokenF1, DisjointIsZero) {
  EXPECT_EQ(token_f1("john kennedy", Golds{"richard nixon"}), 0.0);
}

TEST(TokenF1, EmptyCases) {
  EXPECT_EQ(token_f1("", Golds{""}), 1.0);
  EXPECT_EQ(token_f1("the", Golds{"nixon"}), 0.0);
  EXPECT_EQ(token_f1("nixon", Golds{"a"}), 0.0);
}

TEST(TokenF1, MultisetOverlapAndMaxOverGolds) {
  // pred [x, x, y] vs gold [x, y, y]: overlap 2, P = R = 2/3.
  EXPECT_NEAR(token_f1("x x y", Golds{"x y y"}), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(token_f1("richard nixon", Golds{"nixon", "richard nixon"}), 1.0, 1e-12);
}

TEST(TokenF1, SymmetricForSingleGold) {
  const char* pairs[][2] = {{"a b c d", "b c e"}, {"x y z", "z"}, {"p q", "q p q"}};
  for (const auto& p : pairs) {
    EXPECT_DOUBLE_EQ(token_f1(p[0], Golds{p[1]}), token_f1(p[1], Golds{p[0]}));
  }
}

TEST(TokenF1, ExactMatchImpliesFullF1) {
  const char* preds[] = {"Richard Nixon", "the nixon", "", "a.b"};
  for (const char* p : preds) {
    const Golds g = {std::string(p) + " ."};
    if (exact_match(p, g) == 1) EXPECT_EQ(token_f1(p, g), 1.0) << p;
  }
}

TEST(Bleu, PerfectCorpusIsOne) {
  const Words c = {"who was the president ?", "where did tesla study in 1870 ?"};
  EXPECT_DOUBLE_EQ(corpus_bleu4(c, c), 1.0);
}

TEST(Bleu, NoSharedFourGramIsZero) {
  const Words c = {"the cat sat on"}, r = {"the cat sat in"};
  EXPECT_EQ(corpus_bleu4(c, r), 0.0);
}

TEST(Bleu, HandCountedExample) {
  // Bigrams on-the and the-mat, trigrams sat-on-the and on-the-mat, and
  // 4-grams past the first all miss.
  const Words c = {"the cat sat on the mat"}, r = {"the cat sat on a mat"};
  const BleuStats s = bleu_stats(split_whitespace(c[0]), split_whitespace(r[0]));
  EXPECT_EQ(s.matches[0], 5u);
  EXPECT_EQ(s.totals[0], 6u);
  EXPECT_EQ(s.matches[1], 3u);
  EXPECT_EQ(s.totals[1], 5u);
  EXPECT_EQ(s.matches[2], 2u);
  EXPECT_EQ(s.totals[2], 4u);
  EXPECT_EQ(s.matches[3], 1u);
  EXPECT_EQ(s.totals[3], 3u);
  EXPECT_NEAR(corpus_bleu4(c, r), std::pow(5.0 / 6 * 3.0 / 5 * 2.0 / 4 * 1.0 / 3, 0.25), 1e-12);
  EXPECT_NEAR(corpus_bleu4(c, r), 0.5373, 1e-4);
}

TEST(Bleu, GeometricMeanOfPrecisions) {
  // p = 5/6, 4/5, 3/4, 2/3 with equal lengths.
  const Words c = {"the cat sat on the mat"}, r = {"the cat sat on the rug"};
  EXPECT_NEAR(corpus_bleu4(c, r), std::pow(1.0 / 3.0, 0.25), 1e-12);
  EXPECT_NEAR(corpus_bleu4(c, r), 0.7598, 1e-4);
}

TEST(Bleu, ShortCandidateContributesNoFourGrams) {
  const BleuStats s = bleu_stats(Words{"who", "was"}, Words{"who", "was", "he"});
  EXPECT_EQ(s.totals[3], 0u);
  EXPECT_EQ(s.totals[2], 0u);
  EXPECT_EQ(corpus_bleu4(Words{"who was"}, Words{"who was he"}), 0.0);
}

TEST(Bleu, BrevityPenalty) {
  const Words c = {"a b c d"}, r = {"a b c d e f g h"};
  EXPECT_NEAR(corpus_bleu4(c, r), std::exp(1.0 - 8.0 / 4.0), 1e-12);
}

TEST(Bleu, ClippedCounts) {
  const BleuStats s = bleu_stats(Words{"the", "the", "the"}, Words{"the", "cat"});
  EXPECT_EQ(s.matches[0], 1u);
  EXPECT_EQ(s.totals[0], 3u);
}

TEST(Bleu, CorpusStatsAreSums) {
  const Words c = {"the cat sat on the mat", "who was the 37th president"};
  const Words r = {"the cat sat on a mat", "who was the president"};
  BleuStats total = bleu_stats(split_whitespace(c[0]), split_whitespace(r[0]));
  total += bleu_stats(split_whitespace(c[1]), split_whitespace(r[1]));
  EXPECT_DOUBLE_EQ(bleu_from_stats(total), corpus_bleu4(c, r));
  EXPECT_EQ(total.candidate_length, 11u);
  EXPECT_EQ(total.reference_length, 10u);
}

TEST(Bleu, AddingPerfectPairKeepsCountsConsistent) {
  const Words c = {"the cat sat on the mat"}, r = {"the cat sat on a mat"};
  const BleuStats before = bleu_stats(split_whitespace(c[0]), split_whitespace(r[0]));
  BleuStats after = before;
  const Words extra = split_whitespace("where did tesla move in 1870 ?");
  after += bleu_stats(extra, extra);
  for (int n = 0; n < 4; ++n) {
    EXPECT_EQ(after.matches[n] - before.matches[n], after.totals[n] - before.totals[n]);
  }
  EXPECT_GE(corpus_bleu4(Words{c[0], "where did tesla move in 1870 ?"}, Words{r[0], "where did tesla move in 1870 ?"}) + 1e-15,
            corpus_bleu4(c, r));
}

TEST(Bleu, Errors) {
  EXPECT_THROW(corpus_bleu4(Words{"a"}, Words{}), ContractError);
  EXPECT_THROW(corpus_bleu4(Words{}, Words{}), ContractError);
}

TEST(SplitWhitespace, CollapsesRuns) {
  EXPECT_EQ(split_whitespace("  a \t b\nc "), (Words{"a", "b", "c"}));
}
