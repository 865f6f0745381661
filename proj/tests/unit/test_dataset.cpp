#include <gtest/gtest.h>

#include <set>

#include "jointgen/dataset.hpp"
#include "jointgen/errors.hpp"
#include "jointgen/synthetic.hpp"
#include "test_support.hpp"

using namespace jointgen;
using jointgen::testing::fixture;

namespace {

RawExample raw(std::string context, std::string answer, std::size_t start,
               std::string article = "a") {
  RawExample r;
  r.id = "id-" + std::to_string(start);
  r.article_id = std::move(article);
  r.context = std::move(context);
  r.question = "what is it?";
  r.answer_text = std::move(answer);
  r.answer_start = start;
  r.answers = {r.answer_text};
  return r;
}

std::vector<RawExample> articles(std::size_t n, std::size_t per_article) {
  std::vector<RawExample> out;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t k = 0; k < per_article; ++k) {
      RawExample r = raw("alpha beta gamma", "beta", 6, "art-" + std::to_string(a));
      r.id = "q-" + std::to_string(a) + "-" + std::to_string(k);
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace

TEST(LocateSpan, AlignedAnswer) {
  const auto doc = tokenize("In 1870, Tesla moved to Karlovac, to attend school.");
  EXPECT_EQ(locate_answer_span(doc, "to attend school", 34), (TokenSpan{8, 11}));
}

TEST(LocateSpan, MidTokenStartAcceptedAfterTrimming) {
  const std::string text = "the pre-war era ended";
  const auto doc = tokenize(text);
  EXPECT_EQ(locate_answer_span(doc, "war era", text.find("war")), (TokenSpan{1, 3}));
}

TEST(LocateSpan, WrongOffsetFallsBackToNearestOccurrence) {
  const std::string text = "nixon met nixon and kennedy";
  const auto doc = tokenize(text);
  EXPECT_EQ(locate_answer_span(doc, "nixon", 12), (TokenSpan{2, 3}));
  EXPECT_EQ(locate_answer_span(doc, "kennedy", 0), (TokenSpan{4, 5}));
}

TEST(LocateSpan, AbsentAnswerIsNotFound) {
  const auto doc = tokenize("nixon met kennedy");
  EXPECT_FALSE(locate_answer_span(doc, "eisenhower", 3));
}

TEST(ProcessExample, Table2FixtureSpans) {
  const auto ex = load_squad(fixture("table2.json"));
  const auto nixon = process_example(ex[0]);
  ASSERT_TRUE(nixon);
  EXPECT_EQ(nixon->answer, (std::vector<std::string>{"richard", "nixon"}));
  const auto sekulic = process_example(ex[2]);
  ASSERT_TRUE(sekulic);
  EXPECT_EQ(sekulic->answer, (std::vector<std::string>{"martin", "sekulić"}));
  EXPECT_EQ(sekulic->gold_answers, ex[2].answers);
}

TEST(ProcessExample, RoundTripSpanTokensMatchAnswer) {
  for (const auto& r : load_squad(fixture("table2.json"))) {
    const auto p = process_example(r);
    ASSERT_TRUE(p);
    const std::vector<std::string> span(p->document.begin() + p->answer_span.begin,
                                        p->document.begin() + p->answer_span.end);
    EXPECT_EQ(join_tokens(span), join_tokens(tokenize_words(r.answer_text)));
  }
}

TEST(ProcessWithVocab, DropsUnlocatableAndCounts) {
  const Corpus corpus = preprocess(load_squad(fixture("table2.json")), {0, 1, 100});
  std::vector<RawExample> data = {raw("alpha nixon", "nixon", 6), raw("alpha", "zzz", 0)};
  std::size_t dropped = 0;
  const auto out = process_with_vocab(data, corpus.vocab, &dropped);
  EXPECT_EQ(out.size(), 1u);
  EXPECT_EQ(dropped, 1u);
  EXPECT_EQ(out[0].document_ids[0], special::unknown);  // "alpha" never seen
}

TEST(SplitValidation, TwentyFourArticlesLeaveOneForTraining) {
  const auto data = articles(24, 2);
  const ValidationSplit s = split_validation(data, 23, 1234);
  EXPECT_EQ(s.train.size(), 2u);
  EXPECT_EQ(s.validation.size(), 46u);
}

TEST(SplitValidation, SeededAndDisjoint) {
  const auto data = articles(10, 3);
  const ValidationSplit a = split_validation(data, 4, 77);
  const ValidationSplit b = split_validation(data, 4, 77);
  ASSERT_EQ(a.validation.size(), b.validation.size());
  for (std::size_t i = 0; i < a.validation.size(); ++i) {
    EXPECT_EQ(a.validation[i].id, b.validation[i].id);
  }
  std::set<std::string> train_articles;
  for (const auto& r : a.train) train_articles.insert(r.article_id);
  for (const auto& r : a.validation) EXPECT_FALSE(train_articles.count(r.article_id));
  EXPECT_EQ(a.train.size() + a.validation.size(), data.size());
}

TEST(SplitValidation, TooFewArticlesIsConfigError) {
  EXPECT_THROW(split_validation(articles(3, 1), 4, 1), ConfigError);
}

TEST(Preprocess, IdsStayInsideVocabularies) {
  SyntheticOptions o;
  o.examples = 40;
  PreprocessOptions p;
  p.validation_articles = 1;
  p.decoder_vocab_k = 10;
  const Corpus c = preprocess(generate_synthetic(o), p);
  EXPECT_EQ(c.stats.raw_examples, 40u);
  EXPECT_EQ(c.stats.kept + c.stats.dropped, 40u);
  EXPECT_EQ(c.train.size() + c.validation.size(), c.stats.kept);
  EXPECT_EQ(c.vocab.decoder.size(), 14u);
  for (const auto* side : {&c.train, &c.validation}) {
    for (const auto& ex : *side) {
      for (int id : ex.document_ids) EXPECT_LT(static_cast<std::size_t>(id), c.vocab.encoder.size());
      for (int id : ex.question_ids) EXPECT_LT(static_cast<std::size_t>(id), c.vocab.encoder.size());
      for (const auto& w : ex.document_chars) {
        for (int id : w) EXPECT_LT(static_cast<std::size_t>(id), c.vocab.chars.size());
      }
      EXPECT_EQ(ex.answer, std::vector<std::string>(ex.document.begin() + ex.answer_span.begin,
                                                    ex.document.begin() + ex.answer_span.end));
      EXPECT_GE(ex.question.size(), 1u);
    }
  }
}

TEST(CorpusCache, RoundTripIsExactAndDeterministic) {
  const Corpus c = preprocess(load_squad(fixture("table2.json")), {1, 5, 100});
  const std::string text = serialize_corpus(c);
  const Corpus back = parse_corpus(text);
  EXPECT_EQ(serialize_corpus(back), text);
  EXPECT_EQ(back.vocab, c.vocab);
  ASSERT_EQ(back.train.size(), c.train.size());
  for (std::size_t i = 0; i < c.train.size(); ++i) {
    EXPECT_EQ(back.train[i].document_ids, c.train[i].document_ids);
    EXPECT_EQ(back.train[i].answer_span, c.train[i].answer_span);
  }
  EXPECT_EQ(serialize_corpus(preprocess(load_squad(fixture("table2.json")), {1, 5, 100})), text);
}

TEST(CorpusCache, RejectsForeignOrNewerFiles) {
  EXPECT_THROW(parse_corpus("{"), ParseError);
  EXPECT_THROW(parse_corpus(R"({"format": "other"})"), FormatError);
  const Corpus c = preprocess(load_squad(fixture("tiny.json")), {0, 1, 100});
  std::string text = serialize_corpus(c);
  const auto pos = text.find("\"version\":1");
  ASSERT_NE(pos, std::string::npos) << text.substr(0, 200);
  text.replace(pos, 11, "\"version\":99");
  EXPECT_THROW(parse_corpus(text), FormatError);
}

TEST(CorpusCache, SaveAndLoad) {
  const Corpus c = preprocess(load_squad(fixture("tiny.json")), {0, 1, 100});
  const auto path = jointgen::testing::scratch_dir("cache") / "c.json";
  save_corpus(c, path);
  EXPECT_EQ(serialize_corpus(load_corpus(path)), serialize_corpus(c));
  EXPECT_THROW(load_corpus(path.parent_path() / "missing.json"), IoError);
}
