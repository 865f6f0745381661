#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "jointgen/encoder.hpp"
#include "jointgen/errors.hpp"
#include "test_support.hpp"

using namespace jointgen;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.word_emb_dim = 5;
  c.char_emb_dim = 3;
  c.char_hidden_dim = 2;
  c.rnn_hidden_dim = 4;
  c.mlp_hidden_dim = 4;
  c.mode_emb_dim = 2;
  c.encoder_vocab_size = 30;
  c.char_vocab_size = 12;
  c.decoder_vocab_size = 8;
  return c;
}

struct EncoderRig {
  ModelConfig config = tiny_config();
  ParameterStore store;
  EncoderWeights weights = EncoderWeights::create(store, config);

  explicit EncoderRig(bool random = true) {
    if (random) {
      Rng rng(21);
      for (auto& p : store) {
        for (std::size_t i = 0; i < p->value.size(); ++i) p->value[i] = rng.uniform(-0.5, 0.5);
      }
    }
  }
};

std::vector<std::vector<int>> spell(const std::vector<int>& words) {
  std::vector<std::vector<int>> out;
  for (int w : words) out.push_back({3 + w % 9, 3 + (w * 7) % 9});
  return out;
}

bool all_zero(const Tensor& t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] != 0.0) return false;
  }
  return true;
}

}  // namespace

TEST(EmbedWord, DimensionIsWordPlusCharRepresentation) {
  EncoderRig s;
  Tape t;
  const std::vector<int> chars = {4, 5, 6};
  const Var e = embed_word(t, s.weights, 7, chars);
  EXPECT_EQ(e.size(), s.config.token_dim());
  ModelConfig defaults;
  EXPECT_EQ(defaults.token_dim(), 332u);
  EXPECT_EQ(defaults.char_repr_dim(), 32u);
}

TEST(EmbedWord, SingleCharacterWordIsFinite) {
  EncoderRig s;
  Tape t;
  const std::vector<int> chars = {4};
  EXPECT_TRUE(embed_word(t, s.weights, 5, chars).value().all_finite());
}

TEST(EmbedWord, SameWordTwiceIsIdentical) {
  EncoderRig s;
  Tape t;
  const std::vector<int> chars = {4, 8};
  EXPECT_EQ(embed_word(t, s.weights, 9, chars).value(),
            embed_word(t, s.weights, 9, chars).value());
}

TEST(EmbedWord, OutOfRangeIdsAreVocabularyErrors) {
  EncoderRig s;
  Tape t;
  const std::vector<int> chars = {4};
  const std::vector<int> bad_chars = {99};
  EXPECT_THROW(embed_word(t, s.weights, 30, chars), VocabularyError);
  EXPECT_THROW(embed_word(t, s.weights, -1, chars), VocabularyError);
  EXPECT_THROW(embed_word(t, s.weights, 5, bad_chars), VocabularyError);
}

TEST(EncodeSequence, EmptyIsContractError) {
  EncoderRig s;
  Tape t;
  EXPECT_THROW(encode_sequence(t, s.weights.context_lstm, {}), ContractError);
}

TEST(EncodeSequence, LengthOneJoinsOneStepEachWay) {
  EncoderRig s;
  Tape t;
  const std::vector<Var> in = {t.constant(Tensor::vector({0.1, 0.2, -0.3, 0.4, 0.5, 0.1, 0.2,
                                                          -0.1, 0.3}))};
  const SequenceEncoding enc = encode_sequence(t, s.weights.context_lstm, in);
  ASSERT_EQ(enc.annotations.size(), 1u);
  const LstmState f = lstm_step(in[0], zero_lstm_state(t, 4), s.weights.context_lstm.forward);
  const LstmState b = lstm_step(in[0], zero_lstm_state(t, 4), s.weights.context_lstm.backward);
  EXPECT_EQ(enc.annotations[0].value(), ad::concat({f.h, b.h}).value());
  EXPECT_EQ(enc.final_state.value(), enc.annotations[0].value());
}

TEST(EncodeSequence, ZeroWeightsGiveZeroAnnotations) {
  EncoderRig s(false);
  Tape t;
  Rng rng(2);
  std::vector<Var> in;
  for (int i = 0; i < 4; ++i) {
    Tensor x({9});
    for (std::size_t k = 0; k < 9; ++k) x[k] = rng.uniform(-1, 1);
    in.push_back(t.constant(x));
  }
  const SequenceEncoding enc = encode_sequence(t, s.weights.context_lstm, in);
  for (const Var& a : enc.annotations) EXPECT_TRUE(all_zero(a.value()));
}

TEST(EncodeSequence, ReversingInputSwapsDirections) {
  ParameterStore store;
  BiLstmWeights w = BiLstmWeights::create(store, "bi", 3, 2);
  Rng rng(5);
  for (auto& p : store) {
    for (std::size_t i = 0; i < p->value.size(); ++i) p->value[i] = rng.uniform(-0.5, 0.5);
  }
  // Tie the two directions so reversal maps one onto the other.
  w.backward.weight->value = w.forward.weight->value;
  w.backward.bias->value = w.forward.bias->value;
  Tape t;
  std::vector<Var> in, rev;
  for (int i = 0; i < 3; ++i) {
    in.push_back(t.constant(Tensor::vector({rng.uniform(-1, 1), rng.uniform(-1, 1),
                                            rng.uniform(-1, 1)})));
  }
  rev.assign(in.rbegin(), in.rend());
  const auto a = encode_sequence(t, w, in);
  const auto b = encode_sequence(t, w, rev);
  for (std::size_t i = 0; i < 3; ++i) {
    const Tensor& x = a.annotations[i].value();
    const Tensor& y = b.annotations[2 - i].value();
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_DOUBLE_EQ(x[k], y[2 + k]);
      EXPECT_DOUBLE_EQ(x[2 + k], y[k]);
    }
  }
}

TEST(EncodeSequence, PaddedPositionsAreZeroAndFinalIsAtLastRealToken) {
  EncoderRig s;
  Tape t;
  std::vector<Var> in;
  for (int i = 0; i < 4; ++i) {
    Tensor x({9});
    x[i] = 1.0;
    in.push_back(t.constant(x));
  }
  const std::vector<unsigned char> mask = {1, 1, 0, 0};
  const auto padded = encode_sequence(t, s.weights.context_lstm, in, mask);
  const auto real = encode_sequence(t, s.weights.context_lstm,
                                    std::span<const Var>(in).first(2));
  ASSERT_EQ(padded.annotations.size(), 4u);
  EXPECT_TRUE(all_zero(padded.annotations[2].value()));
  EXPECT_TRUE(all_zero(padded.annotations[3].value()));
  EXPECT_EQ(padded.annotations[1].value(), real.annotations[1].value());
  EXPECT_EQ(padded.final_state.value(), real.final_state.value());
}

TEST(ConditionOccurrences, SpanSelectsPositionsInOrder) {
  std::vector<int> doc(20, 5);
  const std::vector<int> cond = {9};
  EXPECT_EQ(condition_occurrences(doc, cond, TokenSpan{7, 9}),
            (std::vector<std::size_t>{7, 8}));
}

TEST(ConditionOccurrences, FirstOccurrenceInConditionOrder) {
  // "president" = 11 at 3 (and 12), "nixon" = 10 at 10.
  std::vector<int> doc(15, 4);
  doc[3] = 11;
  doc[12] = 11;
  doc[10] = 10;
  const std::vector<int> cond = {10, 11};
  EXPECT_EQ(condition_occurrences(doc, cond, std::nullopt),
            (std::vector<std::size_t>{10, 3}));
}

TEST(ConditionOccurrences, AbsentAndSpecialTokensAreSkipped) {
  const std::vector<int> doc = {1, 5, 6, 3};
  const std::vector<int> cond = {1, 7, 6, 3};
  EXPECT_EQ(condition_occurrences(doc, cond, std::nullopt), (std::vector<std::size_t>{2}));
}

TEST(ConditionOccurrences, SpanOutsideDocumentIsRejected) {
  const std::vector<int> doc = {5, 6};
  EXPECT_THROW(condition_occurrences(doc, {}, TokenSpan{1, 3}), ContractError);
}

TEST(ExtractOccurrences, ReturnsAnnotationsAtSpan) {
  Tape t;
  std::vector<Var> ann;
  std::vector<int> doc;
  for (int i = 0; i < 20; ++i) {
    ann.push_back(t.constant(Tensor::vector({static_cast<double>(i)})));
    doc.push_back(4 + i);
  }
  const auto out = extract_condition_occurrences(ann, doc, {}, TokenSpan{7, 9});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].value()[0], 7.0);
  EXPECT_EQ(out[1].value()[0], 8.0);
}

TEST(Aggregate, EmptyExtractionGivesZeroFinal) {
  EncoderRig s;
  Tape t;
  const auto agg = aggregate_extractive_condition(t, s.weights, {});
  EXPECT_TRUE(agg.annotations.empty());
  EXPECT_EQ(agg.final_state.size(), 8u);
  EXPECT_TRUE(all_zero(agg.final_state.value()));
}

TEST(Aggregate, LengthOneUsesOneStep) {
  EncoderRig s;
  Tape t;
  const std::vector<Var> in = {t.constant(Tensor::vector({0.3, -0.2, 0.1, 0.4, 0.2, 0, 0.1,
                                                          -0.3}))};
  const auto agg = aggregate_extractive_condition(t, s.weights, in);
  const auto& w = s.weights.aggregation_lstm;
  const LstmState f = lstm_step(in[0], zero_lstm_state(t, 4), w.forward);
  const LstmState b = lstm_step(in[0], zero_lstm_state(t, 4), w.backward);
  EXPECT_EQ(agg.final_state.value(), ad::concat({f.h, b.h}).value());
}

TEST(Aggregate, ZeroWeightsGiveZeroFinal) {
  EncoderRig s(false);
  Tape t;
  const std::vector<Var> in = {t.constant(Tensor(Shape{8}, 0.7)), t.constant(Tensor(Shape{8}, -0.2))};
  EXPECT_TRUE(all_zero(aggregate_extractive_condition(t, s.weights, in).final_state.value()));
}

namespace {

struct Example {
  std::vector<int> doc = {4, 5, 6, 7, 8, 9, 10, 3};
  std::vector<int> cond = {6, 7, 20};
  std::vector<std::vector<int>> doc_chars = spell(doc);
  std::vector<std::vector<int>> cond_chars = spell(cond);

  EncoderInput input(Mode mode) const {
    EncoderInput in;
    in.document = {doc, doc_chars, {}};
    in.condition = {cond, cond_chars, {}};
    in.mode = mode;
    return in;
  }
};

}  // namespace

TEST(Encode, AnswerModeUsesConditionFinal) {
  EncoderRig s;
  Example ex;
  Tape t;
  const EncoderOutput out = encode(t, s.weights, ex.input(Mode::answer_generation));
  EXPECT_EQ(out.condition_summary.value(), out.cond_final.value());
  EXPECT_EQ(out.condition_feature.size(), s.config.condition_dim());
  EXPECT_EQ(out.doc_annotations.size(), ex.doc.size());
  EXPECT_EQ(out.doc_annotations[0].size(), s.config.annotation_dim());
}

TEST(Encode, QuestionModeUsesExtractiveFinal) {
  EncoderRig s;
  Example ex;
  Tape t;
  const EncoderOutput out = encode(t, s.weights, ex.input(Mode::question_generation));
  EXPECT_EQ(out.condition_summary.value(), out.extractive_final.value());
  EXPECT_LE(out.extractive_annotations.size(), out.cond_annotations.size());
  EXPECT_EQ(out.extractive_annotations.size(), 2u);
}

TEST(Encode, ModeChangesSummaryButNotDocument) {
  EncoderRig s;
  Example ex;
  Tape t;
  const EncoderOutput a = encode(t, s.weights, ex.input(Mode::answer_generation));
  const EncoderOutput q = encode(t, s.weights, ex.input(Mode::question_generation));
  EXPECT_EQ(a.doc_matrix.value(), q.doc_matrix.value());
  EXPECT_NE(a.condition_summary.value(), q.condition_summary.value());
  EXPECT_NE(a.condition_feature.value(), q.condition_feature.value());
}

TEST(Encode, DocumentIndependentOfCondition) {
  EncoderRig s;
  Example ex;
  Example other;
  other.cond = {12, 13};
  other.cond_chars = spell(other.cond);
  Tape t;
  EXPECT_EQ(encode(t, s.weights, ex.input(Mode::answer_generation)).doc_matrix.value(),
            encode(t, s.weights, other.input(Mode::answer_generation)).doc_matrix.value());
}

TEST(Encode, EmptySequencesAreContractErrors) {
  EncoderRig s;
  Example ex;
  Tape t;
  EncoderInput in = ex.input(Mode::answer_generation);
  in.condition = {};
  EXPECT_THROW(encode(t, s.weights, in), ContractError);
  in = ex.input(Mode::answer_generation);
  in.document = {};
  EXPECT_THROW(encode(t, s.weights, in), ContractError);
}

TEST(Encode, SummaryGradientReachesEmbeddingTables) {
  EncoderRig s;
  Example ex;
  Tape t;
  const EncoderOutput out = encode(t, s.weights, ex.input(Mode::question_generation));
  t.backward(ad::sum(out.condition_feature));
  EXPECT_GT(s.weights.word_embedding->gradient.values().size(), 0u);
  double word = 0, chars = 0;
  for (Real g : s.weights.word_embedding->gradient.values()) word += std::abs(g);
  for (Real g : s.weights.char_embedding->gradient.values()) chars += std::abs(g);
  EXPECT_GT(word, 0.0);
  EXPECT_GT(chars, 0.0);
}

TEST(Encode, GradientsMatchFiniteDifferences) {
  EncoderRig s;
  Example ex;
  Rng rng(31);
  Tensor proj({s.config.condition_dim()});
  for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = rng.uniform(-1, 1);
  for (Mode mode : {Mode::answer_generation, Mode::question_generation}) {
    const auto r = jointgen::testing::check_gradients(
        [&](Tape& t) {
          const EncoderOutput out = encode(t, s.weights, ex.input(mode));
          return ad::add(ad::dot(out.condition_feature, t.constant(proj)),
                         ad::sum(ad::row(out.doc_matrix, 2)));
        },
        jointgen::testing::all_parameters(s.store), 1e-5, 12);
    EXPECT_LT(r.max_relative_error, 1e-5) << to_string(mode) << " " << r.worst;
  }
}
