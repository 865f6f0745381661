#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "jointgen/batching.hpp"
#include "jointgen/errors.hpp"
#include "jointgen/model.hpp"
#include "test_support.hpp"

using namespace jointgen;
using jointgen::testing::small_config;
using jointgen::testing::synthetic_corpus;

namespace {

struct ModelRig {
  Corpus corpus = synthetic_corpus(4);
  JointModel model{small_config(corpus.vocab)};

  ModelRig() {
    Rng rng(3);
    model.initialize(rng);
  }
  Batch batch(Mode mode) const {
    const std::vector<std::size_t> rows = {0, 1, 2};
    return build_batch(corpus.train, rows, mode, corpus.vocab);
  }
};

}  // namespace

TEST(ModelConfig, DefaultsMatchPublishedSizes) {
  const ModelConfig c;
  EXPECT_EQ(c.word_emb_dim, 300u);
  EXPECT_EQ(c.rnn_hidden_dim, 384u);
  EXPECT_EQ(c.char_repr_dim(), 32u);
  EXPECT_EQ(c.annotation_dim(), 768u);
  EXPECT_DOUBLE_EQ(c.dropout, 0.3);
}

TEST(ModelConfig, ValidationRejectsBadValues) {
  const Corpus corpus = synthetic_corpus(2);
  ModelConfig c = small_config(corpus.vocab);
  EXPECT_NO_THROW(c.validate());
  ModelConfig zero = c;
  zero.rnn_hidden_dim = 0;
  EXPECT_THROW(zero.validate(), ConfigError);
  ModelConfig drop = c;
  drop.dropout = 1.0;
  EXPECT_THROW(drop.validate(), ConfigError);
  ModelConfig scale = c;
  scale.init_scale = 0.0;
  EXPECT_THROW(scale.validate(), ConfigError);
  ModelConfig vocab = c;
  vocab.decoder_vocab_size = 3;
  EXPECT_THROW(vocab.validate(), ConfigError);
  EXPECT_THROW(JointModel{zero}, ConfigError);
}

TEST(JointModel, ParameterNamesAreUniqueAndShared) {
  ModelRig r;
  std::set<std::string> names;
  for (const auto& p : r.model.parameters()) names.insert(p->name);
  EXPECT_EQ(names.size(), r.model.parameters().size());
  // One context BiLSTM serves both sides.
  EXPECT_EQ(r.model.encoder_weights().context_lstm.forward.weight,
            r.model.parameters().find("encoder.context_lstm.fwd.w"));
}

TEST(JointModel, InitializationRespectsScaleAndZeroBiases) {
  ModelRig r;
  const double scale = r.model.config().init_scale;
  for (const auto& p : r.model.parameters()) {
    for (Real v : p->value.values()) {
      EXPECT_LE(std::abs(v), scale) << p->name;
      if (is_bias_name(p->name)) EXPECT_EQ(v, 0.0) << p->name;
    }
  }
}

TEST(JointModel, PrepareAlignsContextWithPaddedDocument) {
  ModelRig r;
  for (Mode mode : {Mode::answer_generation, Mode::question_generation}) {
    const Batch b = r.batch(mode);
    for (std::size_t row = 0; row < b.size(); ++row) {
      Tape t;
      const ExampleView v = b.row(row);
      const auto prepared = r.model.prepare(t, v);
      EXPECT_EQ(prepared.context.doc_mask.size(), v.document.size());
      EXPECT_EQ(prepared.context.doc_extended.size(), v.document.size());
      EXPECT_EQ(prepared.context.decoder_vocab_size, r.corpus.vocab.decoder.size());
      EXPECT_EQ(prepared.encoded.mode, mode);
    }
  }
}

TEST(JointModel, AnswerModeIgnoresSpanForCondition) {
  ModelRig r;
  const Batch b = r.batch(Mode::answer_generation);
  ExampleView v = b.row(0);
  Tape t;
  const auto with = r.model.prepare(t, v);
  v.answer_span.reset();
  const auto without = r.model.prepare(t, v);
  EXPECT_EQ(with.encoded.condition_feature.value(), without.encoded.condition_feature.value());
}

TEST(JointModel, EmbedOutputUsesTableBySource) {
  ModelRig r;
  Tape t;
  const std::size_t vdec = r.corpus.vocab.decoder.size();
  const Tensor& out_table = r.model.decoder_weights().output_embedding->value;
  const Tensor& enc_table = r.model.encoder_weights().word_embedding->value;
  const Tensor in_vocab = r.model.embed_output(t, 5, 99).value();
  for (std::size_t k = 0; k < in_vocab.size(); ++k) EXPECT_EQ(in_vocab[k], out_table.at(5, k));
  const Tensor copied = r.model.embed_output(t, static_cast<int>(vdec), 7).value();
  for (std::size_t k = 0; k < copied.size(); ++k) EXPECT_EQ(copied[k], enc_table.at(7, k));
  EXPECT_THROW(r.model.embed_output(t, static_cast<int>(vdec) + 1, -1), VocabularyError);
}

TEST(JointModel, StepDistributionsNormalizedOnRealBatch) {
  ModelRig r;
  const Batch b = r.batch(Mode::question_generation);
  for (std::size_t row = 0; row < b.size(); ++row) {
    Tape t;
    const ExampleView v = b.row(row);
    const auto prepared = r.model.prepare(t, v);
    const DecoderStep s = decode_step(
        t, r.model.decoder_weights(), prepared.context,
        initial_decoder_state(t, r.model.config().rnn_hidden_dim),
        r.model.embed_output(t, special::start, special::start), false);
    const auto& p = s.output.word_dist.value().values();
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
    EXPECT_EQ(p.size(), v.extended_size);
  }
}
