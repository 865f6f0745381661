#include "jointgen/model.hpp"

#include <fmt/format.h>

#include "jointgen/errors.hpp"

namespace jointgen {

void ModelConfig::validate() const {
  const std::pair<const char*, std::size_t> dims[] = {
      {"word_emb_dim", word_emb_dim},       {"char_emb_dim", char_emb_dim},
      {"char_hidden_dim", char_hidden_dim}, {"rnn_hidden_dim", rnn_hidden_dim},
      {"mlp_hidden_dim", mlp_hidden_dim},   {"mode_emb_dim", mode_emb_dim},
      {"encoder_vocab_size", encoder_vocab_size},
      {"char_vocab_size", char_vocab_size},
      {"decoder_vocab_size", decoder_vocab_size},
  };
  for (const auto& [name, value] : dims) {
    if (value == 0) {
      throw ConfigError(fmt::format("model config: {} must be positive", name));
    }
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError(fmt::format("model config: dropout must be in [0, 1), got {}", dropout));
  }
  if (!(init_scale > 0.0)) {
    throw ConfigError("model config: init_scale must be positive");
  }
  if (decoder_vocab_size <= static_cast<std::size_t>(special::end)) {
    throw ConfigError("model config: decoder vocabulary must include the special symbols");
  }
}

namespace {
const ModelConfig& validated(const ModelConfig& config) {
  config.validate();
  return config;
}
}  // namespace

JointModel::JointModel(const ModelConfig& config)
    : config_(validated(config)),
      encoder_(EncoderWeights::create(params_, config_)),
      decoder_(DecoderWeights::create(params_, config_)) {}

void JointModel::initialize(Rng& rng) { params_.initialize_uniform(rng, config_.init_scale); }

JointModel::Prepared JointModel::prepare(Tape& tape, const ExampleView& example,
                                         const DropoutContext& dropout) const {
  EncoderInput input;
  input.document = {example.document, example.document_chars, example.document_mask};
  input.condition = {example.condition, example.condition_chars, example.condition_mask};
  input.mode = example.mode;
  input.answer_span =
      example.mode == Mode::question_generation ? example.answer_span : std::nullopt;
  Prepared prepared{encode(tape, encoder_, input, dropout), {}};
  prepared.context = make_decoder_context(
      tape, decoder_, prepared.encoded.doc_matrix, prepared.encoded.doc_mask,
      prepared.encoded.condition_feature, example.document_extended, example.extended_size,
      config_.decoder_vocab_size);
  return prepared;
}

Var JointModel::embed_output(Tape& tape, int extended_id, int word_id,
                             const DropoutContext& dropout) const {
  Var e;
  if (extended_id >= 0 && static_cast<std::size_t>(extended_id) < config_.decoder_vocab_size) {
    e = ad::gather_row(tape.parameter(*decoder_.output_embedding),
                       static_cast<std::size_t>(extended_id));
  } else {
    if (word_id < 0) {
      throw VocabularyError(fmt::format("no encoder word for output id {}", extended_id));
    }
    e = ad::gather_row(tape.parameter(*encoder_.word_embedding),
                       static_cast<std::size_t>(word_id));
  }
  if (dropout.active()) {
    e = jointgen::dropout(e, dropout.rate, dropout.phase, dropout.sample(e.size()));
  }
  return e;
}

}  // namespace jointgen
