#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "jointgen/batch.hpp"
#include "jointgen/layers.hpp"
#include "jointgen/model_config.hpp"

namespace jointgen {

struct EncoderWeights {
  Parameter* word_embedding = nullptr;  // [V_enc x word_emb_dim]
  Parameter* char_embedding = nullptr;  // [V_char x char_emb_dim]
  BiLstmWeights char_lstm;
  BiLstmWeights context_lstm;      // shared by document and condition
  BiLstmWeights aggregation_lstm;  // over extracted document annotations
  Parameter* mode_embedding = nullptr;  // [2 x mode_emb_dim]

  static EncoderWeights create(ParameterStore& store, const ModelConfig& config);
};

/// A token sequence, possibly right padded. `chars` covers real positions.
struct TokenSequence {
  std::span<const int> words;
  std::span<const std::vector<int>> chars;
  std::span<const unsigned char> mask;  // empty = all real

  std::size_t real_length() const;
};

struct EncoderOutput {
  /// One annotation per position; padded positions hold zeros.
  std::vector<Var> doc_annotations;
  Var doc_matrix;
  std::vector<Var> cond_annotations;
  std::vector<Var> extractive_annotations;
  Var cond_final;
  Var extractive_final;
  /// cond_final in a-gen, extractive_final in q-gen.
  Var condition_summary;
  /// condition_summary joined with the learned mode embedding.
  Var condition_feature;
  std::vector<unsigned char> doc_mask;
  Mode mode = Mode::answer_generation;
};

/// e_i = [word embedding ; character BiLSTM final states].
Var embed_word(Tape& tape, const EncoderWeights& weights, int word_id,
               std::span<const int> chars, const DropoutContext& dropout = {});

struct SequenceEncoding {
  std::vector<Var> annotations;
  Var final_state;
};

/// BiLSTM over the real prefix of `embeddings`; padded positions get zero
/// annotations and the final state is taken at the last real token.
SequenceEncoding encode_sequence(Tape& tape, const BiLstmWeights& weights,
                                 std::span<const Var> embeddings,
                                 std::span<const unsigned char> mask = {},
                                 const DropoutContext& dropout = {});

/// Document positions whose annotations represent the condition: the
/// answer span when given, otherwise the first document occurrence of each
/// condition token in condition order (absent tokens skipped). Ids below
/// `first_matchable` (specials, unknown) never match.
std::vector<std::size_t> condition_occurrences(std::span<const int> document,
                                               std::span<const int> condition,
                                               std::optional<TokenSpan> answer_span,
                                               int first_matchable = special::first_regular);

std::vector<Var> extract_condition_occurrences(std::span<const Var> doc_annotations,
                                               std::span<const int> document,
                                               std::span<const int> condition,
                                               std::optional<TokenSpan> answer_span);

/// BiLSTM over the extracted annotations; an empty extraction yields an
/// empty sequence and a zero final state.
SequenceEncoding aggregate_extractive_condition(Tape& tape, const EncoderWeights& weights,
                                                std::span<const Var> extracted,
                                                const DropoutContext& dropout = {});

struct EncoderInput {
  TokenSequence document;
  TokenSequence condition;
  Mode mode = Mode::answer_generation;
  std::optional<TokenSpan> answer_span;
};

EncoderOutput encode(Tape& tape, const EncoderWeights& weights, const EncoderInput& input,
                     const DropoutContext& dropout = {});

}  // namespace jointgen
