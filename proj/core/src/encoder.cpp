#include "jointgen/encoder.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "jointgen/errors.hpp"

namespace jointgen {

EncoderWeights EncoderWeights::create(ParameterStore& store, const ModelConfig& config) {
  EncoderWeights w;
  w.word_embedding =
      &store.create("encoder.word_embedding", {config.encoder_vocab_size, config.word_emb_dim});
  w.char_embedding =
      &store.create("encoder.char_embedding", {config.char_vocab_size, config.char_emb_dim});
  w.char_lstm = BiLstmWeights::create(store, "encoder.char_lstm", config.char_emb_dim,
                                      config.char_hidden_dim);
  w.context_lstm = BiLstmWeights::create(store, "encoder.context_lstm", config.token_dim(),
                                         config.rnn_hidden_dim);
  w.aggregation_lstm = BiLstmWeights::create(store, "encoder.aggregation_lstm",
                                             config.annotation_dim(), config.rnn_hidden_dim);
  w.mode_embedding = &store.create("encoder.mode_embedding", {2, config.mode_emb_dim});
  return w;
}

std::size_t TokenSequence::real_length() const {
  if (mask.empty()) {
    return words.size();
  }
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

namespace {

Var embed_chars(Tape& tape, const EncoderWeights& weights, std::span<const int> chars,
                const DropoutContext& dropout) {
  const Var table = tape.parameter(*weights.char_embedding);
  std::vector<Var> steps;
  steps.reserve(chars.size());
  for (int c : chars) {
    if (c < 0) {
      throw VocabularyError(fmt::format("negative character id {}", c));
    }
    steps.push_back(ad::gather_row(table, static_cast<std::size_t>(c)));
  }
  return run_bilstm(tape, weights.char_lstm, steps, dropout).final_state;
}

Var lookup_word(Tape& tape, const EncoderWeights& weights, int word_id) {
  if (word_id < 0) {
    throw VocabularyError(fmt::format("negative word id {}", word_id));
  }
  return ad::gather_row(tape.parameter(*weights.word_embedding),
                        static_cast<std::size_t>(word_id));
}

Var apply_dropout(Var x, const DropoutContext& dropout) {
  if (!dropout.active()) {
    return x;
  }
  return jointgen::dropout(x, dropout.rate, dropout.phase, dropout.sample(x.size()));
}

// Embeds the real prefix of a sequence, sharing character encodings between
// repeated spellings.
std::vector<Var> embed_sequence(Tape& tape, const EncoderWeights& weights,
                                const TokenSequence& seq, const DropoutContext& dropout) {
  const std::size_t n = seq.real_length();
  if (seq.chars.size() < n) {
    throw DimensionError(fmt::format("sequence has {} real tokens but {} spellings", n,
                                     seq.chars.size()));
  }
  std::map<std::vector<int>, Var> spelled;
  std::vector<Var> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& chars = seq.chars[i];
    auto it = spelled.find(chars);
    if (it == spelled.end()) {
      it = spelled.emplace(chars, embed_chars(tape, weights, chars, dropout)).first;
    }
    const Var e = ad::concat({lookup_word(tape, weights, seq.words[i]), it->second});
    out.push_back(apply_dropout(e, dropout));
  }
  return out;
}

}  // namespace

Var embed_word(Tape& tape, const EncoderWeights& weights, int word_id,
               std::span<const int> chars, const DropoutContext& dropout) {
  const Var word = lookup_word(tape, weights, word_id);
  const Var spelling = embed_chars(tape, weights, chars, dropout);
  return apply_dropout(ad::concat({word, spelling}), dropout);
}

SequenceEncoding encode_sequence(Tape& tape, const BiLstmWeights& weights,
                                 std::span<const Var> embeddings,
                                 std::span<const unsigned char> mask,
                                 const DropoutContext& dropout) {
  if (embeddings.empty()) {
    throw ContractError("encode_sequence: empty sequence");
  }
  if (!mask.empty() && mask.size() != embeddings.size()) {
    throw DimensionError(fmt::format("encode_sequence: mask of {} for {} positions",
                                     mask.size(), embeddings.size()));
  }
  std::size_t real = embeddings.size();
  if (!mask.empty()) {
    real = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
    for (std::size_t i = 0; i < real; ++i) {
      if (mask[i] == 0) {
        throw ContractError("encode_sequence: padding must follow all real tokens");
      }
    }
  }
  if (real == 0) {
    throw ContractError("encode_sequence: every position is padding");
  }
  BiLstmOutput bi = run_bilstm(tape, weights, embeddings.first(real), dropout);
  SequenceEncoding out{std::move(bi.annotations), bi.final_state};
  if (real < embeddings.size()) {
    const Var zeros = tape.constant(Tensor({weights.output_dim()}));
    out.annotations.resize(embeddings.size(), zeros);
  }
  return out;
}

std::vector<std::size_t> condition_occurrences(std::span<const int> document,
                                               std::span<const int> condition,
                                               std::optional<TokenSpan> answer_span,
                                               int first_matchable) {
  std::vector<std::size_t> positions;
  if (answer_span) {
    if (answer_span->end > document.size() || answer_span->begin > answer_span->end) {
      throw ContractError(fmt::format("answer span [{}, {}) outside document of {} tokens",
                                      answer_span->begin, answer_span->end,
                                      document.size()));
    }
    for (std::size_t i = answer_span->begin; i < answer_span->end; ++i) {
      positions.push_back(i);
    }
    return positions;
  }
  for (int token : condition) {
    if (token < first_matchable) {
      continue;
    }
    const auto it = std::find(document.begin(), document.end(), token);
    if (it != document.end()) {
      positions.push_back(static_cast<std::size_t>(it - document.begin()));
    }
  }
  return positions;
}

std::vector<Var> extract_condition_occurrences(std::span<const Var> doc_annotations,
                                               std::span<const int> document,
                                               std::span<const int> condition,
                                               std::optional<TokenSpan> answer_span) {
  if (doc_annotations.size() != document.size()) {
    throw DimensionError(fmt::format("{} annotations for {} document tokens",
                                     doc_annotations.size(), document.size()));
  }
  std::vector<Var> extracted;
  for (std::size_t pos : condition_occurrences(document, condition, answer_span)) {
    extracted.push_back(doc_annotations[pos]);
  }
  return extracted;
}

SequenceEncoding aggregate_extractive_condition(Tape& tape, const EncoderWeights& weights,
                                                std::span<const Var> extracted,
                                                const DropoutContext& dropout) {
  BiLstmOutput bi = run_bilstm(tape, weights.aggregation_lstm, extracted, dropout);
  return {std::move(bi.annotations), bi.final_state};
}

EncoderOutput encode(Tape& tape, const EncoderWeights& weights, const EncoderInput& input,
                     const DropoutContext& dropout) {
  const std::size_t n_doc = input.document.real_length();
  const std::size_t n_cond = input.condition.real_length();
  if (n_doc == 0 || n_cond == 0) {
    throw ContractError(fmt::format("encode: document ({} tokens) and condition ({} tokens) "
                                    "must be nonempty",
                                    n_doc, n_cond));
  }
  EncoderOutput out;
  out.mode = input.mode;

  const auto doc_embeddings = embed_sequence(tape, weights, input.document, dropout);
  SequenceEncoding doc = encode_sequence(tape, weights.context_lstm, doc_embeddings, {},
                                         dropout);
  const auto cond_embeddings = embed_sequence(tape, weights, input.condition, dropout);
  SequenceEncoding cond = encode_sequence(tape, weights.context_lstm, cond_embeddings, {},
                                          dropout);

  // Pad the document back out to its full (padded) width.
  const std::size_t doc_width = input.document.words.size();
  out.doc_mask.assign(doc_width, 0);
  std::fill_n(out.doc_mask.begin(), n_doc, 1);
  if (doc.annotations.size() < doc_width) {
    const Var zeros = tape.constant(Tensor({weights.context_lstm.output_dim()}));
    doc.annotations.resize(doc_width, zeros);
  }

  const auto real_doc = input.document.words.first(n_doc);
  const auto real_cond = input.condition.words.first(n_cond);
  const auto extracted = extract_condition_occurrences(
      std::span<const Var>(doc.annotations).first(n_doc), real_doc, real_cond,
      input.answer_span);
  SequenceEncoding aggregated = aggregate_extractive_condition(tape, weights, extracted,
                                                               dropout);

  out.doc_matrix = ad::stack(doc.annotations);
  out.doc_annotations = std::move(doc.annotations);
  out.cond_annotations = std::move(cond.annotations);
  out.cond_final = cond.final_state;
  out.extractive_annotations = std::move(aggregated.annotations);
  out.extractive_final = aggregated.final_state;
  out.condition_summary =
      input.mode == Mode::answer_generation ? out.cond_final : out.extractive_final;
  const Var mode_vector = ad::gather_row(tape.parameter(*weights.mode_embedding),
                                         static_cast<std::size_t>(input.mode));
  out.condition_feature = ad::concat({out.condition_summary, mode_vector});
  return out;
}

}  // namespace jointgen
