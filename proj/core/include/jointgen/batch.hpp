#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jointgen/types.hpp"

namespace jointgen {

/// Right-padded [rows x cols] id matrix with a keep mask.
struct PaddedIds {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<int> ids;
  std::vector<unsigned char> mask;

  static PaddedIds from_rows(const std::vector<std::vector<int>>& rows);

  std::span<const int> row(std::size_t r) const {
    return std::span<const int>(ids).subspan(r * cols, cols);
  }
  std::span<const unsigned char> row_mask(std::size_t r) const {
    return std::span<const unsigned char>(mask).subspan(r * cols, cols);
  }
  std::size_t length(std::size_t r) const;
};

/// One row of a batch as seen by the model.
///
/// Output tokens live in an extended id space: ids below the decoder
/// vocabulary size are decoder-vocabulary words, ids above it index the
/// row's document words missing from that vocabulary.
struct ExampleView {
  Mode mode = Mode::answer_generation;
  std::span<const int> document;
  std::span<const std::vector<int>> document_chars;
  std::span<const unsigned char> document_mask;
  std::span<const int> condition;
  std::span<const std::vector<int>> condition_chars;
  std::span<const unsigned char> condition_mask;
  /// Answer position in the document, when known (extractive data).
  std::optional<TokenSpan> answer_span;
  /// Extended id of each document position; -1 on padding.
  std::span<const int> document_extended;
  std::size_t extended_size = 0;
  /// Encoder word id for each out-of-decoder-vocabulary slot.
  std::span<const int> oov_word_ids;
  /// Surface form of each out-of-decoder-vocabulary slot.
  std::span<const std::string> oov_words;
  /// Extended id per target step, -1 when no output can produce the word.
  std::span<const int> target;
  /// Encoder word id per target step, for re-embedding copied words.
  std::span<const int> target_words;
  std::span<const unsigned char> target_mask;
};

/// Mini-batch of one mode. All id matrices are right padded.
struct Batch {
  Mode mode = Mode::answer_generation;
  std::vector<std::string> example_ids;
  PaddedIds document;
  std::vector<std::vector<std::vector<int>>> document_chars;
  PaddedIds condition;
  std::vector<std::vector<std::vector<int>>> condition_chars;
  PaddedIds target;
  PaddedIds target_words;
  PaddedIds document_extended;
  std::vector<std::size_t> extended_sizes;
  std::vector<std::vector<int>> oov_word_ids;
  std::vector<std::vector<std::string>> oov_words;
  std::vector<std::optional<TokenSpan>> answer_spans;
  /// Whether a-gen decoding is restricted to pointing (extractive data).
  bool extractive = true;

  std::size_t size() const { return example_ids.size(); }
  ExampleView row(std::size_t r) const;
};

}  // namespace jointgen
