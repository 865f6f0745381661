#pragma once

#include <cstddef>

#include "jointgen/tensor.hpp"

namespace jointgen {

/// Architecture sizes. Defaults follow the published configuration; the
/// vocabulary sizes come from the data.
struct ModelConfig {
  std::size_t word_emb_dim = 300;
  std::size_t char_emb_dim = 16;
  /// Per direction; the character representation is twice this.
  std::size_t char_hidden_dim = 16;
  std::size_t rnn_hidden_dim = 384;
  std::size_t mlp_hidden_dim = 384;
  std::size_t mode_emb_dim = 16;
  Real dropout = 0.3;
  Real init_scale = 0.05;

  std::size_t encoder_vocab_size = 0;
  std::size_t char_vocab_size = 0;
  std::size_t decoder_vocab_size = 0;

  std::size_t char_repr_dim() const { return 2 * char_hidden_dim; }
  std::size_t token_dim() const { return word_emb_dim + char_repr_dim(); }
  std::size_t annotation_dim() const { return 2 * rnn_hidden_dim; }
  /// Mode-gated condition summary joined with the mode embedding.
  std::size_t condition_dim() const { return annotation_dim() + mode_emb_dim; }

  void validate() const;
};

}  // namespace jointgen
