#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "jointgen/layers.hpp"
#include "jointgen/model_config.hpp"

namespace jointgen {

/// Weights of the pointer-softmax decoder.
///
/// The attention MLP f keeps its first layer split into a document block
/// and a query block, which equals one affine map over the concatenated
/// input; the document block is then applied once per sequence.
struct DecoderWeights {
  Parameter* output_embedding = nullptr;  // [V_dec x word_emb_dim]
  Parameter* attention_doc = nullptr;     // [mlp_hidden x annotation_dim]
  Parameter* attention_query = nullptr;   // [mlp_hidden x (condition_dim + hidden)]
  Parameter* attention_hidden_bias = nullptr;  // [mlp_hidden]
  Parameter* attention_score = nullptr;        // [mlp_hidden]
  Parameter* attention_score_bias = nullptr;   // [1]
  LstmWeights cell1;  // input y_prev, recurrent state s_2
  LstmWeights cell2;  // input context v, recurrent state s_1
  TwoLayerMlpWeights generator;
  HighwayMlpWeights switch_mlp;

  static DecoderWeights create(ParameterStore& store, const ModelConfig& config);
};

/// s_1 / s_2 with the cell states of c_1 / c_2.
struct DecoderState {
  LstmState first;
  LstmState second;
};

DecoderState initial_decoder_state(Tape& tape, std::size_t hidden_dim);

/// Per-sequence inputs shared by every decoding step.
struct DecoderContext {
  Var doc_matrix;      // [n x annotation_dim]
  Var attention_keys;  // [n x mlp_hidden]
  std::vector<unsigned char> doc_mask;
  Var condition_feature;
  /// Extended output id of every document position (-1 on padding).
  std::vector<int> doc_extended;
  std::size_t extended_size = 0;
  std::size_t decoder_vocab_size = 0;
};

DecoderContext make_decoder_context(Tape& tape, const DecoderWeights& weights, Var doc_matrix,
                                    std::span<const unsigned char> doc_mask,
                                    Var condition_feature,
                                    std::span<const int> doc_extended,
                                    std::size_t extended_size,
                                    std::size_t decoder_vocab_size);

/// Document projection of the attention MLP, [n x mlp_hidden].
Var attention_keys(Tape& tape, const DecoderWeights& weights, Var doc_matrix);

/// alpha = masked softmax over positions of f([h^d_i ; condition ; s_1_prev]).
Var attention(Tape& tape, const DecoderWeights& weights, Var keys, Var condition_feature,
              Var s1_prev, std::span<const unsigned char> doc_mask);

/// v = sum_i alpha_i h^d_i.
Var context_vector(Var alpha, Var doc_matrix);

/// s_1 = c_1(y_prev, s_2_prev), then s_2 = c_2(v, s_1). `recurrent_keep`
/// is the per-sequence dropout mask applied to s_2_prev.
DecoderState recur(const DecoderState& state, Var y_prev, Var context,
                   const DecoderWeights& weights, const DropoutContext& dropout = {},
                   std::span<const unsigned char> recurrent_keep = {});

/// o = softmax(g([y_prev ; s_2 ; v ; condition])) over the decoder vocabulary.
Var generative_distribution(const DecoderWeights& weights, Var y_prev, Var s2, Var context,
                            Var condition_feature);

struct SwitchOutput {
  Var probability;  // shape {1}
  Var alpha_entropy;
  Var generative_entropy;
};

/// s = sigmoid(h([s_2 ; v ; o])) with H(alpha) and H(o) appended to the input
/// of h's final layer.
SwitchOutput switch_probability(const DecoderWeights& weights, Var s2, Var context,
                                Var alpha, Var generative);

/// p(w) = s * sum_{i: doc[i] = w} alpha_i + (1 - s) * o[w] over extended ids.
Var combine(Var alpha, Var switch_value, Var generative, std::span<const int> doc_extended,
            std::size_t extended_size);

/// Pointer mass per extended id.
Var aggregate_pointer(Var alpha, std::span<const int> doc_extended, std::size_t extended_size);

struct DecoderStepOutput {
  Var alpha;
  Var context;
  Var generative;
  Var switch_value;
  Var word_dist;
};

struct DecoderStep {
  DecoderState state;
  DecoderStepOutput output;
};

/// attention -> c_1 -> context -> c_2 -> generator -> switch -> combine.
/// With `force_pointer` the switch is fixed at exactly 1.
DecoderStep decode_step(Tape& tape, const DecoderWeights& weights, const DecoderContext& context,
                        const DecoderState& state, Var y_prev, bool force_pointer,
                        const DropoutContext& dropout = {},
                        std::span<const unsigned char> recurrent_keep = {});

}  // namespace jointgen
