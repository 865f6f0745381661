#include "jointgen/decoder.hpp"

#include <numeric>

#include <fmt/format.h>

#include "jointgen/errors.hpp"

namespace jointgen {

DecoderWeights DecoderWeights::create(ParameterStore& store, const ModelConfig& config) {
  const std::size_t h = config.rnn_hidden_dim;
  const std::size_t mlp = config.mlp_hidden_dim;
  const std::size_t vocab = config.decoder_vocab_size;
  DecoderWeights w;
  w.output_embedding =
      &store.create("decoder.output_embedding", {vocab, config.word_emb_dim});
  w.attention_doc = &store.create("decoder.attention.doc.w", {mlp, config.annotation_dim()});
  w.attention_query =
      &store.create("decoder.attention.query.w", {mlp, config.condition_dim() + h});
  w.attention_hidden_bias = &store.create("decoder.attention.layer1.b", {mlp});
  w.attention_score = &store.create("decoder.attention.layer2.w", {mlp});
  w.attention_score_bias = &store.create("decoder.attention.layer2.b", {1});
  w.cell1 = LstmWeights::create(store, "decoder.cell1", config.word_emb_dim, h);
  w.cell2 = LstmWeights::create(store, "decoder.cell2", config.annotation_dim(), h);
  w.generator = TwoLayerMlpWeights::create(
      store, "decoder.generator",
      config.word_emb_dim + h + config.annotation_dim() + config.condition_dim(), mlp, vocab);
  w.switch_mlp = HighwayMlpWeights::create(store, "decoder.switch",
                                           h + config.annotation_dim() + vocab, mlp, 2, 1);
  return w;
}

DecoderState initial_decoder_state(Tape& tape, std::size_t hidden_dim) {
  return {zero_lstm_state(tape, hidden_dim), zero_lstm_state(tape, hidden_dim)};
}

Var attention_keys(Tape& tape, const DecoderWeights& weights, Var doc_matrix) {
  return ad::matmul_nt(doc_matrix, tape.parameter(*weights.attention_doc));
}

DecoderContext make_decoder_context(Tape& tape, const DecoderWeights& weights, Var doc_matrix,
                                    std::span<const unsigned char> doc_mask,
                                    Var condition_feature,
                                    std::span<const int> doc_extended,
                                    std::size_t extended_size,
                                    std::size_t decoder_vocab_size) {
  const std::size_t n = doc_matrix.value().rows();
  if (doc_mask.size() != n || doc_extended.size() != n) {
    throw DimensionError(fmt::format(
        "decoder context: {} document rows, mask {}, extended ids {}", n, doc_mask.size(),
        doc_extended.size()));
  }
  DecoderContext ctx;
  ctx.doc_matrix = doc_matrix;
  ctx.attention_keys = attention_keys(tape, weights, doc_matrix);
  ctx.doc_mask.assign(doc_mask.begin(), doc_mask.end());
  ctx.condition_feature = condition_feature;
  ctx.doc_extended.assign(doc_extended.begin(), doc_extended.end());
  ctx.extended_size = extended_size;
  ctx.decoder_vocab_size = decoder_vocab_size;
  return ctx;
}

Var attention(Tape& tape, const DecoderWeights& weights, Var keys, Var condition_feature,
              Var s1_prev, std::span<const unsigned char> doc_mask) {
  if (keys.value().rows() == 0) {
    throw ContractError("attention: empty document");
  }
  const Var query = ad::affine(tape.parameter(*weights.attention_query),
                               ad::concat({condition_feature, s1_prev}),
                               tape.parameter(*weights.attention_hidden_bias));
  const Var scores = ad::additive_scores(keys, query, tape.parameter(*weights.attention_score),
                                         tape.parameter(*weights.attention_score_bias));
  return ad::softmax(scores, doc_mask);
}

Var context_vector(Var alpha, Var doc_matrix) { return ad::vecmat(alpha, doc_matrix); }

DecoderState recur(const DecoderState& state, Var y_prev, Var context,
                   const DecoderWeights& weights, const DropoutContext& dropout,
                   std::span<const unsigned char> recurrent_keep) {
  Var carried = state.second.h;
  if (dropout.active() && !recurrent_keep.empty()) {
    carried = jointgen::dropout(carried, dropout.rate, dropout.phase, recurrent_keep);
  }
  DecoderState next;
  next.first = lstm_step(y_prev, {carried, state.first.c}, weights.cell1);
  next.second = lstm_step(context, {next.first.h, state.second.c}, weights.cell2);
  return next;
}

Var generative_distribution(const DecoderWeights& weights, Var y_prev, Var s2, Var context,
                            Var condition_feature) {
  return ad::softmax(
      two_layer_mlp(ad::concat({y_prev, s2, context, condition_feature}), weights.generator));
}

SwitchOutput switch_probability(const DecoderWeights& weights, Var s2, Var context,
                                Var alpha, Var generative) {
  SwitchOutput out;
  out.alpha_entropy = ad::entropy(alpha);
  out.generative_entropy = ad::entropy(generative);
  const auto mlp = three_layer_mlp_with_highway(
      ad::concat({s2, context, generative}), weights.switch_mlp,
      ad::concat({out.alpha_entropy, out.generative_entropy}));
  out.probability = ad::sigmoid(mlp.output);
  return out;
}

Var aggregate_pointer(Var alpha, std::span<const int> doc_extended, std::size_t extended_size) {
  return ad::scatter_add(alpha, doc_extended, extended_size);
}

Var combine(Var alpha, Var switch_value, Var generative, std::span<const int> doc_extended,
            std::size_t extended_size) {
  const std::size_t vocab = generative.size();
  if (vocab > extended_size) {
    throw DimensionError(fmt::format("combine: {} generative entries exceed {} outputs", vocab,
                                     extended_size));
  }
  std::vector<int> identity(vocab);
  std::iota(identity.begin(), identity.end(), 0);
  const Var pointer = aggregate_pointer(alpha, doc_extended, extended_size);
  const Var generated = ad::scatter_add(generative, identity, extended_size);
  return ad::add(ad::scale_by(pointer, switch_value),
                 ad::scale_by(generated, ad::one_minus(switch_value)));
}

DecoderStep decode_step(Tape& tape, const DecoderWeights& weights, const DecoderContext& context,
                        const DecoderState& state, Var y_prev, bool force_pointer,
                        const DropoutContext& dropout,
                        std::span<const unsigned char> recurrent_keep) {
  DecoderStep step;
  DecoderStepOutput& out = step.output;
  out.alpha = attention(tape, weights, context.attention_keys, context.condition_feature,
                        state.first.h, context.doc_mask);
  out.context = context_vector(out.alpha, context.doc_matrix);
  step.state = recur(state, y_prev, out.context, weights, dropout, recurrent_keep);
  out.generative = generative_distribution(weights, y_prev, step.state.second.h, out.context,
                                           context.condition_feature);
  if (force_pointer) {
    out.switch_value = tape.constant(Tensor::scalar(1.0));
  } else {
    out.switch_value = switch_probability(weights, step.state.second.h, out.context, out.alpha,
                                          out.generative)
                           .probability;
  }
  out.word_dist = combine(out.alpha, out.switch_value, out.generative, context.doc_extended,
                          context.extended_size);
  return step;
}

}  // namespace jointgen
