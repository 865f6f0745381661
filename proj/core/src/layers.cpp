#include "jointgen/layers.hpp"

#include <fmt/format.h>

#include "jointgen/errors.hpp"

namespace jointgen {

KeepMask DropoutContext::sample(std::size_t n) const {
  KeepMask keep(n, 1);
  if (!active()) {
    return keep;
  }
  if (rng == nullptr) {
    throw ContractError("dropout: training phase needs a random generator");
  }
  for (auto& k : keep) {
    k = rng->bernoulli(1.0 - rate) ? 1 : 0;
  }
  return keep;
}

Var dropout(Var x, Real rate, Phase phase, std::span<const unsigned char> keep, Rng* rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ContractError(fmt::format("dropout rate must be in [0, 1), got {}", rate));
  }
  if (phase == Phase::eval || rate == 0.0) {
    return x;
  }
  const std::size_t n = x.size();
  KeepMask sampled;
  if (keep.empty()) {
    sampled = DropoutContext{phase, rate, rng}.sample(n);
    keep = sampled;
  }
  if (keep.size() != n) {
    throw DimensionError(fmt::format("dropout: mask of {} for {} values", keep.size(), n));
  }
  Tensor factor(x.value().shape());
  const Real scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < n; ++i) {
    factor[i] = keep[i] != 0 ? scale : 0.0;
  }
  return ad::mul_constant(x, factor);
}

LstmWeights LstmWeights::create(ParameterStore& store, const std::string& prefix,
                                std::size_t input_dim, std::size_t hidden_dim) {
  LstmWeights w;
  w.weight = &store.create(prefix + ".w", {4 * hidden_dim, input_dim + hidden_dim});
  w.bias = &store.create(prefix + ".b", {4 * hidden_dim});
  w.input_dim = input_dim;
  w.hidden_dim = hidden_dim;
  return w;
}

LstmState zero_lstm_state(Tape& tape, std::size_t hidden_dim) {
  const Var zeros = tape.constant(Tensor({hidden_dim}));
  return {zeros, zeros};
}

LstmState lstm_step(Var x, const LstmState& prev, const LstmWeights& weights) {
  Tape& tape = *x.tape;
  const std::size_t h = weights.hidden_dim;
  if (x.size() != weights.input_dim || prev.h.size() != h || prev.c.size() != h) {
    throw DimensionError(fmt::format(
        "lstm_step: cell expects input {} and state {}, got input {} state {}/{}",
        weights.input_dim, h, x.size(), prev.h.size(), prev.c.size()));
  }
  const Var pre = ad::affine(tape.parameter(*weights.weight), ad::concat({x, prev.h}),
                             tape.parameter(*weights.bias));
  const Var input_gate = ad::sigmoid(ad::slice(pre, 0, h));
  const Var forget_gate = ad::sigmoid(ad::slice(pre, h, h));
  const Var candidate = ad::tanh(ad::slice(pre, 2 * h, h));
  const Var output_gate = ad::sigmoid(ad::slice(pre, 3 * h, h));
  const Var c = ad::add(ad::mul(forget_gate, prev.c), ad::mul(input_gate, candidate));
  const Var hidden = ad::mul(output_gate, ad::tanh(c));
  return {hidden, c};
}

BiLstmWeights BiLstmWeights::create(ParameterStore& store, const std::string& prefix,
                                    std::size_t input_dim, std::size_t hidden_dim) {
  return {LstmWeights::create(store, prefix + ".fwd", input_dim, hidden_dim),
          LstmWeights::create(store, prefix + ".bwd", input_dim, hidden_dim)};
}

namespace {

std::vector<Var> run_direction(Tape& tape, const LstmWeights& weights,
                               std::span<const Var> inputs, bool reverse,
                               const DropoutContext& dropout) {
  const std::size_t n = inputs.size();
  std::vector<Var> states(n);
  const KeepMask keep = dropout.sample(weights.hidden_dim);
  LstmState state = zero_lstm_state(tape, weights.hidden_dim);
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t pos = reverse ? n - 1 - step : step;
    LstmState carried = state;
    if (dropout.active()) {
      carried.h = jointgen::dropout(state.h, dropout.rate, dropout.phase, keep);
    }
    state = lstm_step(inputs[pos], carried, weights);
    states[pos] = state.h;
  }
  return states;
}

}  // namespace

BiLstmOutput run_bilstm(Tape& tape, const BiLstmWeights& weights,
                        std::span<const Var> inputs, const DropoutContext& dropout) {
  BiLstmOutput out;
  const std::size_t h = weights.forward.hidden_dim;
  if (inputs.empty()) {
    out.final_state = tape.constant(Tensor({2 * h}));
    return out;
  }
  const auto fwd = run_direction(tape, weights.forward, inputs, false, dropout);
  const auto bwd = run_direction(tape, weights.backward, inputs, true, dropout);
  out.annotations.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    out.annotations.push_back(ad::concat({fwd[i], bwd[i]}));
  }
  out.final_state = ad::concat({fwd.back(), bwd.front()});
  return out;
}

TwoLayerMlpWeights TwoLayerMlpWeights::create(ParameterStore& store,
                                              const std::string& prefix,
                                              std::size_t input_dim,
                                              std::size_t hidden_dim,
                                              std::size_t output_dim) {
  TwoLayerMlpWeights w;
  w.w1 = &store.create(prefix + ".layer1.w", {hidden_dim, input_dim});
  w.b1 = &store.create(prefix + ".layer1.b", {hidden_dim});
  w.w2 = &store.create(prefix + ".layer2.w", {output_dim, hidden_dim});
  w.b2 = &store.create(prefix + ".layer2.b", {output_dim});
  return w;
}

Var two_layer_mlp(Var x, const TwoLayerMlpWeights& weights) {
  Tape& tape = *x.tape;
  const Var hidden = ad::tanh(ad::affine(tape.parameter(*weights.w1), x,
                                         tape.parameter(*weights.b1)));
  return ad::affine(tape.parameter(*weights.w2), hidden, tape.parameter(*weights.b2));
}

HighwayMlpWeights HighwayMlpWeights::create(ParameterStore& store,
                                            const std::string& prefix,
                                            std::size_t input_dim,
                                            std::size_t hidden_dim,
                                            std::size_t extra_dim,
                                            std::size_t output_dim) {
  HighwayMlpWeights w;
  w.w1 = &store.create(prefix + ".layer1.w", {hidden_dim, input_dim});
  w.b1 = &store.create(prefix + ".layer1.b", {hidden_dim});
  w.w2 = &store.create(prefix + ".layer2.w", {hidden_dim, hidden_dim});
  w.b2 = &store.create(prefix + ".layer2.b", {hidden_dim});
  w.gate_w = &store.create(prefix + ".gate.w", {hidden_dim, hidden_dim});
  w.gate_b = &store.create(prefix + ".gate.b", {hidden_dim});
  w.w3 = &store.create(prefix + ".layer3.w", {output_dim, hidden_dim + extra_dim});
  w.b3 = &store.create(prefix + ".layer3.b", {output_dim});
  w.extra_dim = extra_dim;
  return w;
}

HighwayMlpOutput three_layer_mlp_with_highway(Var x, const HighwayMlpWeights& weights,
                                              std::optional<Var> final_extra) {
  Tape& tape = *x.tape;
  const std::size_t extra = final_extra ? final_extra->size() : 0;
  if (extra != weights.extra_dim) {
    throw DimensionError(fmt::format("highway mlp: expected {} extra features, got {}",
                                     weights.extra_dim, extra));
  }
  HighwayMlpOutput out;
  out.layer1 = ad::tanh(
      ad::affine(tape.parameter(*weights.w1), x, tape.parameter(*weights.b1)));
  out.layer2 = ad::tanh(
      ad::affine(tape.parameter(*weights.w2), out.layer1, tape.parameter(*weights.b2)));
  out.gate = ad::sigmoid(ad::affine(tape.parameter(*weights.gate_w), out.layer1,
                                    tape.parameter(*weights.gate_b)));
  out.blended = ad::add(ad::mul(out.gate, out.layer1),
                        ad::mul(ad::one_minus(out.gate), out.layer2));
  const Var final_input =
      final_extra ? ad::concat({out.blended, *final_extra}) : out.blended;
  out.output =
      ad::affine(tape.parameter(*weights.w3), final_input, tape.parameter(*weights.b3));
  return out;
}

}  // namespace jointgen
