#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jointgen/parameters.hpp"
#include "jointgen/random.hpp"
#include "jointgen/tape.hpp"

namespace jointgen {

enum class Phase { train, eval };

/// Binary keep-mask, one byte per element.
using KeepMask = std::vector<unsigned char>;

/// Dropout settings for one forward pass. Masks are sampled from `rng`
/// only in the training phase.
struct DropoutContext {
  Phase phase = Phase::eval;
  Real rate = 0.0;
  Rng* rng = nullptr;

  bool active() const { return phase == Phase::train && rate > 0.0; }
  /// Fresh Bernoulli(1 - rate) keep mask; all ones when inactive.
  KeepMask sample(std::size_t n) const;
};

/// Identity in eval mode or at rate 0; otherwise x * keep / (1 - rate).
/// When `keep` is empty a mask is sampled from `rng`.
Var dropout(Var x, Real rate, Phase phase, std::span<const unsigned char> keep = {},
            Rng* rng = nullptr);

/// Gate rows are stacked input, forget, candidate, output.
struct LstmWeights {
  Parameter* weight = nullptr;  // [4h x (in + h)]
  Parameter* bias = nullptr;    // [4h]
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;

  static LstmWeights create(ParameterStore& store, const std::string& prefix,
                            std::size_t input_dim, std::size_t hidden_dim);
};

struct LstmState {
  Var h;
  Var c;
};

LstmState zero_lstm_state(Tape& tape, std::size_t hidden_dim);

/// One LSTM cell update on the tape of `x`.
LstmState lstm_step(Var x, const LstmState& prev, const LstmWeights& weights);

struct BiLstmWeights {
  LstmWeights forward;
  LstmWeights backward;

  static BiLstmWeights create(ParameterStore& store, const std::string& prefix,
                              std::size_t input_dim, std::size_t hidden_dim);
  std::size_t output_dim() const { return 2 * forward.hidden_dim; }
};

struct BiLstmOutput {
  /// Per position: forward state then backward state.
  std::vector<Var> annotations;
  /// Forward state after the last input joined with the backward state
  /// after the first input; zeros for an empty sequence.
  Var final_state;
};

/// Runs both directions over `inputs`. Recurrent dropout reuses one mask
/// per direction for the whole sequence.
BiLstmOutput run_bilstm(Tape& tape, const BiLstmWeights& weights,
                        std::span<const Var> inputs, const DropoutContext& dropout);

/// affine -> tanh -> affine. The caller applies the output nonlinearity.
struct TwoLayerMlpWeights {
  Parameter* w1 = nullptr;
  Parameter* b1 = nullptr;
  Parameter* w2 = nullptr;
  Parameter* b2 = nullptr;

  static TwoLayerMlpWeights create(ParameterStore& store, const std::string& prefix,
                                   std::size_t input_dim, std::size_t hidden_dim,
                                   std::size_t output_dim);
};

Var two_layer_mlp(Var x, const TwoLayerMlpWeights& weights);

/// Two tanh layers joined by a highway gate, then an affine output layer
/// whose input may carry extra features appended after the hidden block.
struct HighwayMlpWeights {
  Parameter* w1 = nullptr;
  Parameter* b1 = nullptr;
  Parameter* w2 = nullptr;
  Parameter* b2 = nullptr;
  Parameter* gate_w = nullptr;
  Parameter* gate_b = nullptr;
  Parameter* w3 = nullptr;
  Parameter* b3 = nullptr;
  std::size_t extra_dim = 0;

  static HighwayMlpWeights create(ParameterStore& store, const std::string& prefix,
                                  std::size_t input_dim, std::size_t hidden_dim,
                                  std::size_t extra_dim, std::size_t output_dim);
};

struct HighwayMlpOutput {
  Var layer1;
  Var layer2;
  Var gate;
  /// gate * layer1 + (1 - gate) * layer2
  Var blended;
  Var output;
};

HighwayMlpOutput three_layer_mlp_with_highway(Var x, const HighwayMlpWeights& weights,
                                              std::optional<Var> final_extra = std::nullopt);

}  // namespace jointgen
