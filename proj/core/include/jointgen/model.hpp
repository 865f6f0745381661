#pragma once

#include "jointgen/batch.hpp"
#include "jointgen/decoder.hpp"
#include "jointgen/encoder.hpp"
#include "jointgen/model_config.hpp"
#include "jointgen/parameters.hpp"

namespace jointgen {

/// Shared encoder plus pointer-softmax decoder used for both a-gen and q-gen.
class JointModel {
 public:
  explicit JointModel(const ModelConfig& config);
  JointModel(const JointModel&) = delete;
  JointModel& operator=(const JointModel&) = delete;

  /// Uniform weights in [-init_scale, init_scale], zero biases.
  void initialize(Rng& rng);

  const ModelConfig& config() const { return config_; }
  ParameterStore& parameters() { return params_; }
  const ParameterStore& parameters() const { return params_; }
  const EncoderWeights& encoder_weights() const { return encoder_; }
  const DecoderWeights& decoder_weights() const { return decoder_; }

  struct Prepared {
    EncoderOutput encoded;
    DecoderContext context;
  };

  /// Encodes one example and builds its decoding context.
  Prepared prepare(Tape& tape, const ExampleView& example,
                   const DropoutContext& dropout = {}) const;

  /// Decoder input embedding of an output token: decoder-vocabulary ids use
  /// the output-side table, copied words their encoder embedding.
  Var embed_output(Tape& tape, int extended_id, int word_id,
                   const DropoutContext& dropout = {}) const;

 private:
  ModelConfig config_;
  ParameterStore params_;
  EncoderWeights encoder_;
  DecoderWeights decoder_;
};

}  // namespace jointgen
