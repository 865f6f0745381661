#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "jointgen/batch.hpp"
#include "jointgen/dataset.hpp"
#include "jointgen/model.hpp"

namespace jointgen {

/// A decoding position: the distribution over the next token, and how to
/// move past a chosen token. Cursors are immutable.
class DecoderCursor {
 public:
  virtual ~DecoderCursor() = default;
  /// Next-token probabilities over the extended id space.
  virtual const std::vector<Real>& distribution() const = 0;
  virtual std::unique_ptr<DecoderCursor> advance(int token) const = 0;
};

/// Zeroes every already-emitted token with id >= `whitelist_size` and
/// renormalizes. Tokens below `whitelist_size` (the decoder vocabulary) may
/// repeat. Returns the input unchanged when nothing would survive.
std::vector<Real> repetition_filter(std::span<const Real> dist, std::span<const int> history,
                                    std::size_t whitelist_size);

struct DecodeSettings {
  std::size_t beam_width = 1;
  std::size_t max_len = 30;
  bool filter_repeats = true;
  std::size_t whitelist_size = 0;
  int end_token = special::end;
};

struct Hypothesis {
  /// Emitted tokens; ends with the end token when finished.
  std::vector<int> tokens;
  std::vector<Real> token_logprobs;
  Real logprob = 0.0;
  bool finished = false;
};

/// Argmax at every step, lowest id on ties.
Hypothesis greedy_decode(const DecoderCursor& root, const DecodeSettings& settings);

struct BeamResult {
  Hypothesis best;
  /// Completed hypotheses, best first.
  std::vector<Hypothesis> ranked;
};

/// Length-unnormalized beam search. Each step ranks every expansion of every
/// alive hypothesis by (score desc, parent rank, token id) and keeps the top
/// `beam_width`. Expansions ending in the end token or reaching `max_len`
/// retire to a pool whose best member is returned.
BeamResult beam_search(const DecoderCursor& root, const DecodeSettings& settings);

struct InferenceConfig {
  Mode mode = Mode::question_generation;
  std::size_t beam_width = 4;
  std::size_t max_len = 30;
  bool repetition_filter = true;
  bool force_pointer = true;

  /// Beam 4 and length 30 for q-gen; greedy and length 15 for a-gen.
  static InferenceConfig defaults(Mode mode);
  void validate() const;
};

/// Cursor that runs the model on its own tape. `example` must outlive it.
std::unique_ptr<DecoderCursor> make_model_cursor(const JointModel& model,
                                                 const ExampleView& example, bool force_pointer);

/// Decodes one row. a-gen always decodes greedily.
Hypothesis decode_example(const JointModel& model, const ExampleView& example,
                          const InferenceConfig& config);

/// Surface form of an extended id given the row's out-of-vocabulary words.
std::string token_text(int extended_id, const Vocabulary& decoder_vocab,
                       std::span<const std::string> oov_words);

/// Space-joined tokens, end token dropped.
std::string render(const Hypothesis& hyp, const Vocabulary& decoder_vocab,
                   std::span<const std::string> oov_words);

struct Prediction {
  std::string id;
  Mode mode = Mode::answer_generation;
  std::string text;
  std::vector<Real> token_logprobs;
};

std::vector<Prediction> generate_predictions(const JointModel& model, const Vocabularies& vocab,
                                             std::span<const ProcessedExample> examples,
                                             const InferenceConfig& config,
                                             bool extractive = true);

}  // namespace jointgen
