#include "jointgen/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "jointgen/batching.hpp"
#include "jointgen/errors.hpp"

namespace jointgen {

std::vector<Real> repetition_filter(std::span<const Real> dist, std::span<const int> history,
                                    std::size_t whitelist_size) {
  std::vector<Real> out(dist.begin(), dist.end());
  if (history.empty()) return out;
  bool changed = false;
  for (int token : history) {
    if (token < 0 || static_cast<std::size_t>(token) < whitelist_size) continue;
    if (static_cast<std::size_t>(token) < out.size() && out[token] != 0.0) {
      out[token] = 0.0;
      changed = true;
    }
  }
  if (!changed) return out;
  const Real total = std::accumulate(out.begin(), out.end(), Real{0});
  if (!(total > 0.0)) return {dist.begin(), dist.end()};
  for (auto& p : out) p /= total;
  return out;
}

namespace {

std::vector<Real> step_distribution(const DecoderCursor& cursor, const Hypothesis& hyp,
                                    const DecodeSettings& settings) {
  if (!settings.filter_repeats) return cursor.distribution();
  return repetition_filter(cursor.distribution(), hyp.tokens, settings.whitelist_size);
}

void validate(const DecodeSettings& settings) {
  if (settings.beam_width == 0) throw ConfigError("beam width must be at least 1");
  if (settings.max_len == 0) throw ConfigError("max length must be at least 1");
}

}  // namespace

Hypothesis greedy_decode(const DecoderCursor& root, const DecodeSettings& settings) {
  validate(settings);
  Hypothesis hyp;
  std::unique_ptr<DecoderCursor> owned;
  const DecoderCursor* cursor = &root;
  while (hyp.tokens.size() < settings.max_len) {
    const auto dist = step_distribution(*cursor, hyp, settings);
    const auto best = std::max_element(dist.begin(), dist.end());
    if (best == dist.end() || !(*best > 0.0)) {
      throw ContractError("greedy_decode: distribution has no mass");
    }
    const int token = static_cast<int>(best - dist.begin());
    const Real lp = std::log(*best);
    hyp.tokens.push_back(token);
    hyp.token_logprobs.push_back(lp);
    hyp.logprob += lp;
    if (token == settings.end_token) {
      hyp.finished = true;
      break;
    }
    if (hyp.tokens.size() < settings.max_len) {
      owned = cursor->advance(token);
      cursor = owned.get();
    }
  }
  return hyp;
}

BeamResult beam_search(const DecoderCursor& root, const DecodeSettings& settings) {
  validate(settings);
  struct Live {
    Hypothesis hyp;
    std::unique_ptr<DecoderCursor> owned;
    const DecoderCursor* cursor;
  };
  struct Candidate {
    Real score;
    std::size_t parent;
    int token;
    Real logprob;
  };
  std::vector<Live> alive;
  alive.push_back({Hypothesis{}, nullptr, &root});
  std::vector<Hypothesis> pool;

  for (std::size_t step = 0; step < settings.max_len && !alive.empty(); ++step) {
    std::vector<Candidate> candidates;
    for (std::size_t p = 0; p < alive.size(); ++p) {
      const auto dist = step_distribution(*alive[p].cursor, alive[p].hyp, settings);
      for (std::size_t k = 0; k < dist.size(); ++k) {
        if (!(dist[k] > 0.0)) continue;
        const Real lp = std::log(dist[k]);
        candidates.push_back({alive[p].hyp.logprob + lp, p, static_cast<int>(k), lp});
      }
    }
    const std::size_t keep = std::min(settings.beam_width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), [](const Candidate& a, const Candidate& b) {
                        if (a.score != b.score) return a.score > b.score;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });
    const bool last_step = step + 1 == settings.max_len;
    std::vector<Live> next;
    for (std::size_t c = 0; c < keep; ++c) {
      const Candidate& cand = candidates[c];
      Hypothesis hyp = alive[cand.parent].hyp;
      hyp.tokens.push_back(cand.token);
      hyp.token_logprobs.push_back(cand.logprob);
      hyp.logprob = cand.score;
      hyp.finished = cand.token == settings.end_token;
      // Hitting the length limit completes an output just like the end token.
      if (hyp.finished || last_step) {
        pool.push_back(std::move(hyp));
        continue;
      }
      Live live{std::move(hyp), alive[cand.parent].cursor->advance(cand.token), nullptr};
      live.cursor = live.owned.get();
      next.push_back(std::move(live));
    }
    alive = std::move(next);
    // Scores only fall, so no alive hypothesis can overtake the pool.
    if (!pool.empty() && !alive.empty()) {
      Real pool_best = -INFINITY, alive_best = -INFINITY;
      for (const auto& h : pool) pool_best = std::max(pool_best, h.logprob);
      for (const auto& l : alive) alive_best = std::max(alive_best, l.hyp.logprob);
      if (pool_best >= alive_best) break;
    }
  }

  BeamResult result;
  const auto by_score = [](const Hypothesis& a, const Hypothesis& b) {
    return a.logprob > b.logprob;
  };
  std::stable_sort(pool.begin(), pool.end(), by_score);
  result.ranked = std::move(pool);
  if (result.ranked.empty()) {
    throw ContractError("beam_search: no hypothesis survived");
  }
  result.best = result.ranked.front();
  return result;
}

InferenceConfig InferenceConfig::defaults(Mode mode) {
  InferenceConfig c;
  c.mode = mode;
  if (mode == Mode::answer_generation) {
    c.beam_width = 1;
    c.max_len = 15;
  } else {
    c.beam_width = 4;
    c.max_len = 30;
  }
  return c;
}

void InferenceConfig::validate() const {
  if (beam_width == 0) throw ConfigError("beam width must be at least 1");
  if (max_len == 0) throw ConfigError("max length must be at least 1");
}

namespace {

struct Session {
  const JointModel* model;
  ExampleView view;
  bool force_pointer;
  Tape tape;
  DecoderContext context;
};

class ModelCursor final : public DecoderCursor {
 public:
  ModelCursor(std::shared_ptr<Session> session, const DecoderState& prev, Var y_prev)
      : session_(std::move(session)) {
    Session& s = *session_;
    const DecoderStep step = decode_step(s.tape, s.model->decoder_weights(), s.context, prev,
                                         y_prev, s.force_pointer);
    state_ = step.state;
    const Tensor& dist = step.output.word_dist.value();
    dist_.assign(dist.values().begin(), dist.values().end());
  }

  const std::vector<Real>& distribution() const override { return dist_; }

  std::unique_ptr<DecoderCursor> advance(int token) const override {
    Session& s = *session_;
    const int vocab = static_cast<int>(s.model->config().decoder_vocab_size);
    int word = token;
    if (token >= vocab) {
      const auto slot = static_cast<std::size_t>(token - vocab);
      if (slot >= s.view.oov_word_ids.size()) {
        throw VocabularyError(fmt::format("output id {} outside the extended vocabulary", token));
      }
      word = s.view.oov_word_ids[slot];
    }
    const Var y = s.model->embed_output(s.tape, token, word);
    return std::make_unique<ModelCursor>(session_, state_, y);
  }

 private:
  std::shared_ptr<Session> session_;
  DecoderState state_;
  std::vector<Real> dist_;
};

}  // namespace

std::unique_ptr<DecoderCursor> make_model_cursor(const JointModel& model,
                                                 const ExampleView& example, bool force_pointer) {
  auto session = std::make_shared<Session>();
  session->model = &model;
  session->view = example;
  session->force_pointer = force_pointer;
  session->context = model.prepare(session->tape, example).context;
  const DecoderState initial =
      initial_decoder_state(session->tape, model.config().rnn_hidden_dim);
  const Var start = model.embed_output(session->tape, special::start, special::start);
  return std::make_unique<ModelCursor>(session, initial, start);
}

Hypothesis decode_example(const JointModel& model, const ExampleView& example,
                          const InferenceConfig& config) {
  config.validate();
  const bool answer = example.mode == Mode::answer_generation;
  const auto root = make_model_cursor(model, example, answer && config.force_pointer);
  DecodeSettings settings;
  settings.beam_width = answer ? 1 : config.beam_width;
  settings.max_len = config.max_len;
  settings.filter_repeats = config.repetition_filter;
  settings.whitelist_size = model.config().decoder_vocab_size;
  if (settings.beam_width == 1) return greedy_decode(*root, settings);
  return beam_search(*root, settings).best;
}

std::string token_text(int extended_id, const Vocabulary& decoder_vocab,
                       std::span<const std::string> oov_words) {
  const int size = static_cast<int>(decoder_vocab.size());
  if (extended_id >= 0 && extended_id < size) return decoder_vocab.word(extended_id);
  const auto slot = static_cast<std::size_t>(extended_id - size);
  if (extended_id < 0 || slot >= oov_words.size()) {
    throw VocabularyError(fmt::format("output id {} outside the extended vocabulary",
                                      extended_id));
  }
  return oov_words[slot];
}

std::string render(const Hypothesis& hyp, const Vocabulary& decoder_vocab,
                   std::span<const std::string> oov_words) {
  std::string out;
  for (int token : hyp.tokens) {
    if (token == special::end) break;
    if (!out.empty()) out += ' ';
    out += token_text(token, decoder_vocab, oov_words);
  }
  return out;
}

std::vector<Prediction> generate_predictions(const JointModel& model, const Vocabularies& vocab,
                                             std::span<const ProcessedExample> examples,
                                             const InferenceConfig& config, bool extractive) {
  config.validate();
  std::vector<Prediction> out;
  out.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const std::size_t row[] = {i};
    const Batch batch = build_batch(examples, row, config.mode, vocab, extractive);
    const ExampleView view = batch.row(0);
    InferenceConfig effective = config;
    effective.force_pointer = config.force_pointer && extractive;
    const Hypothesis hyp = decode_example(model, view, effective);
    out.push_back({examples[i].id, config.mode, render(hyp, vocab.decoder, view.oov_words),
                   hyp.token_logprobs});
  }
  return out;
}

}  // namespace jointgen
