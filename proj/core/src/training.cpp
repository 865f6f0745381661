#include "jointgen/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "jointgen/batching.hpp"
#include "jointgen/checkpoint.hpp"
#include "jointgen/errors.hpp"
#include "jointgen/log.hpp"

namespace jointgen {

Var nll_loss(std::span<const Var> word_dists, std::span<const int> gold,
             std::span<const unsigned char> mask) {
  if (word_dists.size() != gold.size() || (!mask.empty() && mask.size() != gold.size())) {
    throw DimensionError(fmt::format("nll_loss: {} distributions, {} gold ids, mask {}",
                                     word_dists.size(), gold.size(), mask.size()));
  }
  if (word_dists.empty()) {
    throw ContractError("nll_loss: no steps");
  }
  Tape& tape = *word_dists.front().tape;
  std::vector<Var> terms;
  for (std::size_t t = 0; t < gold.size(); ++t) {
    if (!mask.empty() && mask[t] == 0) continue;
    const Var& dist = word_dists[t];
    const bool reachable = gold[t] >= 0 && static_cast<std::size_t>(gold[t]) < dist.size();
    const Var p = reachable ? ad::pick(dist, static_cast<std::size_t>(gold[t]))
                            : tape.constant(Tensor::scalar(0.0));
    terms.push_back(ad::log(p, kProbabilityFloor));
  }
  if (terms.empty()) {
    throw ContractError("nll_loss: every step is masked");
  }
  return ad::scale(ad::sum_scalars(terms), -1.0 / static_cast<Real>(terms.size()));
}

UnrollResult teacher_forced_unroll(Tape& tape, const JointModel& model, const Batch& batch,
                                   const DropoutContext& dropout) {
  const bool force_pointer = batch.mode == Mode::answer_generation && batch.extractive;
  const std::size_t hidden = model.config().rnn_hidden_dim;
  UnrollResult result;
  std::vector<Var> dists;
  std::vector<int> golds;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const ExampleView view = batch.row(r);
    const std::size_t length = batch.target.length(r);
    if (length == 0) {
      throw ContractError(fmt::format("example '{}' has an empty target", batch.example_ids[r]));
    }
    const auto prepared = model.prepare(tape, view, dropout);
    const KeepMask keep = dropout.sample(hidden);
    DecoderState state = initial_decoder_state(tape, hidden);
    Var y_prev = model.embed_output(tape, special::start, special::start, dropout);
    for (std::size_t t = 0; t < length; ++t) {
      DecoderStep step = decode_step(tape, model.decoder_weights(), prepared.context, state,
                                     y_prev, force_pointer, dropout, keep);
      ++result.decode_steps;
      dists.push_back(step.output.word_dist);
      golds.push_back(view.target[t]);
      state = step.state;
      if (t + 1 < length) {
        y_prev = model.embed_output(tape, view.target[t], view.target_words[t], dropout);
      }
    }
  }
  result.tokens = golds.size();
  result.loss = nll_loss(dists, golds);
  return result;
}

Adam::Adam(ParameterStore& store, Real beta1, Real beta2, Real epsilon)
    : store_(&store), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  for (const auto& p : store) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void Adam::step(Real lr) {
  if (m_.size() != store_->size()) {
    throw ContractError("adam: parameter store changed after construction");
  }
  ++steps_;
  const Real correction1 = 1.0 - std::pow(beta1_, static_cast<Real>(steps_));
  const Real correction2 = 1.0 - std::pow(beta2_, static_cast<Real>(steps_));
  for (std::size_t k = 0; k < store_->size(); ++k) {
    Parameter& p = (*store_)[k];
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const Real g = p.gradient[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const Real m_hat = m[i] / correction1;
      const Real v_hat = v[i] / correction2;
      p.value[i] -= lr * m_hat / (std::sqrt(v_hat) + epsilon_);
    }
  }
}

Real clip_gradients(ParameterStore& store, Real max_norm) {
  const Real norm = store.gradient_norm();
  if (norm > max_norm && norm > 0.0) {
    const Real factor = max_norm / norm;
    for (auto& p : store) {
      for (std::size_t i = 0; i < p->gradient.size(); ++i) p->gradient[i] *= factor;
    }
  }
  return norm;
}

Real lr_schedule(std::span<const Real> history, Real lr, Real decay, std::size_t patience) {
  if (patience == 0 || history.size() < patience + 1) return lr;
  for (std::size_t k = history.size() - patience; k < history.size(); ++k) {
    if (!(history[k] > history[k - 1])) return lr;
  }
  return lr * decay;
}

Real LrScheduler::observe(Real validation_loss) {
  window_.push_back(validation_loss);
  const Real next = lr_schedule(window_, lr_, decay_, patience_);
  if (next != lr_) {
    lr_ = next;
    ++decays_;
    window_.assign(1, validation_loss);
  }
  return lr_;
}

std::string_view to_string(ModeSet set) {
  switch (set) {
    case ModeSet::answer_only: return "a-gen";
    case ModeSet::question_only: return "q-gen";
    case ModeSet::joint: return "joint";
  }
  return "joint";
}

ModeSet parse_mode_set(std::string_view text) {
  if (text == "a-gen") return ModeSet::answer_only;
  if (text == "q-gen") return ModeSet::question_only;
  if (text == "joint") return ModeSet::joint;
  throw ConfigError(fmt::format("unknown mode '{}' (expected a-gen, q-gen or joint)", text));
}

std::vector<ScheduledBatch> joint_schedule(std::size_t qa_batches, std::size_t qg_batches,
                                           ModeSet modes) {
  std::vector<ScheduledBatch> out;
  if (modes == ModeSet::answer_only) {
    for (std::size_t i = 0; i < qa_batches; ++i) out.push_back({Mode::answer_generation, i});
    return out;
  }
  if (modes == ModeSet::question_only) {
    for (std::size_t i = 0; i < qg_batches; ++i) out.push_back({Mode::question_generation, i});
    return out;
  }
  if (qa_batches == 0 || qg_batches == 0) {
    throw ConfigError(fmt::format("joint training needs both streams, got {} a-gen and {} q-gen "
                                  "batches",
                                  qa_batches, qg_batches));
  }
  std::size_t a = 0, q = 0;
  while (a < qa_batches || q < qg_batches) {
    if (a < qa_batches) out.push_back({Mode::answer_generation, a++});
    if (q < qg_batches) out.push_back({Mode::question_generation, q++});
  }
  return out;
}

void TrainingConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (!(initial_lr > 0.0) || !std::isfinite(initial_lr)) {
    throw ConfigError(fmt::format("learning rate must be positive, got {}", initial_lr));
  }
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) {
    throw ConfigError(fmt::format("lr decay must be in (0, 1], got {}", lr_decay));
  }
  if (decay_patience == 0) throw ConfigError("decay patience must be at least 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw ConfigError(fmt::format("dropout must be in [0, 1), got {}", dropout));
  }
  if (!(clip_norm > 0.0)) throw ConfigError("gradient clip norm must be positive");
}

namespace {

std::vector<Mode> active_modes(ModeSet set) {
  switch (set) {
    case ModeSet::answer_only: return {Mode::answer_generation};
    case ModeSet::question_only: return {Mode::question_generation};
    case ModeSet::joint: return {Mode::answer_generation, Mode::question_generation};
  }
  return {};
}

class MetricLog {
 public:
  explicit MetricLog(const std::optional<std::filesystem::path>& dir) {
    if (!dir) return;
    path_ = *dir / "metrics.csv";
    out_.open(path_, std::ios::trunc);
    if (!out_) throw IoError(fmt::format("cannot write metric log '{}'", path_.string()));
    out_ << kMetricLogHeader << '\n';
  }
  void line(std::size_t epoch, Mode mode, std::string_view split, Real loss, Real lr) {
    if (!out_.is_open()) return;
    out_ << fmt::format("{},{},{},{:.6f},{:.6g}\n", epoch, to_string(mode), split, loss, lr);
    out_.flush();
    if (!out_) throw IoError(fmt::format("failed writing metric log '{}'", path_.string()));
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace

Real evaluate_loss(const JointModel& model, const Vocabularies& vocab,
                   std::span<const ProcessedExample> examples, Mode mode,
                   std::size_t batch_size, bool extractive) {
  if (examples.empty()) throw ContractError("evaluate_loss: no examples");
  BatchingOptions options;
  options.batch_size = batch_size;
  options.bucket = false;
  options.extractive = extractive;
  Real total = 0.0;
  std::size_t tokens = 0;
  for (const auto& rows : plan_batches(examples, options)) {
    const Batch batch = build_batch(examples, rows, mode, vocab, extractive);
    Tape tape;
    const UnrollResult r = teacher_forced_unroll(tape, model, batch);
    total += r.loss.value()[0] * static_cast<Real>(r.tokens);
    tokens += r.tokens;
  }
  return total / static_cast<Real>(tokens);
}

FitResult fit(JointModel& model, const Vocabularies& vocab,
              std::span<const ProcessedExample> train,
              std::span<const ProcessedExample> validation, const TrainingConfig& config,
              const FitOptions& options) {
  config.validate();
  if (train.empty()) throw ConfigError("training set is empty");
  if (options.out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*options.out_dir, ec);
    if (ec) {
      throw IoError(fmt::format("cannot create output directory '{}': {}",
                                options.out_dir->string(), ec.message()));
    }
  }
  const auto save = [&](const std::string& file, std::size_t epoch) {
    if (!options.out_dir) return;
    auto metadata = options.metadata;
    metadata["epoch"] = std::to_string(epoch);
    metadata["seed"] = std::to_string(config.seed);
    save_checkpoint(snapshot(model, vocab, std::move(metadata)), *options.out_dir / file);
  };

  MetricLog metric_log(options.out_dir);
  save(fmt::format("epoch-{:03}.ckpt", 0), 0);

  FitResult result;
  LrScheduler scheduler(config.initial_lr, config.lr_decay, config.decay_patience);
  Adam adam(model.parameters());
  Rng dropout_rng(derive_seed(config.seed, 0xD0));
  const DropoutContext dropout{Phase::train, config.dropout, &dropout_rng};
  const std::vector<Mode> modes = active_modes(config.mode_set);
  const Mode selection_mode = modes.front();
  Real best = std::numeric_limits<Real>::infinity();

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    EpochRecord record;
    record.epoch = epoch;
    record.lr = scheduler.lr();

    std::map<Mode, std::vector<std::vector<std::size_t>>> plans;
    for (Mode mode : modes) {
      BatchingOptions batching;
      batching.batch_size = config.batch_size;
      batching.bucket = config.bucket;
      batching.extractive = config.extractive;
      batching.shuffle_seed = derive_seed(config.seed, epoch * 2 + static_cast<std::size_t>(mode));
      plans[mode] = plan_batches(train, batching);
    }
    const auto schedule =
        joint_schedule(plans[Mode::answer_generation].size(),
                       plans[Mode::question_generation].size(), config.mode_set);
    BatchPrefetcher prefetcher(
        [&](std::size_t i) {
          const ScheduledBatch& s = schedule[i];
          return build_batch(train, plans[s.mode][s.index], s.mode, vocab, config.extractive);
        },
        schedule.size(), config.prefetch);

    std::map<Mode, std::pair<Real, std::size_t>> totals;
    while (auto batch = prefetcher.next()) {
      model.parameters().zero_gradients();
      Tape tape;
      const UnrollResult r = teacher_forced_unroll(tape, model, *batch, dropout);
      const Real loss = r.loss.value()[0];
      if (!std::isfinite(loss)) {
        throw Error(fmt::format("non-finite training loss at epoch {}", epoch));
      }
      tape.backward(r.loss);
      clip_gradients(model.parameters(), config.clip_norm);
      adam.step(scheduler.lr());
      ++result.optimizer_steps;
      auto& [sum, count] = totals[batch->mode];
      sum += loss * static_cast<Real>(r.tokens);
      count += r.tokens;
      metric_log.line(epoch, batch->mode, "batch", loss, scheduler.lr());
    }
    model.parameters().zero_gradients();

    for (Mode mode : modes) {
      const auto& [sum, count] = totals[mode];
      record.train_loss[mode] = sum / static_cast<Real>(count);
      metric_log.line(epoch, mode, "train", record.train_loss[mode], record.lr);
    }
    if (!validation.empty()) {
      for (Mode mode : modes) {
        record.validation_loss[mode] =
            evaluate_loss(model, vocab, validation, mode, config.batch_size, config.extractive);
        metric_log.line(epoch, mode, "val", record.validation_loss[mode], record.lr);
      }
      record.selection_loss = record.validation_loss[selection_mode];
    } else {
      record.selection_loss = record.train_loss[selection_mode];
    }

    save(fmt::format("epoch-{:03}.ckpt", epoch), epoch);
    if (record.selection_loss < best) {
      best = record.selection_loss;
      result.best_epoch = epoch;
      save("best.ckpt", epoch);
    }
    scheduler.observe(record.selection_loss);
    result.epochs.push_back(record);
    if (options.on_epoch) options.on_epoch(record);
    if (options.stop_when && options.stop_when(record)) break;
  }
  result.final_lr = scheduler.lr();
  return result;
}

}  // namespace jointgen
