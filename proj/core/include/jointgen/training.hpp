#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jointgen/batch.hpp"
#include "jointgen/dataset.hpp"
#include "jointgen/model.hpp"

namespace jointgen {

inline constexpr Real kProbabilityFloor = 1e-12;

/// Mean over unmasked steps of -ln p(gold). Gold ids of -1 (unreachable
/// words) and golds with zero mass score -ln(1e-12). An empty mask means
/// every step counts.
Var nll_loss(std::span<const Var> word_dists, std::span<const int> gold,
             std::span<const unsigned char> mask = {});

struct UnrollResult {
  Var loss;  // mean per target token over the batch
  std::size_t tokens = 0;
  std::size_t decode_steps = 0;
};

/// Teacher-forced pass over a batch. Step t consumes the gold token t-1
/// (the start symbol at t = 0). a-gen batches of extractive data point only.
UnrollResult teacher_forced_unroll(Tape& tape, const JointModel& model, const Batch& batch,
                                   const DropoutContext& dropout = {});

/// Bias-corrected Adam over every parameter of a store.
class Adam {
 public:
  explicit Adam(ParameterStore& store, Real beta1 = 0.9, Real beta2 = 0.999, Real epsilon = 1e-8);

  void step(Real lr);
  std::uint64_t steps() const noexcept { return steps_; }

 private:
  ParameterStore* store_;
  Real beta1_, beta2_, epsilon_;
  std::uint64_t steps_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

/// Rescales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
Real clip_gradients(ParameterStore& store, Real max_norm);

/// Multiplies `lr` by `decay` when the last `patience` deltas of `history`
/// are all strictly positive.
Real lr_schedule(std::span<const Real> history, Real lr, Real decay = 0.5,
                 std::size_t patience = 2);

/// Tracks the comparison window across epochs. After a decay the window
/// restarts from the loss that triggered it.
class LrScheduler {
 public:
  explicit LrScheduler(Real initial_lr, Real decay = 0.5, std::size_t patience = 2)
      : lr_(initial_lr), decay_(decay), patience_(patience) {}

  /// Records one epoch's validation loss; returns the learning rate for the
  /// next epoch.
  Real observe(Real validation_loss);
  Real lr() const noexcept { return lr_; }
  std::size_t decays() const noexcept { return decays_; }

 private:
  Real lr_;
  Real decay_;
  std::size_t patience_;
  std::size_t decays_ = 0;
  std::vector<Real> window_;
};

enum class ModeSet { answer_only, question_only, joint };

std::string_view to_string(ModeSet set);
/// "a-gen", "q-gen" or "joint".
ModeSet parse_mode_set(std::string_view text);

struct ScheduledBatch {
  Mode mode;
  std::size_t index;  // position within its own stream
  friend bool operator==(const ScheduledBatch&, const ScheduledBatch&) = default;
};

/// Joint mode alternates a-gen and q-gen batches; once either stream runs
/// out, the rest of the other follows in order. Single-task modes pass their
/// stream through and ignore the other.
std::vector<ScheduledBatch> joint_schedule(std::size_t qa_batches, std::size_t qg_batches,
                                           ModeSet modes);

struct TrainingConfig {
  std::size_t batch_size = 32;
  Real initial_lr = 2e-4;
  Real lr_decay = 0.5;
  std::size_t decay_patience = 2;
  Real dropout = 0.3;
  std::size_t max_epochs = 20;
  std::uint64_t seed = 1234;
  ModeSet mode_set = ModeSet::joint;
  Real clip_norm = 5.0;
  bool extractive = true;
  bool bucket = true;
  /// Batches built ahead on a worker thread; 0 builds inline.
  std::size_t prefetch = 0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::map<Mode, Real> train_loss;
  std::map<Mode, Real> validation_loss;
  /// Loss driving the schedule and best-model selection.
  Real selection_loss = 0.0;
  Real lr = 0.0;  // rate used during this epoch
};

struct FitOptions {
  /// Checkpoints and the metric log go here when set.
  std::optional<std::filesystem::path> out_dir;
  std::map<std::string, std::string> metadata;
  std::function<void(const EpochRecord&)> on_epoch;
  /// Stops after the epoch for which it returns true.
  std::function<bool(const EpochRecord&)> stop_when;
};

struct FitResult {
  std::vector<EpochRecord> epochs;
  Real final_lr = 0.0;
  std::optional<std::size_t> best_epoch;
  std::size_t optimizer_steps = 0;
};

/// Mean per-token loss of a mode over a data set, evaluation phase.
Real evaluate_loss(const JointModel& model, const Vocabularies& vocab,
                   std::span<const ProcessedExample> examples, Mode mode,
                   std::size_t batch_size, bool extractive = true);

/// Trains `model` in place. The metric log gets one "batch" line per update
/// plus "train" and "val" lines per epoch. Without validation examples the
/// training loss drives scheduling. max_epochs = 0 only writes the initial
/// checkpoint.
FitResult fit(JointModel& model, const Vocabularies& vocab,
              std::span<const ProcessedExample> train,
              std::span<const ProcessedExample> validation, const TrainingConfig& config,
              const FitOptions& options = {});

inline constexpr std::string_view kMetricLogHeader = "epoch,mode,split,loss,lr";

}  // namespace jointgen
