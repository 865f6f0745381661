#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "jointgen/batch.hpp"
#include "jointgen/dataset.hpp"

namespace jointgen {

struct BatchingOptions {
  std::size_t batch_size = 32;
  /// Group examples of similar document length into the same batch.
  bool bucket = true;
  /// Shuffles example order before bucketing and batch order after it.
  std::optional<std::uint64_t> shuffle_seed;
  bool extractive = true;
};

/// Row assignment of every batch; partitions [0, n) exactly.
std::vector<std::vector<std::size_t>> plan_batches(std::span<const ProcessedExample> examples,
                                                   const BatchingOptions& options);

/// a-gen rows: condition = question, target = answer. q-gen rows:
/// condition = answer, target = question. Every document gains a trailing
/// </s> sentinel and every target a final </s>.
Batch build_batch(std::span<const ProcessedExample> examples,
                  std::span<const std::size_t> rows, Mode mode, const Vocabularies& vocab,
                  bool extractive = true);

std::vector<Batch> make_batches(std::span<const ProcessedExample> examples, Mode mode,
                                const Vocabularies& vocab, const BatchingOptions& options);

/// Builds batches in order, optionally on one background worker that stays
/// up to `lookahead` batches ahead. Lookahead 0 builds on demand.
class BatchPrefetcher {
 public:
  BatchPrefetcher(std::function<Batch(std::size_t)> build, std::size_t count,
                  std::size_t lookahead);
  ~BatchPrefetcher();
  BatchPrefetcher(const BatchPrefetcher&) = delete;
  BatchPrefetcher& operator=(const BatchPrefetcher&) = delete;

  /// Next batch in order, or nullopt when all were handed out.
  std::optional<Batch> next();

 private:
  void run();

  std::function<Batch(std::size_t)> build_;
  std::size_t count_;
  std::size_t lookahead_;
  std::size_t handed_out_ = 0;
  std::size_t built_ = 0;
  std::deque<Batch> ready_;
  std::exception_ptr failure_;
  bool stop_ = false;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::thread worker_;
};

/// Lookahead from JOINTGEN_NUM_PREFETCH, 0 when unset or invalid.
std::size_t prefetch_from_environment();

}  // namespace jointgen
