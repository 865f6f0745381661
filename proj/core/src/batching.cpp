#include "jointgen/batching.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "jointgen/errors.hpp"
#include "jointgen/random.hpp"

namespace jointgen {

std::vector<std::vector<std::size_t>> plan_batches(std::span<const ProcessedExample> examples,
                                                   const BatchingOptions& options) {
  if (examples.empty()) {
    throw ContractError("make_batches: no examples");
  }
  if (options.batch_size == 0) {
    throw ConfigError("batch size must be at least 1");
  }
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::optional<Rng> rng;
  if (options.shuffle_seed) {
    rng.emplace(*options.shuffle_seed);
    rng->shuffle(order);
  }
  if (options.bucket) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return examples[a].document.size() < examples[b].document.size();
    });
  }
  std::vector<std::vector<std::size_t>> plan;
  for (std::size_t i = 0; i < order.size(); i += options.batch_size) {
    const std::size_t end = std::min(order.size(), i + options.batch_size);
    plan.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                      order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (rng) {
    rng->shuffle(plan);
  }
  return plan;
}

Batch build_batch(std::span<const ProcessedExample> examples,
                  std::span<const std::size_t> rows, Mode mode, const Vocabularies& vocab,
                  bool extractive) {
  if (rows.empty()) {
    throw ContractError("build_batch: no rows");
  }
  const int decoder_size = static_cast<int>(vocab.decoder.size());
  Batch batch;
  batch.mode = mode;
  batch.extractive = extractive;
  std::vector<std::vector<int>> documents, conditions, targets, target_words, extended;
  for (std::size_t r : rows) {
    const ProcessedExample& ex = examples[r];
    if (ex.document_ids.size() != ex.document.size()) {
      throw ContractError(fmt::format("example '{}' is not indexed", ex.id));
    }
    batch.example_ids.push_back(ex.id);

    std::vector<int> doc = ex.document_ids;
    doc.push_back(special::end);
    auto doc_chars = ex.document_chars;
    doc_chars.push_back({special_char::sentinel});

    std::vector<int> doc_ext;
    std::vector<int> oov_ids;
    std::vector<std::string> oov_words;
    for (std::size_t i = 0; i < ex.document.size(); ++i) {
      const std::string& w = ex.document[i];
      if (auto id = vocab.decoder.find(w); id && *id >= special::first_regular) {
        doc_ext.push_back(*id);
        continue;
      }
      auto it = std::find(oov_words.begin(), oov_words.end(), w);
      if (it == oov_words.end()) {
        oov_words.push_back(w);
        oov_ids.push_back(ex.document_ids[i]);
        it = oov_words.end() - 1;
      }
      doc_ext.push_back(decoder_size + static_cast<int>(it - oov_words.begin()));
    }
    doc_ext.push_back(special::end);

    const bool agen = mode == Mode::answer_generation;
    const auto& target_tokens = agen ? ex.answer : ex.question;
    const auto& target_ids = agen ? ex.answer_ids : ex.question_ids;
    std::vector<int> tgt, tgt_words;
    for (std::size_t i = 0; i < target_tokens.size(); ++i) {
      const std::string& w = target_tokens[i];
      int ext = -1;
      if (auto id = vocab.decoder.find(w); id && *id >= special::first_regular) {
        ext = *id;
      } else if (auto it = std::find(oov_words.begin(), oov_words.end(), w);
                 it != oov_words.end()) {
        ext = decoder_size + static_cast<int>(it - oov_words.begin());
      }
      tgt.push_back(ext);
      tgt_words.push_back(target_ids[i]);
    }
    tgt.push_back(special::end);
    tgt_words.push_back(special::end);

    documents.push_back(std::move(doc));
    batch.document_chars.push_back(std::move(doc_chars));
    conditions.push_back(agen ? ex.question_ids : ex.answer_ids);
    batch.condition_chars.push_back(agen ? ex.question_chars : ex.answer_chars);
    targets.push_back(std::move(tgt));
    target_words.push_back(std::move(tgt_words));
    extended.push_back(std::move(doc_ext));
    batch.extended_sizes.push_back(vocab.decoder.size() + oov_words.size());
    batch.oov_word_ids.push_back(std::move(oov_ids));
    batch.oov_words.push_back(std::move(oov_words));
    batch.answer_spans.push_back(ex.answer_span);
  }
  batch.document = PaddedIds::from_rows(documents);
  batch.condition = PaddedIds::from_rows(conditions);
  batch.target = PaddedIds::from_rows(targets);
  batch.target_words = PaddedIds::from_rows(target_words);
  batch.document_extended = PaddedIds::from_rows(extended);
  // Padding of extended ids must never receive pointer mass.
  for (std::size_t i = 0; i < batch.document_extended.ids.size(); ++i) {
    if (batch.document_extended.mask[i] == 0) batch.document_extended.ids[i] = -1;
  }
  return batch;
}

std::vector<Batch> make_batches(std::span<const ProcessedExample> examples, Mode mode,
                                const Vocabularies& vocab, const BatchingOptions& options) {
  std::vector<Batch> batches;
  for (const auto& rows : plan_batches(examples, options)) {
    batches.push_back(build_batch(examples, rows, mode, vocab, options.extractive));
  }
  return batches;
}

BatchPrefetcher::BatchPrefetcher(std::function<Batch(std::size_t)> build, std::size_t count,
                                 std::size_t lookahead)
    : build_(std::move(build)), count_(count), lookahead_(lookahead) {
  if (lookahead_ > 0 && count_ > 0) {
    worker_ = std::thread([this] { run(); });
  }
}

BatchPrefetcher::~BatchPrefetcher() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void BatchPrefetcher::run() {
  for (;;) {
    std::size_t index = 0;
    {
      std::unique_lock lock(mutex_);
      cv_.wait(lock, [this] { return stop_ || ready_.size() < lookahead_; });
      if (stop_ || built_ == count_) return;
      index = built_;
    }
    try {
      Batch batch = build_(index);
      std::lock_guard lock(mutex_);
      ready_.push_back(std::move(batch));
      ++built_;
    } catch (...) {
      std::lock_guard lock(mutex_);
      failure_ = std::current_exception();
      stop_ = true;
    }
    cv_.notify_all();
  }
}

std::optional<Batch> BatchPrefetcher::next() {
  if (handed_out_ == count_) return std::nullopt;
  if (lookahead_ == 0) {
    return build_(handed_out_++);
  }
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [this] { return !ready_.empty() || failure_ != nullptr; });
  if (ready_.empty() && failure_) std::rethrow_exception(failure_);
  Batch batch = std::move(ready_.front());
  ready_.pop_front();
  ++handed_out_;
  lock.unlock();
  cv_.notify_all();
  return batch;
}

std::size_t prefetch_from_environment() {
  const char* raw = std::getenv("JOINTGEN_NUM_PREFETCH");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const long value = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || value < 0) return 0;
  return static_cast<std::size_t>(value);
}

}  // namespace jointgen
