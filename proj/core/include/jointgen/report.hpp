#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jointgen/inference.hpp"
#include "jointgen/metrics.hpp"
#include "jointgen/squad.hpp"

namespace jointgen {

/// One JSON object per line: id, mode, text, token_logprobs.
std::string serialize_predictions(std::span<const Prediction> predictions);
/// ParseError messages name the 1-based line.
std::vector<Prediction> parse_predictions(std::string_view text,
                                          const std::string& source = "<memory>");
void save_predictions(std::span<const Prediction> predictions, const std::filesystem::path& path);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

struct EvalRecord {
  std::string id;
  std::string prediction;
  std::vector<std::string> golds;
  int em = 0;
  double f1 = 0.0;
  BleuStats bleu;

  friend bool operator==(const EvalRecord& a, const EvalRecord& b);
};

struct EvalReport {
  Mode task = Mode::answer_generation;
  std::vector<EvalRecord> records;
  /// Prediction ids without a gold example and gold ids without a prediction.
  std::vector<std::string> missing;
  /// Percentages; a-gen fills em/f1, q-gen fills bleu4.
  std::optional<double> exact_match;
  std::optional<double> f1;
  std::optional<double> bleu4;
  /// Reserved for scores that need external pretrained models.
  std::optional<double> qa_f1;
  std::optional<double> perplexity;

  /// Rebuilds the aggregates from the records.
  void recompute();
};

/// Text layout, in order:
///   "jointgen-report 1"
///   aggregate lines "key<TAB>value" for task, examples, missing,
///   exact_match, f1, bleu4, qa_f1, perplexity ("-" when absent)
///   a blank line, then a header row and one tab-separated row per example:
///   id, em, f1, m1..m4, t1..t4, cand_len, ref_len, prediction, golds
/// Text fields are JSON string literals (golds a JSON array).
std::string serialize_report(const EvalReport& report);
EvalReport parse_report(std::string_view text, const std::string& source = "<memory>");

/// Scores predictions of one task against gold examples. Unknown or missing
/// ids raise FormatError listing them unless `allow_missing`, in which case
/// they are recorded and skipped.
EvalReport evaluate_run(std::span<const Prediction> predictions,
                        std::span<const RawExample> gold, Mode task, bool allow_missing = false);

}  // namespace jointgen
