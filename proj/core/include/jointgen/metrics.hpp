#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jointgen {

/// Lowercase, drop ASCII punctuation, drop the articles a/an/the, split on
/// whitespace.
std::vector<std::string> normalize_answer(std::string_view text);

/// 1 when the normalized prediction equals any normalized gold.
int exact_match(std::string_view prediction, std::span<const std::string> golds);

/// Multiset token-overlap F1, maximized over golds.
double token_f1(std::string_view prediction, std::span<const std::string> golds);

/// Clipped n-gram matches and candidate n-gram totals for n = 1..4 plus
/// lengths, summable across a corpus.
struct BleuStats {
  std::size_t matches[4] = {0, 0, 0, 0};
  std::size_t totals[4] = {0, 0, 0, 0};
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;

  BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_stats(std::span<const std::string> candidate,
                     std::span<const std::string> reference);

/// Unsmoothed BLEU-4 with uniform weights and brevity penalty.
double bleu_from_stats(const BleuStats& stats);

/// Corpus BLEU-4 over whitespace-tokenized, aligned lists.
double corpus_bleu4(std::span<const std::string> candidates,
                    std::span<const std::string> references);

std::vector<std::string> split_whitespace(std::string_view text);

}  // namespace jointgen
