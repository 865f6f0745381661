#include "jointgen/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "jointgen/errors.hpp"

namespace jointgen {

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t begin = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > begin) out.emplace_back(text.substr(begin, i - begin));
  }
  return out;
}

std::vector<std::string> normalize_answer(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::ispunct(c)) continue;
    cleaned.push_back(static_cast<char>(std::tolower(c)));
  }
  std::vector<std::string> tokens;
  for (auto& t : split_whitespace(cleaned)) {
    if (t == "a" || t == "an" || t == "the") continue;
    tokens.push_back(std::move(t));
  }
  return tokens;
}

int exact_match(std::string_view prediction, std::span<const std::string> golds) {
  if (golds.empty()) throw ContractError("exact_match: no gold answers");
  const auto pred = normalize_answer(prediction);
  for (const auto& gold : golds) {
    if (normalize_answer(gold) == pred) return 1;
  }
  return 0;
}

namespace {

double f1_single(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  std::map<std::string, std::size_t> counts;
  for (const auto& t : gold) ++counts[t];
  std::size_t overlap = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double token_f1(std::string_view prediction, std::span<const std::string> golds) {
  if (golds.empty()) throw ContractError("token_f1: no gold answers");
  const auto pred = normalize_answer(prediction);
  double best = 0.0;
  for (const auto& gold : golds) best = std::max(best, f1_single(pred, normalize_answer(gold)));
  return best;
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (int n = 0; n < 4; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

BleuStats bleu_stats(std::span<const std::string> candidate,
                     std::span<const std::string> reference) {
  BleuStats stats;
  stats.candidate_length = candidate.size();
  stats.reference_length = reference.size();
  for (std::size_t n = 1; n <= 4; ++n) {
    std::map<std::vector<std::string>, std::size_t> ref_counts;
    for (std::size_t i = 0; i + n <= reference.size(); ++i) {
      ++ref_counts[{reference.begin() + i, reference.begin() + i + n}];
    }
    std::map<std::vector<std::string>, std::size_t> cand_counts;
    for (std::size_t i = 0; i + n <= candidate.size(); ++i) {
      ++cand_counts[{candidate.begin() + i, candidate.begin() + i + n}];
    }
    for (const auto& [gram, count] : cand_counts) {
      const auto it = ref_counts.find(gram);
      stats.matches[n - 1] += std::min(count, it == ref_counts.end() ? 0 : it->second);
      stats.totals[n - 1] += count;
    }
  }
  return stats;
}

double bleu_from_stats(const BleuStats& stats) {
  double log_sum = 0.0;
  for (int n = 0; n < 4; ++n) {
    if (stats.matches[n] == 0 || stats.totals[n] == 0) return 0.0;
    log_sum += 0.25 * std::log(static_cast<double>(stats.matches[n]) /
                               static_cast<double>(stats.totals[n]));
  }
  double brevity = 1.0;
  if (stats.candidate_length < stats.reference_length) {
    brevity = std::exp(1.0 - static_cast<double>(stats.reference_length) /
                                 static_cast<double>(stats.candidate_length));
  }
  return brevity * std::exp(log_sum);
}

double corpus_bleu4(std::span<const std::string> candidates,
                    std::span<const std::string> references) {
  if (candidates.size() != references.size()) {
    throw ContractError(fmt::format("corpus_bleu4: {} candidates for {} references",
                                    candidates.size(), references.size()));
  }
  if (candidates.empty()) throw ContractError("corpus_bleu4: empty corpus");
  BleuStats total;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto cand = split_whitespace(candidates[i]);
    const auto ref = split_whitespace(references[i]);
    total += bleu_stats(cand, ref);
  }
  return bleu_from_stats(total);
}

}  // namespace jointgen
