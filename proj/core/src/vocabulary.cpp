#include "jointgen/vocabulary.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "jointgen/errors.hpp"
#include "jointgen/types.hpp"

namespace jointgen {

Vocabulary::Vocabulary() {
  for (auto w : {special::pad_token, special::unknown_token, special::start_token,
                 special::end_token}) {
    add(w);
  }
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
  Vocabulary v;
  const std::vector<std::string>& expected = v.words_;
  if (words.size() < expected.size() ||
      !std::equal(expected.begin(), expected.end(), words.begin())) {
    throw FormatError("vocabulary does not start with the reserved symbols");
  }
  for (std::size_t i = expected.size(); i < words.size(); ++i) {
    if (v.contains(words[i])) {
      throw FormatError(fmt::format("vocabulary repeats the word '{}'", words[i]));
    }
    v.add(words[i]);
  }
  return v;
}

int Vocabulary::add(std::string_view word) {
  if (auto existing = find(word)) {
    return *existing;
  }
  const int id = static_cast<int>(words_.size());
  words_.emplace_back(word);
  ids_.emplace(words_.back(), id);
  return id;
}

std::optional<int> Vocabulary::find(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::id(std::string_view word) const {
  return find(word).value_or(special::unknown);
}

const std::string& Vocabulary::word(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw VocabularyError(fmt::format("word id {} outside vocabulary of {}", id, words_.size()));
  }
  return words_[static_cast<std::size_t>(id)];
}

CharVocabulary::CharVocabulary() : ids_(256, -1) {}

CharVocabulary CharVocabulary::from_bytes(const std::vector<unsigned char>& bytes) {
  CharVocabulary v;
  for (unsigned char b : bytes) v.add(b);
  return v;
}

void CharVocabulary::add(unsigned char byte) {
  if (ids_[byte] >= 0) return;
  bytes_.push_back(byte);
  ids_[byte] = static_cast<int>(bytes_.size() - 1) + special_char::first_regular;
}

int CharVocabulary::id(unsigned char byte) const {
  return ids_[byte] >= 0 ? ids_[byte] : special_char::unknown;
}

std::vector<int> CharVocabulary::spell(std::string_view word) const {
  std::vector<int> out;
  out.reserve(word.size());
  for (char c : word) out.push_back(id(static_cast<unsigned char>(c)));
  if (out.empty()) out.push_back(special_char::unknown);
  return out;
}

namespace {

std::vector<std::string> ranked_words(const std::vector<std::vector<std::string>>& sequences) {
  std::map<std::string, std::size_t> counts;
  for (const auto& seq : sequences) {
    for (const auto& w : seq) ++counts[w];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  words.reserve(ranked.size());
  for (auto& [w, _] : ranked) words.push_back(std::move(w));
  return words;
}

}  // namespace

Vocabulary build_encoder_vocab(const std::vector<std::vector<std::string>>& sequences) {
  Vocabulary v;
  for (const auto& w : ranked_words(sequences)) v.add(w);
  return v;
}

Vocabulary build_decoder_vocab(const std::vector<std::vector<std::string>>& questions,
                               std::size_t k) {
  Vocabulary v;
  std::size_t taken = 0;
  for (const auto& w : ranked_words(questions)) {
    if (taken == k) break;
    if (v.contains(w)) continue;  // a literal "<unk>" etc. in the text
    v.add(w);
    ++taken;
  }
  return v;
}

CharVocabulary build_char_vocab(const std::vector<std::vector<std::string>>& sequences) {
  std::vector<bool> seen(256, false);
  for (const auto& seq : sequences) {
    for (const auto& w : seq) {
      for (char c : w) seen[static_cast<unsigned char>(c)] = true;
    }
  }
  CharVocabulary v;
  for (int b = 0; b < 256; ++b) {
    if (seen[static_cast<std::size_t>(b)]) v.add(static_cast<unsigned char>(b));
  }
  return v;
}

}  // namespace jointgen
