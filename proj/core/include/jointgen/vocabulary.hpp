#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace jointgen {

/// Word <-> id map. Ids 0..3 are <pad>, <unk>, <s>, </s>.
class Vocabulary {
 public:
  Vocabulary();
  /// Rebuilds from a full id-ordered word list (specials first).
  static Vocabulary from_words(std::vector<std::string> words);

  int add(std::string_view word);
  std::optional<int> find(std::string_view word) const;
  /// Id of `word`, or the unknown id.
  int id(std::string_view word) const;
  const std::string& word(int id) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  std::size_t size() const noexcept { return words_.size(); }
  const std::vector<std::string>& words() const noexcept { return words_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
};

/// Byte-level character vocabulary: <pad>, <unk>, the document sentinel,
/// then the observed bytes in ascending order.
class CharVocabulary {
 public:
  CharVocabulary();
  static CharVocabulary from_bytes(const std::vector<unsigned char>& bytes);

  void add(unsigned char byte);
  int id(unsigned char byte) const;
  std::vector<int> spell(std::string_view word) const;
  std::size_t size() const noexcept { return bytes_.size() + 3; }
  const std::vector<unsigned char>& bytes() const noexcept { return bytes_; }

  friend bool operator==(const CharVocabulary&, const CharVocabulary&) = default;

 private:
  std::vector<unsigned char> bytes_;
  std::vector<int> ids_;  // per byte value, -1 when absent
};

/// Every word of the corpus, most frequent first, ties lexicographic.
Vocabulary build_encoder_vocab(const std::vector<std::vector<std::string>>& sequences);

/// The `k` most frequent question words, ties broken lexicographically.
Vocabulary build_decoder_vocab(const std::vector<std::vector<std::string>>& questions,
                               std::size_t k = 100);

CharVocabulary build_char_vocab(const std::vector<std::vector<std::string>>& sequences);

}  // namespace jointgen
