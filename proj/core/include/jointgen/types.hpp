#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace jointgen {

/// Operating mode: generate an answer from a question (a-gen) or a
/// question from an answer (q-gen).
enum class Mode { answer_generation = 0, question_generation = 1 };

std::string_view to_string(Mode mode);
/// Accepts "a-gen" / "q-gen".
Mode parse_mode(std::string_view text);

/// Half-open token range [begin, end).
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

/// Reserved ids shared by the word vocabularies.
namespace special {
inline constexpr int pad = 0;
inline constexpr int unknown = 1;
inline constexpr int start = 2;
inline constexpr int end = 3;
inline constexpr int first_regular = 4;

inline constexpr std::string_view pad_token = "<pad>";
inline constexpr std::string_view unknown_token = "<unk>";
inline constexpr std::string_view start_token = "<s>";
inline constexpr std::string_view end_token = "</s>";
}  // namespace special

/// Reserved ids of the character vocabulary.
namespace special_char {
inline constexpr int pad = 0;
inline constexpr int unknown = 1;
/// Spelling of the end-of-document sentinel word.
inline constexpr int sentinel = 2;
inline constexpr int first_regular = 3;
}  // namespace special_char

}  // namespace jointgen
