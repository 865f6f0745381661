#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace jointgen {

/// A lowercased token and the byte range it came from.
struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

/// Rule-based English word tokenizer.
///
/// Lowercases ASCII, splits punctuation into single-character tokens, keeps
/// numbers with internal '.' or ',' ("3.14", "1,000") and words with
/// internal '-' or '\'' intact, and splits the clitics 's 're 've 'll 'd 'm
/// and n't. Bytes >= 0x80 are treated as word characters.
std::vector<Token> tokenize(std::string_view text);

std::vector<std::string> tokenize_words(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace jointgen
