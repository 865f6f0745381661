#include "jointgen/tokenizer.hpp"

#include <array>
#include <cctype>

namespace jointgen {
namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_space(unsigned char c) { return std::isspace(c) != 0; }

constexpr std::array<std::string_view, 6> kClitics = {"s", "re", "ve", "ll", "d", "m"};

bool is_clitic(std::string_view suffix) {
  for (auto c : kClitics) {
    if (suffix == c) return true;
  }
  return false;
}

void emit(std::vector<Token>& out, const std::string& lowered, std::size_t begin,
          std::size_t end) {
  out.push_back(Token{lowered.substr(begin, end - begin), begin, end});
}

// Splits a word run into word + contraction pieces.
void emit_word(std::vector<Token>& out, const std::string& lowered, std::size_t begin,
               std::size_t end) {
  const std::string_view word(lowered.data() + begin, end - begin);
  if (word.size() > 3 && word.substr(word.size() - 3) == "n't") {
    emit(out, lowered, begin, end - 3);
    emit(out, lowered, end - 3, end);
    return;
  }
  const auto apostrophe = word.rfind('\'');
  if (apostrophe != std::string_view::npos && apostrophe > 0 &&
      is_clitic(word.substr(apostrophe + 1))) {
    emit(out, lowered, begin, begin + apostrophe);
    emit(out, lowered, begin + apostrophe, end);
    return;
  }
  emit(out, lowered, begin, end);
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::string lowered(text);
  for (char& c : lowered) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80) c = static_cast<char>(std::tolower(u));
  }
  std::vector<Token> out;
  const std::size_t n = lowered.size();
  auto at = [&](std::size_t i) -> unsigned char {
    return i < n ? static_cast<unsigned char>(lowered[i]) : 0;
  };
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = at(i);
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (is_word_byte(c)) {
      std::size_t j = i + 1;
      while (j < n) {
        const unsigned char d = at(j);
        if (is_word_byte(d)) {
          ++j;
        } else if ((d == '-' || d == '\'') && is_word_byte(at(j + 1))) {
          j += 2;
        } else if ((d == '.' || d == ',') && is_digit(at(j - 1)) && is_digit(at(j + 1))) {
          j += 2;
        } else {
          break;
        }
      }
      emit_word(out, lowered, i, j);
      i = j;
      continue;
    }
    if (c == '\'') {
      std::size_t j = i + 1;
      while (j < n && std::isalpha(at(j)) != 0) ++j;
      if (j > i + 1 && !is_word_byte(at(j)) &&
          is_clitic(std::string_view(lowered).substr(i + 1, j - i - 1))) {
        emit(out, lowered, i, j);
        i = j;
        continue;
      }
    }
    emit(out, lowered, i, i + 1);
    ++i;
  }
  return out;
}

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> words;
  for (auto& t : tokenize(text)) {
    words.push_back(std::move(t.text));
  }
  return words;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace jointgen
