#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace jointgen {

/// One (paragraph, question, first answer) triple from a SQuAD v1.1 file.
struct RawExample {
  std::string id;
  std::string article_id;
  std::string context;
  std::string question;
  std::string answer_text;
  /// Byte offset of the first answer in `context`.
  std::size_t answer_start = 0;
  /// Every gold answer text, first one included.
  std::vector<std::string> answers;
};

/// Parses SQuAD v1.1 JSON. Malformed input raises ParseError whose message
/// carries the path to the offending node, e.g. data[0].paragraphs[1].qas[2].
std::vector<RawExample> parse_squad(std::string_view json_text,
                                    const std::string& source = "<memory>");
std::vector<RawExample> load_squad(const std::filesystem::path& path);

/// Serializes examples back to SQuAD v1.1 JSON (one paragraph per example,
/// articles grouped in first-seen order).
std::string to_squad_json(const std::vector<RawExample>& examples);

/// Byte offset of the `codepoint`-th UTF-8 code point of `text`.
std::size_t utf8_byte_offset(std::string_view text, std::size_t codepoint);
std::size_t utf8_codepoint_index(std::string_view text, std::size_t byte_offset);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace jointgen
