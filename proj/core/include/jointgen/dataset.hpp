#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jointgen/squad.hpp"
#include "jointgen/tokenizer.hpp"
#include "jointgen/types.hpp"
#include "jointgen/vocabulary.hpp"

namespace jointgen {

struct Vocabularies {
  Vocabulary encoder;
  Vocabulary decoder;
  CharVocabulary chars;

  friend bool operator==(const Vocabularies&, const Vocabularies&) = default;
};

/// Tokenized example. `answer` always equals the document tokens inside
/// `answer_span`.
struct ProcessedExample {
  std::string id;
  std::string article_id;
  std::vector<std::string> document;
  std::vector<std::string> question;
  std::vector<std::string> answer;
  TokenSpan answer_span;
  /// Raw gold answer texts, for evaluation.
  std::vector<std::string> gold_answers;

  std::vector<int> document_ids;
  std::vector<int> question_ids;
  std::vector<int> answer_ids;
  std::vector<std::vector<int>> document_chars;
  std::vector<std::vector<int>> question_chars;
  std::vector<std::vector<int>> answer_chars;
};

/// Fills the id fields from the token strings.
void index_example(ProcessedExample& example, const Vocabularies& vocab);

/// Smallest token range covering the answer's byte range, accepted when its
/// tokens (clipped to that range at either edge) match the tokenized answer.
/// Otherwise the tokenized answer is searched for in the document, taking
/// the occurrence nearest `answer_start`.
std::optional<TokenSpan> locate_answer_span(const std::vector<Token>& document,
                                            std::string_view answer_text,
                                            std::size_t answer_start);

/// Tokenizes and locates; nullopt when the answer cannot be found.
std::optional<ProcessedExample> process_example(const RawExample& raw);

struct ValidationSplit {
  std::vector<RawExample> train;
  std::vector<RawExample> validation;
};

/// Moves `n_articles` whole articles, chosen by a seeded shuffle, into the
/// validation side. Example order within each side follows the input.
ValidationSplit split_validation(const std::vector<RawExample>& examples,
                                 std::size_t n_articles, std::uint64_t seed);

struct PreprocessOptions {
  std::size_t validation_articles = 23;
  std::uint64_t seed = 1234;
  std::size_t decoder_vocab_k = 100;
};

struct PreprocessStats {
  std::size_t raw_examples = 0;
  std::size_t kept = 0;
  std::size_t dropped = 0;
  std::size_t train_examples = 0;
  std::size_t validation_examples = 0;
};

struct Corpus {
  PreprocessOptions options;
  PreprocessStats stats;
  Vocabularies vocab;
  std::vector<ProcessedExample> train;
  std::vector<ProcessedExample> validation;
};

/// Split, tokenize, locate spans, build vocabularies and index.
Corpus preprocess(const std::vector<RawExample>& raw, const PreprocessOptions& options);

/// Tokenizes new data against existing vocabularies (unknown words map to
/// <unk>). Unlocatable answers are dropped and counted in `dropped`.
std::vector<ProcessedExample> process_with_vocab(const std::vector<RawExample>& raw,
                                                 const Vocabularies& vocab,
                                                 std::size_t* dropped = nullptr);

/// Versioned JSON cache; ids are rebuilt on load.
std::string serialize_corpus(const Corpus& corpus);
Corpus parse_corpus(std::string_view text, const std::string& source = "<memory>");
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

inline constexpr int kCorpusFormatVersion = 1;

}  // namespace jointgen
