#include "jointgen/dataset.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "jointgen/errors.hpp"
#include "jointgen/log.hpp"
#include "jointgen/random.hpp"

namespace jointgen {

using nlohmann::json;

namespace {

std::vector<int> word_ids(const std::vector<std::string>& words, const Vocabulary& vocab) {
  std::vector<int> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(vocab.id(w));
  return ids;
}

std::vector<std::vector<int>> spellings(const std::vector<std::string>& words,
                                        const CharVocabulary& chars) {
  std::vector<std::vector<int>> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(chars.spell(w));
  return out;
}

std::vector<std::string> texts(const std::vector<Token>& tokens, std::size_t begin,
                               std::size_t end) {
  std::vector<std::string> out;
  for (std::size_t i = begin; i < end; ++i) out.push_back(tokens[i].text);
  return out;
}

}  // namespace

void index_example(ProcessedExample& example, const Vocabularies& vocab) {
  example.document_ids = word_ids(example.document, vocab.encoder);
  example.question_ids = word_ids(example.question, vocab.encoder);
  example.answer_ids = word_ids(example.answer, vocab.encoder);
  example.document_chars = spellings(example.document, vocab.chars);
  example.question_chars = spellings(example.question, vocab.chars);
  example.answer_chars = spellings(example.answer, vocab.chars);
}

std::optional<TokenSpan> locate_answer_span(const std::vector<Token>& document,
                                            std::string_view answer_text,
                                            std::size_t answer_start) {
  const auto answer = tokenize_words(answer_text);
  if (answer.empty() || document.empty()) {
    return std::nullopt;
  }
  const std::size_t a = answer_start;
  const std::size_t e = answer_start + answer_text.size();

  std::size_t first = document.size();
  std::size_t last = document.size();
  for (std::size_t i = 0; i < document.size(); ++i) {
    if (document[i].end > a && document[i].begin < e) {
      if (first == document.size()) first = i;
      last = i;
    }
  }
  if (first < document.size()) {
    if (texts(document, first, last + 1) == answer) {
      return TokenSpan{first, last + 1};
    }
    // Annotation noise: the answer starts or stops inside a token.
    std::vector<std::string> clipped;
    for (std::size_t i = first; i <= last; ++i) {
      const Token& t = document[i];
      const std::size_t lo = std::max(t.begin, a);
      const std::size_t hi = std::min(t.end, e);
      if (hi > lo) clipped.push_back(t.text.substr(lo - t.begin, hi - lo));
    }
    if (clipped == answer) {
      return TokenSpan{first, last + 1};
    }
  }

  std::optional<TokenSpan> best;
  std::size_t best_distance = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i + answer.size() <= document.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < answer.size() && match; ++k) {
      match = document[i + k].text == answer[k];
    }
    if (!match) continue;
    const std::size_t begin = document[i].begin;
    const std::size_t distance = begin > a ? begin - a : a - begin;
    if (distance < best_distance) {
      best_distance = distance;
      best = TokenSpan{i, i + answer.size()};
    }
  }
  return best;
}

std::optional<ProcessedExample> process_example(const RawExample& raw) {
  const auto doc_tokens = tokenize(raw.context);
  const auto span = locate_answer_span(doc_tokens, raw.answer_text, raw.answer_start);
  if (!span) {
    return std::nullopt;
  }
  ProcessedExample ex;
  ex.id = raw.id;
  ex.article_id = raw.article_id;
  ex.document = texts(doc_tokens, 0, doc_tokens.size());
  ex.question = tokenize_words(raw.question);
  ex.answer = texts(doc_tokens, span->begin, span->end);
  ex.answer_span = *span;
  ex.gold_answers = raw.answers;
  if (ex.question.empty()) {
    return std::nullopt;
  }
  return ex;
}

ValidationSplit split_validation(const std::vector<RawExample>& examples,
                                 std::size_t n_articles, std::uint64_t seed) {
  std::vector<std::string> articles;
  std::set<std::string> seen;
  for (const auto& ex : examples) {
    if (seen.insert(ex.article_id).second) articles.push_back(ex.article_id);
  }
  if (articles.size() < n_articles) {
    throw ConfigError(fmt::format("validation split needs {} articles, data has {}",
                                  n_articles, articles.size()));
  }
  Rng rng(seed);
  rng.shuffle(articles);
  const std::set<std::string> held_out(articles.begin(),
                                       articles.begin() + static_cast<std::ptrdiff_t>(n_articles));
  ValidationSplit split;
  for (const auto& ex : examples) {
    (held_out.count(ex.article_id) != 0 ? split.validation : split.train).push_back(ex);
  }
  return split;
}

namespace {

std::vector<ProcessedExample> process_all(const std::vector<RawExample>& raw,
                                          std::size_t& dropped) {
  std::vector<ProcessedExample> out;
  out.reserve(raw.size());
  for (const auto& r : raw) {
    if (auto ex = process_example(r)) {
      out.push_back(std::move(*ex));
    } else {
      ++dropped;
      log_warning(fmt::format("dropping example '{}': answer '{}' not found in its paragraph",
                              r.id, r.answer_text));
    }
  }
  return out;
}

}  // namespace

Corpus preprocess(const std::vector<RawExample>& raw, const PreprocessOptions& options) {
  Corpus corpus;
  corpus.options = options;
  corpus.stats.raw_examples = raw.size();
  const ValidationSplit split = split_validation(raw, options.validation_articles, options.seed);
  std::size_t dropped = 0;
  corpus.train = process_all(split.train, dropped);
  corpus.validation = process_all(split.validation, dropped);
  corpus.stats.dropped = dropped;
  corpus.stats.kept = corpus.train.size() + corpus.validation.size();
  corpus.stats.train_examples = corpus.train.size();
  corpus.stats.validation_examples = corpus.validation.size();
  if (dropped > 0) {
    log_warning(fmt::format("dropped {} of {} examples with unlocatable answers", dropped,
                            raw.size()));
  }

  std::vector<std::vector<std::string>> all_sequences;
  std::vector<std::vector<std::string>> train_sequences;
  std::vector<std::vector<std::string>> train_questions;
  for (const auto* part : {&corpus.train, &corpus.validation}) {
    for (const auto& ex : *part) {
      all_sequences.push_back(ex.document);
      all_sequences.push_back(ex.question);
    }
  }
  for (const auto& ex : corpus.train) {
    train_sequences.push_back(ex.document);
    train_sequences.push_back(ex.question);
    train_questions.push_back(ex.question);
  }
  corpus.vocab.encoder = build_encoder_vocab(all_sequences);
  corpus.vocab.decoder = build_decoder_vocab(train_questions, options.decoder_vocab_k);
  corpus.vocab.chars = build_char_vocab(train_sequences);
  for (auto* part : {&corpus.train, &corpus.validation}) {
    for (auto& ex : *part) index_example(ex, corpus.vocab);
  }
  return corpus;
}

std::vector<ProcessedExample> process_with_vocab(const std::vector<RawExample>& raw,
                                                 const Vocabularies& vocab,
                                                 std::size_t* dropped) {
  std::size_t local = 0;
  auto out = process_all(raw, local);
  for (auto& ex : out) index_example(ex, vocab);
  if (dropped != nullptr) *dropped = local;
  return out;
}

namespace {

json example_to_json(const ProcessedExample& ex) {
  return {{"id", ex.id},
          {"article", ex.article_id},
          {"document", ex.document},
          {"question", ex.question},
          {"answer_span", {ex.answer_span.begin, ex.answer_span.end}},
          {"gold_answers", ex.gold_answers}};
}

ProcessedExample example_from_json(const json& j, const std::string& where) {
  ProcessedExample ex;
  try {
    ex.id = j.at("id").get<std::string>();
    ex.article_id = j.at("article").get<std::string>();
    ex.document = j.at("document").get<std::vector<std::string>>();
    ex.question = j.at("question").get<std::vector<std::string>>();
    const auto span = j.at("answer_span").get<std::vector<std::size_t>>();
    if (span.size() != 2 || span[0] >= span[1] || span[1] > ex.document.size()) {
      throw FormatError(where + ": invalid answer_span");
    }
    ex.answer_span = {span[0], span[1]};
    ex.answer.assign(ex.document.begin() + static_cast<std::ptrdiff_t>(span[0]),
                     ex.document.begin() + static_cast<std::ptrdiff_t>(span[1]));
    ex.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("{}: {}", where, e.what()));
  }
  return ex;
}

}  // namespace

std::string serialize_corpus(const Corpus& corpus) {
  json j;
  j["format"] = "jointgen-corpus";
  j["version"] = kCorpusFormatVersion;
  j["options"] = {{"validation_articles", corpus.options.validation_articles},
                  {"seed", corpus.options.seed},
                  {"decoder_vocab_k", corpus.options.decoder_vocab_k}};
  j["stats"] = {{"raw_examples", corpus.stats.raw_examples},
                {"kept", corpus.stats.kept},
                {"dropped", corpus.stats.dropped},
                {"train_examples", corpus.stats.train_examples},
                {"validation_examples", corpus.stats.validation_examples}};
  j["vocab"] = {{"encoder", corpus.vocab.encoder.words()},
                {"decoder", corpus.vocab.decoder.words()},
                {"chars", corpus.vocab.chars.bytes()}};
  json train = json::array();
  for (const auto& ex : corpus.train) train.push_back(example_to_json(ex));
  json validation = json::array();
  for (const auto& ex : corpus.validation) validation.push_back(example_to_json(ex));
  j["train"] = std::move(train);
  j["validation"] = std::move(validation);
  return j.dump() + "\n";
}

Corpus parse_corpus(std::string_view text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: invalid JSON: {}", source, e.what()));
  }
  if (!j.is_object() || j.value("format", "") != "jointgen-corpus") {
    throw FormatError(source + ": not a jointgen corpus cache");
  }
  if (j.value("version", 0) != kCorpusFormatVersion) {
    throw FormatError(fmt::format("{}: corpus format version {} (this build reads {})", source,
                                  j.value("version", 0), kCorpusFormatVersion));
  }
  Corpus corpus;
  try {
    const auto& o = j.at("options");
    corpus.options.validation_articles = o.at("validation_articles").get<std::size_t>();
    corpus.options.seed = o.at("seed").get<std::uint64_t>();
    corpus.options.decoder_vocab_k = o.at("decoder_vocab_k").get<std::size_t>();
    const auto& s = j.at("stats");
    corpus.stats.raw_examples = s.at("raw_examples").get<std::size_t>();
    corpus.stats.kept = s.at("kept").get<std::size_t>();
    corpus.stats.dropped = s.at("dropped").get<std::size_t>();
    corpus.stats.train_examples = s.at("train_examples").get<std::size_t>();
    corpus.stats.validation_examples = s.at("validation_examples").get<std::size_t>();
    const auto& v = j.at("vocab");
    corpus.vocab.encoder = Vocabulary::from_words(v.at("encoder").get<std::vector<std::string>>());
    corpus.vocab.decoder = Vocabulary::from_words(v.at("decoder").get<std::vector<std::string>>());
    corpus.vocab.chars =
        CharVocabulary::from_bytes(v.at("chars").get<std::vector<unsigned char>>());
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("{}: {}", source, e.what()));
  }
  std::size_t i = 0;
  for (const auto& ex : j.at("train")) {
    corpus.train.push_back(example_from_json(ex, fmt::format("{}: train[{}]", source, i++)));
  }
  i = 0;
  for (const auto& ex : j.at("validation")) {
    corpus.validation.push_back(
        example_from_json(ex, fmt::format("{}: validation[{}]", source, i++)));
  }
  for (auto* part : {&corpus.train, &corpus.validation}) {
    for (auto& ex : *part) index_example(ex, corpus.vocab);
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  write_text_file(path, serialize_corpus(corpus));
}

Corpus load_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_text_file(path), path.string());
}

}  // namespace jointgen
