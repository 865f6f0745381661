#include "jointgen/squad.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "jointgen/errors.hpp"

namespace jointgen {

using nlohmann::json;

std::size_t utf8_byte_offset(std::string_view text, std::size_t codepoint) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if ((c & 0xC0) == 0x80) continue;  // continuation byte
    if (seen == codepoint) return i;
    ++seen;
  }
  return text.size();
}

std::size_t utf8_codepoint_index(std::string_view text, std::size_t byte_offset) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < byte_offset && i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) ++seen;
  }
  return seen;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

namespace {

const json& field(const json& node, const char* key, const std::string& where,
                  const std::string& source) {
  if (!node.is_object()) {
    throw ParseError(fmt::format("{}: {} is not an object", source, where));
  }
  auto it = node.find(key);
  if (it == node.end()) {
    throw ParseError(fmt::format("{}: {}: missing field '{}'", source, where, key));
  }
  return *it;
}

const json& array_field(const json& node, const char* key, const std::string& where,
                        const std::string& source) {
  const json& value = field(node, key, where, source);
  if (!value.is_array()) {
    throw ParseError(fmt::format("{}: {}.{} is not an array", source, where, key));
  }
  return value;
}

std::string string_field(const json& node, const char* key, const std::string& where,
                         const std::string& source) {
  const json& value = field(node, key, where, source);
  if (!value.is_string()) {
    throw ParseError(fmt::format("{}: {}.{} is not a string", source, where, key));
  }
  return value.get<std::string>();
}

}  // namespace

std::vector<RawExample> parse_squad(std::string_view json_text, const std::string& source) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: invalid JSON: {}", source, e.what()));
  }
  std::vector<RawExample> out;
  const json& data = array_field(root, "data", "$", source);
  for (std::size_t a = 0; a < data.size(); ++a) {
    const std::string article_path = fmt::format("data[{}]", a);
    const json& article = data[a];
    std::string article_id = fmt::format("article-{}", a);
    if (article.is_object() && article.contains("title") && article["title"].is_string()) {
      article_id = article["title"].get<std::string>();
    }
    const json& paragraphs = array_field(article, "paragraphs", article_path, source);
    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
      const std::string para_path = fmt::format("{}.paragraphs[{}]", article_path, p);
      const std::string context = string_field(paragraphs[p], "context", para_path, source);
      const json& qas = array_field(paragraphs[p], "qas", para_path, source);
      for (std::size_t q = 0; q < qas.size(); ++q) {
        const std::string qa_path = fmt::format("{}.qas[{}]", para_path, q);
        RawExample ex;
        ex.article_id = article_id;
        ex.context = context;
        ex.question = string_field(qas[q], "question", qa_path, source);
        ex.id = string_field(qas[q], "id", qa_path, source);
        const json& answers = array_field(qas[q], "answers", qa_path, source);
        if (answers.empty()) {
          throw ParseError(fmt::format("{}: {}.answers is empty", source, qa_path));
        }
        for (std::size_t k = 0; k < answers.size(); ++k) {
          const std::string ans_path = fmt::format("{}.answers[{}]", qa_path, k);
          ex.answers.push_back(string_field(answers[k], "text", ans_path, source));
          const json& start = field(answers[k], "answer_start", ans_path, source);
          if (!start.is_number_integer() || start.get<long long>() < 0) {
            throw ParseError(fmt::format("{}: {}.answer_start is not a nonnegative integer",
                                         source, ans_path));
          }
          if (k == 0) {
            ex.answer_text = ex.answers.front();
            ex.answer_start =
                utf8_byte_offset(context, static_cast<std::size_t>(start.get<long long>()));
          }
        }
        out.push_back(std::move(ex));
      }
    }
  }
  return out;
}

std::vector<RawExample> load_squad(const std::filesystem::path& path) {
  return parse_squad(read_text_file(path), path.string());
}

std::string to_squad_json(const std::vector<RawExample>& examples) {
  json data = json::array();
  std::map<std::string, std::size_t> article_index;
  for (const auto& ex : examples) {
    auto it = article_index.find(ex.article_id);
    if (it == article_index.end()) {
      it = article_index.emplace(ex.article_id, data.size()).first;
      data.push_back({{"title", ex.article_id}, {"paragraphs", json::array()}});
    }
    json answers = json::array();
    answers.push_back({{"text", ex.answer_text},
                       {"answer_start", utf8_codepoint_index(ex.context, ex.answer_start)}});
    for (std::size_t k = 1; k < ex.answers.size(); ++k) {
      const auto pos = ex.context.find(ex.answers[k]);
      answers.push_back(
          {{"text", ex.answers[k]},
           {"answer_start", pos == std::string::npos
                                ? std::size_t{0}
                                : utf8_codepoint_index(ex.context, pos)}});
    }
    json qa = {{"id", ex.id}, {"question", ex.question}, {"answers", answers}};
    data[it->second]["paragraphs"].push_back(
        {{"context", ex.context}, {"qas", json::array({qa})}});
  }
  return json({{"version", "1.1"}, {"data", data}}).dump(1) + "\n";
}

}  // namespace jointgen
