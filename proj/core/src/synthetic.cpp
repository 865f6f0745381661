#include "jointgen/synthetic.hpp"

#include <array>
#include <set>
#include <string>

#include <fmt/format.h>

#include "jointgen/errors.hpp"
#include "jointgen/random.hpp"

namespace jointgen {

namespace {

constexpr std::array kOnsets = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r",
                                "s", "t", "v", "z", "br", "tr", "st", "kl"};
constexpr std::array kVowels = {"a", "e", "i", "o", "u", "ai", "ou"};
constexpr std::array kProfessions = {"teacher", "painter", "engineer", "doctor",
                                     "lawyer", "farmer", "sailor", "chemist"};
constexpr std::array kFields = {"music", "physics", "history", "medicine", "poetry",
                                "geology", "botany", "astronomy"};

std::string syllables(Rng& rng, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    out += kOnsets[rng.below(kOnsets.size())];
    out += kVowels[rng.below(kVowels.size())];
  }
  return out;
}

std::string capitalized(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

struct Person {
  std::string name;
  std::string city;
  std::string year;
  std::string profession;
  std::string field;
  std::string company;
};

struct Fact {
  std::string sentence;
  std::string answer;
  std::string question;
};

// The answer is always the one span marked with braces in the sentence.
Fact make_fact(std::size_t kind, const Person& p, Rng& rng) {
  switch (kind) {
    case 0:
      return {fmt::format("{} was born in {{{}}} .", p.name, p.city), p.city,
              rng.bernoulli(0.5) ? fmt::format("where was {} born ?", p.name)
                                 : fmt::format("in which city was {} born ?", p.name)};
    case 1:
      return {fmt::format("{} moved to the capital in {{{}}} .", p.name, p.year), p.year,
              fmt::format("in what year did {} move to the capital ?", p.name)};
    case 2:
      return {fmt::format("{} worked as a {{{}}} for many years .", p.name, p.profession),
              p.profession, fmt::format("what did {} work as ?", p.name)};
    case 3:
      return {fmt::format("{} later studied {{{}}} at the academy .", p.name, p.field), p.field,
              fmt::format("what did {} study at the academy ?", p.name)};
    default:
      return {fmt::format("{} founded the firm {{{}}} .", p.name, p.company), p.company,
              fmt::format("which firm did {} found ?", p.name)};
  }
}

}  // namespace

std::vector<RawExample> generate_synthetic(const SyntheticOptions& options) {
  if (options.examples_per_article == 0 || options.facts_per_paragraph == 0 ||
      options.facts_per_paragraph > 5) {
    throw ConfigError("synthetic data needs 1..5 facts per paragraph and nonempty articles");
  }
  Rng rng(options.seed);
  std::set<std::string> used_names;
  const auto fresh = [&](std::size_t n) {
    for (;;) {
      std::string s = syllables(rng, n);
      if (used_names.insert(s).second) return s;
    }
  };
  std::vector<RawExample> out;
  out.reserve(options.examples);
  for (std::size_t i = 0; i < options.examples; ++i) {
    Person person;
    person.name = capitalized(fresh(2)) + " " + capitalized(fresh(3));
    person.city = capitalized(fresh(2 + rng.below(2)));
    person.year = std::to_string(1700 + rng.below(300));
    person.profession = kProfessions[rng.below(kProfessions.size())];
    person.field = kFields[rng.below(kFields.size())];
    person.company = capitalized(fresh(2)) + "co";

    std::array<std::size_t, 5> kinds = {0, 1, 2, 3, 4};
    rng.shuffle(std::span<std::size_t>(kinds));
    std::vector<Fact> facts;
    for (std::size_t f = 0; f < options.facts_per_paragraph; ++f) {
      facts.push_back(make_fact(kinds[f], person, rng));
    }
    const std::size_t asked = rng.below(facts.size());

    RawExample ex;
    ex.id = fmt::format("syn-{:05}", i);
    ex.article_id = fmt::format("synthetic-{:04}", i / options.examples_per_article);
    for (std::size_t f = 0; f < facts.size(); ++f) {
      if (!ex.context.empty()) ex.context += ' ';
      const std::string& s = facts[f].sentence;
      const std::size_t open = s.find('{');
      const std::size_t close = s.find('}');
      if (f == asked) ex.answer_start = ex.context.size() + open;
      ex.context += s.substr(0, open) + s.substr(open + 1, close - open - 1) +
                    s.substr(close + 1);
    }
    ex.question = capitalized(facts[asked].question);
    ex.answer_text = facts[asked].answer;
    ex.answers = {ex.answer_text};
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace jointgen
