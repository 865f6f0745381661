#include "jointgen/report.hpp"

#include <array>
#include <cmath>

#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "jointgen/errors.hpp"
#include "jointgen/tokenizer.hpp"

namespace jointgen {

using nlohmann::json;

std::string serialize_predictions(std::span<const Prediction> predictions) {
  std::string out;
  for (const auto& p : predictions) {
    json j = {{"id", p.id},
              {"mode", std::string(to_string(p.mode))},
              {"text", p.text},
              {"token_logprobs", p.token_logprobs}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Prediction> parse_predictions(std::string_view text, const std::string& source) {
  std::vector<Prediction> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const json j = json::parse(line);
      Prediction p;
      p.id = j.at("id").get<std::string>();
      p.text = j.at("text").get<std::string>();
      if (j.contains("mode")) p.mode = parse_mode(j.at("mode").get<std::string>());
      if (j.contains("token_logprobs")) {
        p.token_logprobs = j.at("token_logprobs").get<std::vector<Real>>();
      }
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("{}:{}: malformed prediction: {}", source, line_no, e.what()));
    } catch (const ConfigError& e) {
      throw ParseError(fmt::format("{}:{}: {}", source, line_no, e.what()));
    }
  }
  return out;
}

void save_predictions(std::span<const Prediction> predictions, const std::filesystem::path& path) {
  write_text_file(path, serialize_predictions(predictions));
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_text_file(path), path.string());
}

bool operator==(const EvalRecord& a, const EvalRecord& b) {
  if (a.id != b.id || a.prediction != b.prediction || a.golds != b.golds || a.em != b.em ||
      a.f1 != b.f1) {
    return false;
  }
  for (int n = 0; n < 4; ++n) {
    if (a.bleu.matches[n] != b.bleu.matches[n] || a.bleu.totals[n] != b.bleu.totals[n]) {
      return false;
    }
  }
  return a.bleu.candidate_length == b.bleu.candidate_length &&
         a.bleu.reference_length == b.bleu.reference_length;
}

void EvalReport::recompute() {
  exact_match.reset();
  f1.reset();
  bleu4.reset();
  if (records.empty()) return;
  if (task == Mode::answer_generation) {
    double em_sum = 0.0, f1_sum = 0.0;
    for (const auto& r : records) {
      em_sum += r.em;
      f1_sum += r.f1;
    }
    const auto n = static_cast<double>(records.size());
    exact_match = 100.0 * em_sum / n;
    f1 = 100.0 * f1_sum / n;
  } else {
    BleuStats total;
    for (const auto& r : records) total += r.bleu;
    bleu4 = 100.0 * bleu_from_stats(total);
  }
}

namespace {

std::string optional_field(const std::optional<double>& v) {
  return v ? fmt::format("{:.6f}", *v) : std::string("-");
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', pos);
    out.emplace_back(line.substr(pos, tab == std::string_view::npos ? line.npos : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return out;
}

constexpr std::string_view kReportMagic = "jointgen-report 1";
constexpr std::string_view kRecordHeader =
    "id\tem\tf1\tm1\tm2\tm3\tm4\tt1\tt2\tt3\tt4\tcand_len\tref_len\tprediction\tgolds";

}  // namespace

std::string serialize_report(const EvalReport& report) {
  std::string out;
  out += kReportMagic;
  out += '\n';
  out += fmt::format("task\t{}\n", to_string(report.task));
  out += fmt::format("examples\t{}\n", report.records.size());
  out += fmt::format("missing\t{}\n", json(report.missing).dump());
  out += fmt::format("exact_match\t{}\n", optional_field(report.exact_match));
  out += fmt::format("f1\t{}\n", optional_field(report.f1));
  out += fmt::format("bleu4\t{}\n", optional_field(report.bleu4));
  out += fmt::format("qa_f1\t{}\n", optional_field(report.qa_f1));
  out += fmt::format("perplexity\t{}\n", optional_field(report.perplexity));
  out += '\n';
  out += kRecordHeader;
  out += '\n';
  for (const auto& r : report.records) {
    const auto& b = r.bleu;
    out += fmt::format("{}\t{}\t{:.17g}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                       json(r.id).dump(), r.em, r.f1, b.matches[0], b.matches[1],
                       b.matches[2], b.matches[3], b.totals[0], b.totals[1], b.totals[2],
                       b.totals[3], b.candidate_length, b.reference_length,
                       json(r.prediction).dump(), json(r.golds).dump());
  }
  return out;
}

EvalReport parse_report(std::string_view text, const std::string& source) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) {
    return ParseError(fmt::format("{}:{}: {}", source, line_no, what));
  };
  const auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  };
  if (!next_line() || line != kReportMagic) throw fail("not a jointgen report");
  EvalReport report;
  std::map<std::string, std::string> fields;
  while (next_line() && !line.empty()) {
    const auto parts = split_tabs(line);
    if (parts.size() != 2) throw fail("expected key<TAB>value");
    fields[parts[0]] = parts[1];
  }
  const auto need = [&](const std::string& key) -> const std::string& {
    const auto it = fields.find(key);
    if (it == fields.end()) throw fail(fmt::format("missing aggregate '{}'", key));
    return it->second;
  };
  const auto number = [&](const std::string& key) -> std::optional<double> {
    const std::string& v = need(key);
    if (v == "-") return std::nullopt;
    try {
      return std::stod(v);
    } catch (const std::exception&) {
      throw fail(fmt::format("'{}' is not a number", key));
    }
  };
  try {
    report.task = parse_mode(need("task"));
    report.missing = json::parse(need("missing")).get<std::vector<std::string>>();
    report.exact_match = number("exact_match");
    report.f1 = number("f1");
    report.bleu4 = number("bleu4");
    report.qa_f1 = number("qa_f1");
    report.perplexity = number("perplexity");
    if (!next_line() || line != kRecordHeader) throw fail("missing record header");
    while (next_line()) {
      if (line.empty()) continue;
      const auto parts = split_tabs(line);
      if (parts.size() != 15) throw fail("expected 15 record fields");
      EvalRecord r;
      r.id = json::parse(parts[0]).get<std::string>();
      r.em = std::stoi(parts[1]);
      r.f1 = std::stod(parts[2]);
      for (int n = 0; n < 4; ++n) {
        r.bleu.matches[n] = std::stoul(parts[3 + n]);
        r.bleu.totals[n] = std::stoul(parts[7 + n]);
      }
      r.bleu.candidate_length = std::stoul(parts[11]);
      r.bleu.reference_length = std::stoul(parts[12]);
      r.prediction = json::parse(parts[13]).get<std::string>();
      r.golds = json::parse(parts[14]).get<std::vector<std::string>>();
      report.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw fail(e.what());
  } catch (const std::invalid_argument&) {
    throw fail("bad number");
  } catch (const std::out_of_range&) {
    throw fail("number out of range");
  } catch (const ConfigError& e) {
    throw fail(e.what());
  }
  const std::size_t declared = std::stoul(need("examples"));
  if (declared != report.records.size()) {
    throw fail(fmt::format("{} examples declared, {} listed", declared, report.records.size()));
  }
  // Printed aggregates are rounded; keep the exact values from the records.
  const auto printed = std::array{report.exact_match, report.f1, report.bleu4};
  report.recompute();
  const auto exact = std::array{report.exact_match, report.f1, report.bleu4};
  for (std::size_t k = 0; k < printed.size(); ++k) {
    const bool agree = printed[k].has_value() == exact[k].has_value() &&
                       (!printed[k] || std::abs(*printed[k] - *exact[k]) <= 1e-6);
    if (!agree) throw FormatError(source + ": aggregates disagree with the listed records");
  }
  return report;
}

EvalReport evaluate_run(std::span<const Prediction> predictions,
                        std::span<const RawExample> gold, Mode task, bool allow_missing) {
  std::map<std::string, const RawExample*> by_id;
  for (const auto& g : gold) by_id.emplace(g.id, &g);
  EvalReport report;
  report.task = task;
  std::map<std::string, bool> predicted;
  for (const auto& p : predictions) {
    const auto it = by_id.find(p.id);
    if (it == by_id.end()) {
      report.missing.push_back(p.id);
      continue;
    }
    predicted[p.id] = true;
    const RawExample& g = *it->second;
    EvalRecord r;
    r.id = p.id;
    r.prediction = p.text;
    if (task == Mode::answer_generation) {
      r.golds = g.answers.empty() ? std::vector<std::string>{g.answer_text} : g.answers;
      r.em = exact_match(p.text, r.golds);
      r.f1 = token_f1(p.text, r.golds);
    } else {
      r.golds = {join_tokens(tokenize_words(g.question))};
      r.bleu = bleu_stats(tokenize_words(p.text), split_whitespace(r.golds.front()));
    }
    report.records.push_back(std::move(r));
  }
  for (const auto& g : gold) {
    if (!predicted.count(g.id)) report.missing.push_back(g.id);
  }
  if (!report.missing.empty() && !allow_missing) {
    std::string listed;
    for (std::size_t i = 0; i < report.missing.size() && i < 10; ++i) {
      listed += (i ? ", " : "") + report.missing[i];
    }
    throw FormatError(fmt::format("{} unmatched ids between predictions and gold data: {}{}",
                                  report.missing.size(), listed,
                                  report.missing.size() > 10 ? ", ..." : ""));
  }
  report.recompute();
  return report;
}

}  // namespace jointgen
