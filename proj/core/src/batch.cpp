#include "jointgen/batch.hpp"

#include <algorithm>

#include "jointgen/errors.hpp"

namespace jointgen {

std::string_view to_string(Mode mode) {
  return mode == Mode::answer_generation ? "a-gen" : "q-gen";
}

Mode parse_mode(std::string_view text) {
  if (text == "a-gen") return Mode::answer_generation;
  if (text == "q-gen") return Mode::question_generation;
  throw ConfigError("unknown mode '" + std::string(text) + "' (expected a-gen or q-gen)");
}

PaddedIds PaddedIds::from_rows(const std::vector<std::vector<int>>& rows) {
  PaddedIds out;
  out.rows = rows.size();
  for (const auto& r : rows) {
    out.cols = std::max(out.cols, r.size());
  }
  out.ids.assign(out.rows * out.cols, special::pad);
  out.mask.assign(out.rows * out.cols, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out.ids[i * out.cols + j] = rows[i][j];
      out.mask[i * out.cols + j] = 1;
    }
  }
  return out;
}

std::size_t PaddedIds::length(std::size_t r) const {
  const auto m = row_mask(r);
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), 1));
}

ExampleView Batch::row(std::size_t r) const {
  if (r >= size()) {
    throw ContractError("batch row out of range");
  }
  ExampleView v;
  v.mode = mode;
  v.document = document.row(r);
  v.document_chars = document_chars[r];
  v.document_mask = document.row_mask(r);
  v.condition = condition.row(r);
  v.condition_chars = condition_chars[r];
  v.condition_mask = condition.row_mask(r);
  v.answer_span = answer_spans[r];
  v.document_extended = document_extended.row(r);
  v.extended_size = extended_sizes[r];
  v.oov_word_ids = oov_word_ids[r];
  v.oov_words = oov_words[r];
  v.target = target.row(r);
  v.target_words = target_words.row(r);
  v.target_mask = target.row_mask(r);
  return v;
}

}  // namespace jointgen
