#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "jointgen/squad.hpp"

namespace jointgen {

struct SyntheticOptions {
  std::size_t examples = 32;
  std::size_t examples_per_article = 8;
  /// Facts per paragraph; every question asks about one of them.
  std::size_t facts_per_paragraph = 3;
  std::uint64_t seed = 7;
};

/// Templated reading-comprehension data: paragraphs of short biographical
/// facts about invented people and organisations, each question answerable
/// by a span. Entity names are drawn from syllables, so most answers are
/// rare words that must be copied from the paragraph.
std::vector<RawExample> generate_synthetic(const SyntheticOptions& options);

}  // namespace jointgen
