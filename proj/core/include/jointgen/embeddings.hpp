#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>

#include "jointgen/random.hpp"
#include "jointgen/tensor.hpp"
#include "jointgen/vocabulary.hpp"

namespace jointgen {

struct PretrainedEmbeddings {
  Tensor matrix;  // [vocab.size() x dim]
  std::size_t matched = 0;
  /// Matched share of the regular (non-special) vocabulary words.
  double coverage = 0.0;
};

/// Reads "token v1 ... v_dim" lines. Rows of vocabulary words found in the
/// stream are copied verbatim, every other row is uniform in [-0.1, 0.1].
/// A line with a different number of values raises FormatError.
PretrainedEmbeddings read_pretrained_embeddings(std::istream& in, const Vocabulary& vocab,
                                                std::size_t dim, Rng& rng,
                                                const std::string& source = "<stream>");

PretrainedEmbeddings load_pretrained_embeddings(const std::filesystem::path& path,
                                                const Vocabulary& vocab, std::size_t dim,
                                                Rng& rng);

}  // namespace jointgen
