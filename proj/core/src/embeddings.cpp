#include "jointgen/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "jointgen/errors.hpp"
#include "jointgen/types.hpp"

namespace jointgen {

PretrainedEmbeddings read_pretrained_embeddings(std::istream& in, const Vocabulary& vocab,
                                                std::size_t dim, Rng& rng,
                                                const std::string& source) {
  if (dim == 0) {
    throw ConfigError("embedding dimension must be positive");
  }
  PretrainedEmbeddings out;
  out.matrix = Tensor({vocab.size(), dim});
  for (std::size_t i = 0; i < out.matrix.size(); ++i) {
    out.matrix[i] = rng.uniform(-0.1, 0.1);
  }
  std::vector<bool> seen(vocab.size(), false);
  std::string line;
  std::size_t line_no = 0;
  std::vector<Real> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    values.clear();
    std::string field;
    while (fields >> field) {
      Real v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw FormatError(fmt::format("{}:{}: '{}' is not a number", source, line_no, field));
      }
      values.push_back(v);
    }
    if (values.size() != dim) {
      throw FormatError(fmt::format("{}:{}: expected {} values for '{}', found {}", source,
                                    line_no, dim, token, values.size()));
    }
    const auto id = vocab.find(token);
    if (!id || *id < special::first_regular || seen[static_cast<std::size_t>(*id)]) continue;
    seen[static_cast<std::size_t>(*id)] = true;
    ++out.matched;
    for (std::size_t j = 0; j < dim; ++j) {
      out.matrix.at(static_cast<std::size_t>(*id), j) = values[j];
    }
  }
  const std::size_t regular =
      vocab.size() > static_cast<std::size_t>(special::first_regular)
          ? vocab.size() - static_cast<std::size_t>(special::first_regular)
          : 0;
  out.coverage = regular == 0 ? 0.0 : static_cast<double>(out.matched) / regular;
  return out;
}

PretrainedEmbeddings load_pretrained_embeddings(const std::filesystem::path& path,
                                                const Vocabulary& vocab, std::size_t dim,
                                                Rng& rng) {
  std::ifstream in(path);
  if (!in) {
    throw IoError(fmt::format("cannot open embeddings file '{}'", path.string()));
  }
  return read_pretrained_embeddings(in, vocab, dim, rng, path.string());
}

}  // namespace jointgen
