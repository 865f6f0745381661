#include "jointgen/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <fmt/format.h>
#include <json.hpp>

#include "jointgen/errors.hpp"
#include "jointgen/squad.hpp"

namespace jointgen {

using json = nlohmann::json;

namespace {

constexpr char kMagic[4] = {'J', 'G', 'C', 'K'};

static_assert(sizeof(float) == 4);

template <class T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
  }
}

template <class T>
T get_le(std::string_view bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return static_cast<T>(v);
}

json config_to_json(const ModelConfig& c) {
  return {{"word_emb_dim", c.word_emb_dim},
          {"char_emb_dim", c.char_emb_dim},
          {"char_hidden_dim", c.char_hidden_dim},
          {"rnn_hidden_dim", c.rnn_hidden_dim},
          {"mlp_hidden_dim", c.mlp_hidden_dim},
          {"mode_emb_dim", c.mode_emb_dim},
          {"dropout", c.dropout},
          {"init_scale", c.init_scale},
          {"encoder_vocab_size", c.encoder_vocab_size},
          {"char_vocab_size", c.char_vocab_size},
          {"decoder_vocab_size", c.decoder_vocab_size}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.word_emb_dim = j.at("word_emb_dim").get<std::size_t>();
  c.char_emb_dim = j.at("char_emb_dim").get<std::size_t>();
  c.char_hidden_dim = j.at("char_hidden_dim").get<std::size_t>();
  c.rnn_hidden_dim = j.at("rnn_hidden_dim").get<std::size_t>();
  c.mlp_hidden_dim = j.at("mlp_hidden_dim").get<std::size_t>();
  c.mode_emb_dim = j.at("mode_emb_dim").get<std::size_t>();
  c.dropout = j.at("dropout").get<Real>();
  c.init_scale = j.at("init_scale").get<Real>();
  c.encoder_vocab_size = j.at("encoder_vocab_size").get<std::size_t>();
  c.char_vocab_size = j.at("char_vocab_size").get<std::size_t>();
  c.decoder_vocab_size = j.at("decoder_vocab_size").get<std::size_t>();
  return c;
}

}  // namespace

Checkpoint snapshot(const JointModel& model, const Vocabularies& vocab,
                    std::map<std::string, std::string> metadata) {
  Checkpoint ck;
  ck.config = model.config();
  ck.vocab = vocab;
  ck.metadata = std::move(metadata);
  for (const auto& p : model.parameters()) {
    ck.parameters.emplace_back(p->name, p->value);
  }
  return ck;
}

std::string serialize_checkpoint(const Checkpoint& ck) {
  json header;
  header["config"] = config_to_json(ck.config);
  header["encoder_vocab"] = ck.vocab.encoder.words();
  header["decoder_vocab"] = ck.vocab.decoder.words();
  header["char_bytes"] = ck.vocab.chars.bytes();
  header["metadata"] = ck.metadata;
  json params = json::array();
  for (const auto& [name, tensor] : ck.parameters) {
    params.push_back({{"name", name}, {"shape", tensor.shape()}});
  }
  header["parameters"] = std::move(params);
  const std::string text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, text.size());
  out += text;
  for (const auto& [name, tensor] : ck.parameters) {
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(tensor[i])));
    }
  }
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes, const std::string& source) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError(fmt::format("{}: not a jointgen checkpoint", source));
  }
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kCheckpointVersion) {
    throw FormatError(fmt::format("{}: checkpoint format version {} is not supported (expected {})",
                                  source, version, kCheckpointVersion));
  }
  const auto header_size = get_le<std::uint64_t>(bytes, 8);
  if (header_size > bytes.size() - 16) {
    throw FormatError(fmt::format("{}: truncated checkpoint header", source));
  }
  Checkpoint ck;
  std::size_t offset = 16 + header_size;
  try {
    const json header = json::parse(bytes.substr(16, header_size));
    ck.config = config_from_json(header.at("config"));
    ck.vocab.encoder =
        Vocabulary::from_words(header.at("encoder_vocab").get<std::vector<std::string>>());
    ck.vocab.decoder =
        Vocabulary::from_words(header.at("decoder_vocab").get<std::vector<std::string>>());
    ck.vocab.chars =
        CharVocabulary::from_bytes(header.at("char_bytes").get<std::vector<unsigned char>>());
    ck.metadata = header.at("metadata").get<std::map<std::string, std::string>>();
    for (const auto& p : header.at("parameters")) {
      Tensor t(p.at("shape").get<Shape>());
      if (bytes.size() - offset < 4 * t.size()) {
        throw FormatError(fmt::format("{}: truncated values for '{}'", source,
                                      p.at("name").get<std::string>()));
      }
      for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = std::bit_cast<float>(get_le<std::uint32_t>(bytes, offset));
        offset += 4;
      }
      ck.parameters.emplace_back(p.at("name").get<std::string>(), std::move(t));
    }
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("{}: malformed checkpoint header: {}", source, e.what()));
  } catch (const DimensionError& e) {
    throw FormatError(fmt::format("{}: {}", source, e.what()));
  }
  if (offset != bytes.size()) {
    throw FormatError(fmt::format("{}: {} trailing bytes", source, bytes.size() - offset));
  }
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_text_file(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_text_file(path), path.string());
}

void restore(JointModel& model, const Checkpoint& checkpoint) {
  std::map<std::string, const Tensor*> stored;
  for (const auto& [name, tensor] : checkpoint.parameters) stored[name] = &tensor;
  if (stored.size() != model.parameters().size()) {
    throw FormatError(fmt::format("checkpoint holds {} parameters, model has {}", stored.size(),
                                  model.parameters().size()));
  }
  for (auto& p : model.parameters()) {
    const auto it = stored.find(p->name);
    if (it == stored.end()) {
      throw FormatError(fmt::format("checkpoint is missing parameter '{}'", p->name));
    }
    if (it->second->shape() != p->value.shape()) {
      throw FormatError(fmt::format("parameter '{}': checkpoint shape {} vs model shape {}",
                                    p->name, shape_to_string(it->second->shape()),
                                    shape_to_string(p->value.shape())));
    }
    p->value = *it->second;
  }
}

std::unique_ptr<JointModel> instantiate(const Checkpoint& checkpoint) {
  std::unique_ptr<JointModel> model;
  try {
    model = std::make_unique<JointModel>(checkpoint.config);
  } catch (const ConfigError& e) {
    throw FormatError(fmt::format("checkpoint config is invalid: {}", e.what()));
  }
  restore(*model, checkpoint);
  return model;
}

}  // namespace jointgen
