#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "jointgen/checkpoint.hpp"
#include "jointgen/dataset.hpp"
#include "jointgen/embeddings.hpp"
#include "jointgen/errors.hpp"
#include "jointgen/inference.hpp"
#include "jointgen/log.hpp"
#include "jointgen/report.hpp"
#include "jointgen/squad.hpp"
#include "jointgen/synthetic.hpp"
#include "jointgen/training.hpp"
#include "jointgen/batching.hpp"

namespace jointgen::cli {

namespace fs = std::filesystem;

namespace {

struct PreprocessArgs {
  std::string data;
  std::string out;
  std::size_t val_articles = 23;
  std::uint64_t seed = 1234;
  std::size_t decoder_vocab = 100;
};

struct SynthArgs {
  std::string out;
  std::size_t examples = 32;
  std::size_t per_article = 8;
  std::size_t facts = 3;
  std::uint64_t seed = 7;
};

struct TrainArgs {
  std::string cache;
  std::string out;
  std::string embeddings;
  std::string mode = "joint";
  std::size_t batch_size = 32;
  double lr = 2e-4;
  double lr_decay = 0.5;
  std::size_t patience = 2;
  double dropout = 0.3;
  double clip = 5.0;
  std::size_t max_epochs = 20;
  std::uint64_t seed = 1234;
  bool abstractive = false;
  ModelConfig model;
};

struct DataSource {
  std::string data;
  std::string cache;
  std::string split = "val";
};

struct GenerateArgs {
  std::string checkpoint;
  DataSource source;
  std::string mode;
  std::optional<std::size_t> beam_width;
  std::optional<std::size_t> max_len;
  bool no_repeat_filter = false;
  bool abstractive = false;
  std::string out;
};

struct EvaluateArgs {
  std::string predictions;
  DataSource source;
  std::string mode;
  bool allow_missing = false;
  std::string out;
};

struct InspectArgs {
  std::string checkpoint;
  std::string cache;
  bool parameters = false;
};

void add_source_options(CLI::App* cmd, DataSource& source) {
  auto* data = cmd->add_option("--data", source.data, "SQuAD v1.1 JSON file")
                   ->check(CLI::ExistingFile);
  auto* cache = cmd->add_option("--cache", source.cache, "Preprocessed dataset file")
                    ->check(CLI::ExistingFile);
  data->excludes(cache);
  cmd->add_option("--split", source.split, "Split of the cache to use")
      ->check(CLI::IsMember({"train", "val"}))
      ->capture_default_str();
}

std::vector<ProcessedExample> select_split(const Corpus& corpus, const std::string& split) {
  return split == "train" ? corpus.train : corpus.validation;
}

void write_sidecar(const fs::path& artifact, const std::string& resolved) {
  write_text_file(fs::path(artifact.string() + ".config"), resolved);
}

int cmd_preprocess(const PreprocessArgs& a, std::ostream& out) {
  const auto raw = load_squad(a.data);
  PreprocessOptions options;
  options.validation_articles = a.val_articles;
  options.seed = a.seed;
  options.decoder_vocab_k = a.decoder_vocab;
  const Corpus corpus = preprocess(raw, options);
  save_corpus(corpus, a.out);
  out << fmt::format("examples {}\nkept {}\ndropped {}\ntrain {}\nvalidation {}\n",
                     corpus.stats.raw_examples, corpus.stats.kept, corpus.stats.dropped,
                     corpus.stats.train_examples, corpus.stats.validation_examples);
  out << fmt::format("encoder_vocab {}\ndecoder_vocab {}\nchar_vocab {}\n",
                     corpus.vocab.encoder.size(), corpus.vocab.decoder.size(),
                     corpus.vocab.chars.size());
  return kSuccess;
}

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SyntheticOptions options;
  options.examples = a.examples;
  options.examples_per_article = a.per_article;
  options.facts_per_paragraph = a.facts;
  options.seed = a.seed;
  const auto examples = generate_synthetic(options);
  write_text_file(a.out, to_squad_json(examples));
  out << fmt::format("wrote {} examples to {}\n", examples.size(), a.out);
  return kSuccess;
}

int cmd_train(const TrainArgs& a, const std::string& resolved, std::ostream& out) {
  TrainingConfig tc;
  tc.batch_size = a.batch_size;
  tc.initial_lr = a.lr;
  tc.lr_decay = a.lr_decay;
  tc.decay_patience = a.patience;
  tc.dropout = a.dropout;
  tc.clip_norm = a.clip;
  tc.max_epochs = a.max_epochs;
  tc.seed = a.seed;
  tc.mode_set = parse_mode_set(a.mode);
  tc.extractive = !a.abstractive;
  tc.prefetch = prefetch_from_environment();
  tc.validate();

  const Corpus corpus = load_corpus(a.cache);
  ModelConfig mc = a.model;
  mc.dropout = a.dropout;
  mc.encoder_vocab_size = corpus.vocab.encoder.size();
  mc.decoder_vocab_size = corpus.vocab.decoder.size();
  mc.char_vocab_size = corpus.vocab.chars.size();
  mc.validate();

  JointModel model(mc);
  Rng init_rng(derive_seed(a.seed, 1));
  model.initialize(init_rng);
  if (!a.embeddings.empty()) {
    Rng emb_rng(derive_seed(a.seed, 2));
    const auto pre =
        load_pretrained_embeddings(a.embeddings, corpus.vocab.encoder, mc.word_emb_dim, emb_rng);
    model.encoder_weights().word_embedding->value = pre.matrix;
    out << fmt::format("embeddings: {} of {} words covered ({:.1f}%)\n", pre.matched,
                       corpus.vocab.encoder.size() - special::first_regular,
                       100.0 * pre.coverage);
  }

  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);
  write_text_file(out_dir / "config.txt", resolved);
  FitOptions options;
  options.out_dir = out_dir;
  options.metadata = {{"command", "train"},
                      {"mode", a.mode},
                      {"seed", std::to_string(a.seed)},
                      {"config", resolved}};
  options.on_epoch = [&](const EpochRecord& r) {
    std::string line = fmt::format("epoch {} lr {:.6g}", r.epoch, r.lr);
    for (const auto& [mode, loss] : r.train_loss) {
      line += fmt::format(" train[{}] {:.4f}", to_string(mode), loss);
    }
    for (const auto& [mode, loss] : r.validation_loss) {
      line += fmt::format(" val[{}] {:.4f}", to_string(mode), loss);
    }
    out << line << '\n';
  };
  const FitResult result =
      fit(model, corpus.vocab, corpus.train, corpus.validation, tc, options);
  out << fmt::format("trained {} epochs, {} updates, final lr {:.6g}", result.epochs.size(),
                     result.optimizer_steps, result.final_lr);
  if (result.best_epoch) out << fmt::format(", best epoch {}", *result.best_epoch);
  out << '\n';
  return kSuccess;
}

std::vector<ProcessedExample> generation_inputs(const DataSource& source,
                                                const Vocabularies& vocab) {
  if (!source.cache.empty()) {
    const Corpus corpus = load_corpus(source.cache);
    if (!(corpus.vocab == vocab)) {
      throw FormatError(fmt::format("vocabularies of '{}' do not match the checkpoint",
                                    source.cache));
    }
    return select_split(corpus, source.split);
  }
  std::size_t dropped = 0;
  auto examples = process_with_vocab(load_squad(source.data), vocab, &dropped);
  if (dropped > 0) log_warning(fmt::format("{} examples without a locatable answer", dropped));
  return examples;
}

int cmd_generate(const GenerateArgs& a, const std::string& resolved, std::ostream& out) {
  const Mode mode = parse_mode(a.mode);
  InferenceConfig config = InferenceConfig::defaults(mode);
  if (a.beam_width) config.beam_width = *a.beam_width;
  if (a.max_len) config.max_len = *a.max_len;
  config.repetition_filter = !a.no_repeat_filter;
  config.validate();
  if (mode == Mode::answer_generation && config.beam_width > 1) {
    log_warning("a-gen decodes greedily; --beam-width is ignored");
  }

  const Checkpoint checkpoint = load_checkpoint(a.checkpoint);
  const auto model = instantiate(checkpoint);
  const auto examples = generation_inputs(a.source, checkpoint.vocab);
  if (examples.empty()) throw FormatError("no examples to decode");
  log_info(fmt::format("generate: mode {}, {} examples, {}, max_len {}", to_string(mode),
                       examples.size(),
                       mode == Mode::answer_generation
                           ? std::string("greedy")
                           : fmt::format("beam width {}", config.beam_width),
                       config.max_len));
  const auto predictions =
      generate_predictions(*model, checkpoint.vocab, examples, config, !a.abstractive);
  save_predictions(predictions, a.out);
  write_sidecar(a.out, resolved);
  out << fmt::format("wrote {} predictions to {}\n", predictions.size(), a.out);
  return kSuccess;
}

std::vector<RawExample> evaluation_golds(const DataSource& source) {
  if (!source.data.empty()) return load_squad(source.data);
  const Corpus corpus = load_corpus(source.cache);
  std::vector<RawExample> golds;
  for (const auto& ex : select_split(corpus, source.split)) {
    RawExample g;
    g.id = ex.id;
    g.article_id = ex.article_id;
    g.question = join_tokens(ex.question);
    g.answers = ex.gold_answers;
    g.answer_text = ex.gold_answers.empty() ? join_tokens(ex.answer) : ex.gold_answers.front();
    golds.push_back(std::move(g));
  }
  return golds;
}

int cmd_evaluate(const EvaluateArgs& a, const std::string& resolved, std::ostream& out) {
  const Mode mode = parse_mode(a.mode);
  const auto predictions = load_predictions(a.predictions);
  const auto golds = evaluation_golds(a.source);
  const EvalReport report = evaluate_run(predictions, golds, mode, a.allow_missing);
  if (!report.missing.empty()) {
    log_warning(fmt::format("{} unmatched ids skipped", report.missing.size()));
  }
  out << fmt::format("examples {}\n", report.records.size());
  if (report.exact_match) out << fmt::format("EM {:.1f}\n", *report.exact_match);
  if (report.f1) out << fmt::format("F1 {:.1f}\n", *report.f1);
  if (report.bleu4) out << fmt::format("BLEU_4 {:.1f}\n", *report.bleu4);
  if (!a.out.empty()) {
    write_text_file(a.out, serialize_report(report));
    write_sidecar(a.out, resolved);
  }
  return kSuccess;
}

int cmd_inspect(const InspectArgs& a, std::ostream& out) {
  if (a.checkpoint.empty() && a.cache.empty()) {
    throw ConfigError("inspect needs --checkpoint or --cache");
  }
  if (!a.checkpoint.empty()) {
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    const ModelConfig& c = ck.config;
    out << fmt::format("checkpoint {}\nformat_version {}\n", a.checkpoint, kCheckpointVersion);
    out << fmt::format(
        "word_emb_dim {}\nchar_emb_dim {}\nchar_hidden_dim {}\nrnn_hidden_dim {}\n"
        "mlp_hidden_dim {}\nmode_emb_dim {}\nencoder_vocab {}\ndecoder_vocab {}\nchar_vocab {}\n",
        c.word_emb_dim, c.char_emb_dim, c.char_hidden_dim, c.rnn_hidden_dim, c.mlp_hidden_dim,
        c.mode_emb_dim, c.encoder_vocab_size, c.decoder_vocab_size, c.char_vocab_size);
    std::size_t values = 0;
    for (const auto& [name, t] : ck.parameters) values += t.size();
    out << fmt::format("parameters {}\nvalues {}\n", ck.parameters.size(), values);
    for (const auto& [key, value] : ck.metadata) {
      if (key != "config") out << fmt::format("meta.{} {}\n", key, value);
    }
    if (a.parameters) {
      for (const auto& [name, t] : ck.parameters) {
        out << fmt::format("  {} {}\n", name, shape_to_string(t.shape()));
      }
    }
  }
  if (!a.cache.empty()) {
    const Corpus corpus = load_corpus(a.cache);
    out << fmt::format("cache {}\ntrain {}\nvalidation {}\ndropped {}\nseed {}\n", a.cache,
                       corpus.train.size(), corpus.validation.size(), corpus.stats.dropped,
                       corpus.options.seed);
    out << fmt::format("encoder_vocab {}\ndecoder_vocab {}\nchar_vocab {}\n",
                       corpus.vocab.encoder.size(), corpus.vocab.decoder.size(),
                       corpus.vocab.chars.size());
  }
  return kSuccess;
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Appends settings from the subcommand's --config file for every option the
// command line leaves unset.
std::vector<std::string> apply_config_file(CLI::App& app, const std::vector<std::string>& args) {
  std::vector<std::string> out = args;
  CLI::App* cmd = nullptr;
  std::size_t cmd_pos = 0;
  for (std::size_t i = 0; i < args.size() && cmd == nullptr; ++i) {
    for (auto* sub : app.get_subcommands({})) {
      if (sub->get_name() == args[i]) {
        cmd = sub;
        cmd_pos = i;
      }
    }
  }
  if (cmd == nullptr || cmd->get_option_no_throw("--config") == nullptr) return out;
  std::string path;
  for (std::size_t i = cmd_pos + 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return out;
  if (!fs::is_regular_file(path)) {
    throw ConfigError(fmt::format("config file '{}' does not exist", path));
  }
  const std::string text = read_text_file(path);
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected key=value", path, line_no));
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    const std::string flag = "--" + key;
    const CLI::Option* opt = cmd->get_option_no_throw(flag);
    if (opt == nullptr || key == "config") {
      throw ConfigError(fmt::format("{}:{}: unknown setting '{}' for {}", path, line_no, key,
                                    cmd->get_name()));
    }
    if (given(args, flag)) continue;
    if (opt->get_expected_max() == 0) {
      if (value == "true" || value == "1") {
        out.push_back(flag);
      } else if (value != "false" && value != "0") {
        throw ConfigError(fmt::format("{}:{}: '{}' takes true or false", path, line_no, key));
      }
      continue;
    }
    out.push_back(flag);
    out.push_back(value);
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint question answering and question generation"};
  app.name("jointgen");
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "debug, info, warning, error or quiet")
      ->check(CLI::IsMember({"debug", "info", "warning", "error", "quiet"}));

  const auto add_config = [](CLI::App* cmd) {
    cmd->add_option("--config", "key=value settings file; flags take precedence")
        ->check(CLI::ExistingFile);
  };

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Tokenize SQuAD data and build vocabularies");
  add_config(c_pre);
  c_pre->add_option("--data", pre.data, "SQuAD v1.1 JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  c_pre->add_option("--out", pre.out, "Output cache file")->required();
  c_pre->add_option("--val-articles", pre.val_articles, "Articles held out for validation")
      ->capture_default_str();
  c_pre->add_option("--seed", pre.seed, "Split seed")->capture_default_str();
  c_pre->add_option("--decoder-vocab", pre.decoder_vocab, "Decoder vocabulary size")
      ->capture_default_str();

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth", "Write a synthetic SQuAD-format corpus");
  add_config(c_syn);
  c_syn->add_option("--out", syn.out, "Output JSON file")->required();
  c_syn->add_option("--examples", syn.examples, "Number of questions")->capture_default_str();
  c_syn->add_option("--per-article", syn.per_article, "Questions per article")
      ->capture_default_str();
  c_syn->add_option("--facts", syn.facts, "Facts per paragraph (1-5)")->capture_default_str();
  c_syn->add_option("--seed", syn.seed, "Generator seed")->capture_default_str();

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train a model from a preprocessed cache");
  add_config(c_tr);
  c_tr->add_option("--cache", tr.cache, "Preprocessed dataset file")
      ->required()
      ->check(CLI::ExistingFile);
  c_tr->add_option("--out", tr.out, "Output directory")->required();
  c_tr->add_option("--embeddings", tr.embeddings, "Pretrained word vectors (GloVe text)")
      ->check(CLI::ExistingFile);
  c_tr->add_option("--mode", tr.mode, "a-gen, q-gen or joint")
      ->check(CLI::IsMember({"a-gen", "q-gen", "joint"}))
      ->capture_default_str();
  c_tr->add_option("--batch-size", tr.batch_size)->capture_default_str();
  c_tr->add_option("--lr", tr.lr, "Initial learning rate")->capture_default_str();
  c_tr->add_option("--lr-decay", tr.lr_decay)->capture_default_str();
  c_tr->add_option("--patience", tr.patience, "Rising-loss epochs before decay")
      ->capture_default_str();
  c_tr->add_option("--dropout", tr.dropout)->capture_default_str();
  c_tr->add_option("--clip", tr.clip, "Global gradient norm limit")->capture_default_str();
  c_tr->add_option("--max-epochs", tr.max_epochs)->capture_default_str();
  c_tr->add_option("--seed", tr.seed)->capture_default_str();
  c_tr->add_flag("--abstractive", tr.abstractive, "Let a-gen generate from the vocabulary");
  c_tr->add_option("--word-dim", tr.model.word_emb_dim)->capture_default_str();
  c_tr->add_option("--char-dim", tr.model.char_emb_dim)->capture_default_str();
  c_tr->add_option("--char-hidden", tr.model.char_hidden_dim)->capture_default_str();
  c_tr->add_option("--hidden-dim", tr.model.rnn_hidden_dim)->capture_default_str();
  c_tr->add_option("--mlp-dim", tr.model.mlp_hidden_dim)->capture_default_str();
  c_tr->add_option("--mode-dim", tr.model.mode_emb_dim)->capture_default_str();
  c_tr->add_option("--init-scale", tr.model.init_scale)->capture_default_str();

  GenerateArgs gen;
  auto* c_gen = app.add_subcommand("generate", "Decode answers or questions");
  add_config(c_gen);
  c_gen->add_option("--checkpoint", gen.checkpoint)->required()->check(CLI::ExistingFile);
  add_source_options(c_gen, gen.source);
  c_gen->add_option("--mode", gen.mode, "a-gen or q-gen")
      ->required()
      ->check(CLI::IsMember({"a-gen", "q-gen"}));
  c_gen->add_option("--beam-width", gen.beam_width, "q-gen beam width (default 4)");
  c_gen->add_option("--max-len", gen.max_len, "Output length limit (15 a-gen, 30 q-gen)");
  c_gen->add_flag("--no-repeat-filter", gen.no_repeat_filter);
  c_gen->add_flag("--abstractive", gen.abstractive, "Let a-gen generate from the vocabulary");
  c_gen->add_option("--out", gen.out, "Predictions file")->required();

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Score predictions");
  add_config(c_ev);
  c_ev->add_option("--predictions", ev.predictions)->required()->check(CLI::ExistingFile);
  add_source_options(c_ev, ev.source);
  c_ev->add_option("--mode", ev.mode, "Task: a-gen or q-gen")
      ->required()
      ->check(CLI::IsMember({"a-gen", "q-gen"}));
  c_ev->add_flag("--allow-missing", ev.allow_missing, "Skip unmatched ids");
  c_ev->add_option("--out", ev.out, "Report file");

  InspectArgs in;
  auto* c_in = app.add_subcommand("inspect", "Describe a checkpoint or cache");
  c_in->add_option("--checkpoint", in.checkpoint)->check(CLI::ExistingFile);
  c_in->add_option("--cache", in.cache)->check(CLI::ExistingFile);
  c_in->add_flag("--parameters", in.parameters, "List parameter shapes");

  std::vector<std::string> expanded;
  try {
    expanded = apply_config_file(app, args);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  const auto level = log_level == "debug"     ? LogLevel::debug
                     : log_level == "warning" ? LogLevel::warning
                     : log_level == "error"   ? LogLevel::error
                     : log_level == "quiet"   ? LogLevel::quiet
                                              : LogLevel::info;
  set_log_level(level);

  try {
    for (auto* cmd : {c_gen, c_ev}) {
      if (cmd->parsed() && cmd->count("--data") + cmd->count("--cache") == 0) {
        throw ConfigError(fmt::format("{} needs --data or --cache", cmd->get_name()));
      }
    }
    if (c_pre->parsed()) return cmd_preprocess(pre, out);
    if (c_syn->parsed()) return cmd_synth(syn, out);
    if (c_tr->parsed()) return cmd_train(tr, c_tr->config_to_str(true, false), out);
    if (c_gen->parsed()) return cmd_generate(gen, c_gen->config_to_str(true, false), out);
    if (c_ev->parsed()) return cmd_evaluate(ev, c_ev->config_to_str(true, false), out);
    if (c_in->parsed()) return cmd_inspect(in, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const VocabularyError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kUsageError;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace jointgen::cli
