#include <benchmark/benchmark.h>

#include <string>

#include "jointgen/batching.hpp"
#include "jointgen/inference.hpp"
#include "jointgen/layers.hpp"
#include "jointgen/synthetic.hpp"
#include "jointgen/tokenizer.hpp"
#include "jointgen/training.hpp"

using namespace jointgen;

namespace {

Corpus bench_corpus() {
  SyntheticOptions so;
  so.examples = 16;
  PreprocessOptions po;
  po.validation_articles = 0;
  return preprocess(generate_synthetic(so), po);
}

ModelConfig bench_config(const Vocabularies& vocab, std::size_t hidden) {
  ModelConfig c;
  c.word_emb_dim = hidden;
  c.char_emb_dim = 8;
  c.char_hidden_dim = 8;
  c.rnn_hidden_dim = hidden;
  c.mlp_hidden_dim = hidden;
  c.mode_emb_dim = 4;
  c.dropout = 0.0;
  c.encoder_vocab_size = vocab.encoder.size();
  c.decoder_vocab_size = vocab.decoder.size();
  c.char_vocab_size = vocab.chars.size();
  return c;
}

void BM_LstmStep(benchmark::State& state) {
  const auto hidden = static_cast<std::size_t>(state.range(0));
  ParameterStore store;
  const LstmWeights w = LstmWeights::create(store, "cell", hidden, hidden);
  Rng rng(1);
  for (auto& p : store) {
    for (std::size_t i = 0; i < p->value.size(); ++i) p->value[i] = rng.uniform(-0.1, 0.1);
  }
  Tensor x({hidden});
  x.fill(0.5);
  for (auto _ : state) {
    Tape t;
    const LstmState s = lstm_step(t.constant(x), zero_lstm_state(t, hidden), w);
    benchmark::DoNotOptimize(s.h.value()[0]);
  }
}
BENCHMARK(BM_LstmStep)->Arg(32)->Arg(128)->Arg(384);

void BM_TeacherForcedStep(benchmark::State& state) {
  const Corpus corpus = bench_corpus();
  JointModel model(bench_config(corpus.vocab, static_cast<std::size_t>(state.range(0))));
  Rng rng(2);
  model.initialize(rng);
  const std::size_t rows[] = {0, 1, 2, 3};
  const Batch batch =
      build_batch(corpus.train, rows, Mode::question_generation, corpus.vocab, true);
  for (auto _ : state) {
    Tape t;
    const UnrollResult r = teacher_forced_unroll(t, model, batch);
    t.backward(r.loss);
    benchmark::DoNotOptimize(r.loss.value()[0]);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 4);
}
BENCHMARK(BM_TeacherForcedStep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_DecodeStep(benchmark::State& state) {
  const Corpus corpus = bench_corpus();
  JointModel model(bench_config(corpus.vocab, static_cast<std::size_t>(state.range(0))));
  Rng rng(3);
  model.initialize(rng);
  const std::size_t rows[] = {0};
  const Batch batch =
      build_batch(corpus.train, rows, Mode::question_generation, corpus.vocab, true);
  const ExampleView view = batch.row(0);
  const auto root = make_model_cursor(model, view, false);
  for (auto _ : state) {
    const auto next = root->advance(special::start + 3);
    benchmark::DoNotOptimize(next->distribution().data());
  }
}
BENCHMARK(BM_DecodeStep)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_BeamSearch(benchmark::State& state) {
  const Corpus corpus = bench_corpus();
  JointModel model(bench_config(corpus.vocab, 32));
  Rng rng(4);
  model.initialize(rng);
  const std::size_t rows[] = {0};
  const Batch batch =
      build_batch(corpus.train, rows, Mode::question_generation, corpus.vocab, true);
  InferenceConfig config = InferenceConfig::defaults(Mode::question_generation);
  config.beam_width = static_cast<std::size_t>(state.range(0));
  config.max_len = 10;
  for (auto _ : state) {
    const Hypothesis h = decode_example(model, batch.row(0), config);
    benchmark::DoNotOptimize(h.logprob);
  }
}
BENCHMARK(BM_BeamSearch)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_Tokenize(benchmark::State& state) {
  std::string text;
  for (int i = 0; i < 50; ++i) {
    text += "Nikola Tesla didn't move to Graz in 1875; he attended the Realschule, Karlstadt. ";
  }
  for (auto _ : state) benchmark::DoNotOptimize(tokenize(text).size());
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Tokenize);

}  // namespace

BENCHMARK_MAIN();
