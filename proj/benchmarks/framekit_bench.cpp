#include <fstream>
#include <sstream>

#include <benchmark/benchmark.h>

#include "framekit/classifier.hpp"
#include "framekit/corpus.hpp"
#include "framekit/lda.hpp"
#include "framekit/registry.hpp"
#include "framekit/textprep.hpp"

namespace {
using namespace framekit;

const Corpus& headlines() {
  static const Corpus corpus = [] {
    std::ifstream in(FRAMEKIT_HEADLINES, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_corpus(ss.str(), false, "headlines");
  }();
  return corpus;
}

void BM_Tokenize(benchmark::State& state) {
  const auto& corpus = headlines();
  std::size_t tokens = 0;
  for (auto _ : state) {
    for (const auto& doc : corpus.documents()) {
      auto t = textprep::tokenize(doc.text);
      tokens += t.size();
      benchmark::DoNotOptimize(t);
    }
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(tokens));
}
BENCHMARK(BM_Tokenize);

void BM_Stem(benchmark::State& state) {
  std::vector<std::string> words;
  for (const auto& doc : headlines().documents()) {
    for (auto& t : textprep::tokenize(doc.text)) words.push_back(std::move(t));
  }
  for (auto _ : state) {
    for (const auto& w : words) benchmark::DoNotOptimize(textprep::stem(w));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(words.size()));
}
BENCHMARK(BM_Stem);

void BM_BuildTokenizedCorpus(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(textprep::build_tokenized_corpus(headlines(), textprep::PrepConfig{}));
  }
}
BENCHMARK(BM_BuildTokenizedCorpus)->Unit(benchmark::kMillisecond);

// Cost per Gibbs sweep at K topics over the headline fixture.
void BM_GibbsSweep(benchmark::State& state) {
  const auto tc = textprep::build_tokenized_corpus(headlines(), textprep::PrepConfig{});
  lda::LdaConfig config;
  config.num_topics = static_cast<int>(state.range(0));
  config.iterations = 50;
  for (auto _ : state) benchmark::DoNotOptimize(lda::train_lda(tc, config));
  state.SetItemsProcessed(state.iterations() * config.iterations *
                          static_cast<std::int64_t>(tc.total_tokens()));
}
BENCHMARK(BM_GibbsSweep)->Arg(5)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_ClassifierEpoch(benchmark::State& state) {
  const auto corpus = classifier::synthetic_labeled_corpus(
      {{"A", {"alpha", "beta", "gamma", "delta", "epsilon", "zeta"}},
       {"B", {"eta", "theta", "iota", "kappa", "lambda", "omicron"}},
       {"C", {"sigma", "tau", "upsilon", "omega", "rho", "chi"}}},
      static_cast<std::size_t>(state.range(0)), 20, 5);
  classifier::TrainConfig config;
  config.epochs = 1;
  const auto [train, test] = classifier::split_train_test(corpus, config);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        classifier::train_reference(train, test, config, textprep::PrepConfig{}));
  }
}
BENCHMARK(BM_ClassifierEpoch)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_EncodeDecodeModel(benchmark::State& state) {
  const auto model = classifier::build_demo_models().front();
  for (auto _ : state) {
    benchmark::DoNotOptimize(classifier::decode_model(classifier::encode_model(model)));
  }
}
BENCHMARK(BM_EncodeDecodeModel);

}  // namespace

BENCHMARK_MAIN();
