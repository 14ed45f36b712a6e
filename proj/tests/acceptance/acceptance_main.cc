// Acceptance run: one PASS/FAIL line per acceptance check. Exits non-zero
// if any check fails.
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "api_harness.hpp"
#include "crash_harness.hpp"
#include "framekit/classifier.hpp"
#include "framekit/error.hpp"
#include "framekit/hash.hpp"
#include "framekit/job_service.hpp"
#include "framekit/lda.hpp"
#include "framekit/rng.hpp"
#include "oracle_values.hpp"
#include "test_support.hpp"

namespace {

using namespace framekit;
using framekit::testing::TempDir;
using nlohmann::json;

struct Verdict {
  bool pass = false;
  std::string detail;
};

// 1 -------------------------------------------------------------------------

std::string pipeline_zip(const std::string& csv) {
  TempDir dir;
  jobs::JobServiceOptions o;
  o.store_dir = dir.path();
  o.install_demo_models = false;
  o.durable = false;
  jobs::JobService service(o);
  const auto corpus = service.upload_corpus(csv, "headlines_1000.csv").stored.corpus_id;
  const auto id = service
                      .enqueue(jobs::JobKind::kLdaTrain, {{"corpus_id", corpus},
                                                          {"num_topics", 5},
                                                          {"iterations", 200},
                                                          {"seed", 42}})
                      .job_id;
  service.drain();
  return service.results_zip(id);
}

Verdict determinism() {
  const auto csv = testing::read_text(testing::fixture_path("headlines_1000.csv"));
  const auto start = std::chrono::steady_clock::now();
  const auto a = pipeline_zip(csv);
  const auto b = pipeline_zip(csv);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {a == b && !a.empty() && secs < 60.0,
          fmt::format("zip sha256 {} vs {}, {:.1f}s for both runs", sha256_hex(a).substr(0, 16),
                      sha256_hex(b).substr(0, 16), secs)};
}

// 2 -------------------------------------------------------------------------

Verdict gibbs_oracle() {
  const auto tc = testing::make_tokenized({{"a", "b"}, {"b", "b"}});
  lda::LdaConfig config;
  config.num_topics = 2;
  config.alpha = 0.5;
  config.beta = 0.1;
  constexpr int kRuns = 10000;
  std::array<int, 16> histogram{};
  const auto start = std::chrono::steady_clock::now();
  for (int run = 0; run < kRuns; ++run) {
    config.seed = static_cast<std::uint64_t>(run) + 1;
    lda::GibbsSampler sampler(tc, config);
    for (int it = 0; it < 25; ++it) sampler.sweep();
    int index = 0;
    int bit = 3;
    for (const auto& doc : sampler.assignments()) {
      for (const auto z : doc) index += z << bit--;
    }
    ++histogram[index];
  }
  double tv = 0.0;
  for (std::size_t i = 0; i < 16; ++i) {
    tv += std::abs(histogram[i] / static_cast<double>(kRuns) - testing::oracle::kMicroPosterior[i]);
  }
  tv /= 2.0;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {tv < 0.05 && secs < 30.0,
          fmt::format("total variation {:.4f} over {} runs, {:.2f}s", tv, kRuns, secs)};
}

// 3 -------------------------------------------------------------------------

double mean_coherence(const lda::TopicModel& model, const textprep::TokenizedCorpus& tc, int n) {
  const auto summaries = lda::topic_keywords(model, n, tc);
  double total = 0.0;
  for (const auto& s : summaries) total += s.coherence;
  return total / static_cast<double>(summaries.size());
}

Verdict topic_recovery() {
  const auto tc = textprep::build_tokenized_corpus(testing::two_cluster_corpus(),
                                                   textprep::PrepConfig{});
  lda::LdaConfig config;
  const auto k2 = lda::train_lda(tc, config);
  const auto first = k2.dominant_topic(0);
  const auto second = k2.dominant_topic(10);
  std::size_t consistent = 0;
  for (std::size_t d = 0; d < 20; ++d) {
    if (k2.dominant_topic(d) == (d < 10 ? first : second)) ++consistent;
  }
  const bool separated = first != second && consistent == 20;
  config.num_topics = 4;
  const auto k4 = lda::train_lda(tc, config);
  const int n = static_cast<int>(std::min<std::size_t>(10, tc.vocabulary.size()));
  const double c2 = mean_coherence(k2, tc, n);
  const double c4 = mean_coherence(k4, tc, n);
  return {separated && c2 > c4,
          fmt::format("{}/20 documents on their cluster's topic, mean coherence K=2 {:.4f} vs K=4 {:.4f}",
                      consistent, c2, c4)};
}

// 4 -------------------------------------------------------------------------

Verdict metric_oracles() {
  namespace oracle = testing::oracle;
  const auto four = testing::make_tokenized({{"x", "y"}, {"x", "y"}, {"x"}, {"y"}});
  const auto five = testing::make_tokenized({{"a", "b", "c"}, {"a", "b"}, {"a"}, {"c", "d"}, {"b", "d"}});
  double worst = 0.0;
  auto check = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  check(lda::coherence({"x", "y"}, four), oracle::kCoherenceXY);
  check(lda::coherence({"y", "x"}, four), oracle::kCoherenceYX);
  check(lda::coherence({"a", "b", "c", "d"}, five), oracle::kCoherenceABCD);
  check(lda::coherence({"d", "c", "b", "a"}, five), oracle::kCoherenceDCBA);
  check(lda::coherence({"a", "d"}, five), oracle::kCoherenceAD);

  // Uniform phi and theta over V = 7 terms.
  const auto tc = testing::make_tokenized({{"a", "b", "c"}, {"d", "e", "f", "g", "a"}});
  lda::TopicModel uniform;
  uniform.terms = tc.vocabulary.terms();
  uniform.phi = Matrix<double>(3, 7, 1.0 / 7.0);
  uniform.theta = Matrix<double>(2, 3, 1.0 / 3.0);
  const double p_uniform = lda::perplexity(uniform, tc);

  const auto single = testing::make_tokenized({{"w", "w", "w"}});
  lda::LdaConfig config;
  config.iterations = 10;
  const double p_single = lda::perplexity(lda::train_lda(single, config), single);

  const bool ok = worst <= 1e-9 && std::abs(p_uniform - 7.0) < 1e-12 && p_single == 1.0;
  return {ok, fmt::format("max coherence error {:.1e}, uniform perplexity {:.15g} (V=7), "
                          "single-word perplexity {:.15g}",
                          worst, p_uniform, p_single)};
}

// 5 -------------------------------------------------------------------------

Verdict classifier_correctness() {
  using namespace classifier;
  Xoshiro256 rng(99);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t c = 2 + rng.below(2);
    const std::size_t v = 1 + rng.below(10);
    Matrix<double> w(c, v + 1);
    for (auto& x : w.data()) x = rng.uniform() * 2.0 - 1.0;
    std::vector<SparseVector> xs;
    std::vector<std::size_t> ys;
    for (int n = 0; n < 6; ++n) {
      SparseVector x;
      for (std::uint32_t t = 0; t < v; ++t) {
        if (rng.below(2) == 0) {
          x.ids.push_back(t);
          x.values.push_back(rng.uniform());
        }
      }
      xs.push_back(x);
      ys.push_back(rng.below(c));
    }
    const std::vector<std::size_t> batch = {0, 1, 2, 3, 4, 5};
    Matrix<double> grad;
    softmax_objective(w, xs, ys, batch, 1e-2, &grad);
    const double h = 1e-5;
    for (std::size_t i = 0; i < w.data().size(); ++i) {
      auto plus = w;
      auto minus = w;
      plus.data()[i] += h;
      minus.data()[i] -= h;
      const double numeric = (softmax_objective(plus, xs, ys, batch, 1e-2, nullptr) -
                              softmax_objective(minus, xs, ys, batch, 1e-2, nullptr)) /
                             (2 * h);
      const double denom = std::max(1e-7, std::abs(grad.data()[i]) + std::abs(numeric));
      worst = std::max(worst, std::abs(grad.data()[i] - numeric) / denom);
    }
  }

  const auto corpus = testing::separable_labeled_corpus(100, 11);
  const TrainConfig config;
  const auto [train, test] = split_train_test(corpus, config);
  const auto model = train_reference(train, test, config, textprep::PrepConfig{});
  const auto& m = model.metrics;
  std::int64_t trace = 0;
  std::int64_t total = 0;
  for (std::size_t i = 0; i < m.confusion.rows(); ++i) {
    for (std::size_t j = 0; j < m.confusion.cols(); ++j) {
      total += m.confusion(i, j);
      if (i == j) trace += m.confusion(i, j);
    }
  }
  const double recomputed = static_cast<double>(trace) / static_cast<double>(total);
  const bool ok = worst < 1e-4 && m.accuracy >= 0.95 && recomputed == m.accuracy &&
                  static_cast<std::size_t>(total) == m.test_size && config.epochs == 3 &&
                  config.batch_size == 8;
  return {ok, fmt::format("max gradient relative error {:.2e}, test accuracy {:.4f} on {} documents "
                          "(confusion trace {}/{})",
                          worst, m.accuracy, m.test_size, trace, total)};
}

// 6 -------------------------------------------------------------------------

Verdict job_safety() {
  std::size_t crashes = 0;
  std::size_t jobs = 0;
  std::size_t notifications = 0;
  std::vector<std::string> problems;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    TempDir dir;
    const auto r = testing::run_crash_scenario(seed, dir.path());
    crashes += r.crashes;
    jobs += r.jobs;
    notifications += r.notifications;
    for (const auto& v : r.violations) problems.push_back(fmt::format("seed {}: {}", seed, v));
  }
  std::size_t kills = 0;
  for (std::uint64_t seed = 1001; seed <= 1003; ++seed) {
    TempDir dir;
    const auto r = testing::run_kill_scenario(seed, dir.path(), 6);
    kills += r.crashes;
    jobs += r.jobs;
    for (const auto& v : r.violations) problems.push_back(fmt::format("kill seed {}: {}", seed, v));
  }
  std::string detail = fmt::format(
      "100 interleavings + 3 SIGKILL runs, {} jobs, {} injected crashes, {} kills, {} notifications",
      jobs, crashes, kills, notifications);
  if (!problems.empty()) detail += "; first violation: " + problems.front();
  return {problems.empty() && crashes > 0, detail};
}

// 7 -------------------------------------------------------------------------

Verdict api_contract(const std::string& transcript_path) {
  testing::ApiHarness harness;
  const auto report = testing::run_golden_suite(harness, testing::golden_path("api_contract.json"));
  if (!transcript_path.empty()) std::ofstream(transcript_path) << report.transcript.dump(1) << "\n";
  std::string detail = fmt::format("{}/{} golden cases, {} exchanges recorded",
                                   report.cases.size() - report.failures(), report.cases.size(),
                                   report.transcript.size());
  for (const auto& c : report.cases) {
    if (!c.passed) {
      detail += fmt::format("; first failure: {} ({})", c.name, c.detail);
      break;
    }
  }
  return {report.all_passed(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"framekit acceptance criteria"};
  std::string transcript;
  app.add_option("--transcript", transcript, "write the API exchange transcript here");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"determinism", determinism},
      {"gibbs-oracle", gibbs_oracle},
      {"topic-recovery", topic_recovery},
      {"metric-oracles", metric_oracles},
      {"classifier", classifier_correctness},
      {"job-safety", job_safety},
      {"api-contract", [&] { return api_contract(transcript); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": "
              << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
