// framekit command-line tool: runs the HTTP service or a single job locally.
#include <csignal>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "framekit/api.hpp"
#include "framekit/classifier.hpp"
#include "framekit/config.hpp"
#include "framekit/error.hpp"
#include "framekit/job_service.hpp"
#include "framekit/uuid.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace framekit;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, fmt::format("cannot read {}", path.string()), "file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int serve(const std::optional<fs::path>& config_file) {
  const auto config = ServiceConfig::load(config_file, ServiceConfig::process_environment());
  if (config.notification_sink == "smtp") {
    throw Error(ErrorCode::kInvalidConfig,
                "the smtp notification sink is not available in this build; use \"file\"",
                "notification_sink");
  }

  // Signals go to a dedicated thread; every other thread inherits the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  jobs::JobServiceOptions options;
  options.store_dir = config.store_dir;
  options.registry_dir = config.resolved_registry();
  options.base_url = config.base_url;
  options.artifact_ttl_days = config.artifact_ttl_days;
  options.transformer_endpoint = config.transformer_endpoint;
  options.sink = std::make_shared<jobs::FileOutboxSink>(config.resolved_outbox());
  jobs::JobService service(std::move(options));
  if (const auto n = service.recover_on_startup()) {
    std::cerr << fmt::format("framekit: requeued {} interrupted job(s)\n", n);
  }
  service.deliver_pending_notifications();

  api::Server server(service, {config.max_upload_bytes, config.static_dir});
  jobs::WorkerPool workers(service, config.workers);

  std::mutex m;
  std::condition_variable cv;
  bool stopping = false;
  std::jthread sweeper([&] {
    std::unique_lock lock(m);
    do {
      lock.unlock();
      if (const auto n = service.sweep_expired()) {
        std::cerr << fmt::format("framekit: expired results of {} job(s)\n", n);
      }
      lock.lock();
    } while (!cv.wait_for(lock, std::chrono::hours(1), [&] { return stopping; }));
  });
  std::jthread signal_waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    {
      const std::lock_guard lock(m);
      stopping = true;
    }
    cv.notify_all();
    server.stop();
  });

  std::cerr << fmt::format("framekit: listening on http://{}:{}\n", config.host, config.port);
  if (!server.listen(config.host, config.port)) {
    std::cerr << fmt::format("framekit: cannot listen on {}:{}\n", config.host, config.port);
    std::exit(1);
  }
  workers.stop();
  return 0;
}

struct LocalRun {
  fs::path store;
  fs::path registry;
  fs::path out;
};

// Runs one job to completion in a private store and writes its results zip.
int run_local(const LocalRun& run, jobs::JobKind kind, const fs::path& corpus_file,
              json params) {
  const bool temp_store = run.store.empty();
  const auto store =
      temp_store ? fs::temp_directory_path() / ("framekit-" + make_uuid()) : run.store;
  int rc = 0;
  {
    jobs::JobServiceOptions options;
    options.store_dir = store;
    options.registry_dir = run.registry;
    options.sleeper = [](std::chrono::milliseconds) {};
    jobs::JobService service(std::move(options));
    const auto summary = service.upload_corpus(read_file(corpus_file), corpus_file.filename());
    if (summary.validation) {
      for (const auto& w : summary.validation->warnings) std::cerr << "warning: " << w << "\n";
    }
    params["corpus_id"] = summary.stored.corpus_id;
    const auto id = service.enqueue(kind, params).job_id;
    service.drain();
    const auto job = service.get_job(id);
    if (job.state == jobs::JobState::kSucceeded) {
      std::ofstream(run.out, std::ios::binary) << service.results_zip(id);
      std::cout << fmt::format("{} {} -> {}\n", jobs::kind_name(kind), id, run.out.string());
    } else {
      std::cerr << "failed: " << job.error_message.value_or("unknown error") << "\n";
      rc = 1;
    }
  }
  if (temp_store) fs::remove_all(store);
  return rc;
}

void add_local_options(CLI::App* cmd, LocalRun& run, fs::path& corpus) {
  cmd->add_option("corpus", corpus, "CSV or TSV with an \"Example\" column")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", run.out, "results zip to write")->required();
  cmd->add_option("--store", run.store, "job store directory (default: temporary)");
  cmd->add_option("--registry", run.registry, "model registry directory")
      ->default_val("framekit-models");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"framekit: topic modeling and frame classification for news text"};
  app.require_subcommand(1);

  std::optional<fs::path> config_file;
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP API and background workers");
  serve_cmd->add_option("-c,--config", config_file, "JSON config file")->check(CLI::ExistingFile);

  LocalRun run;
  fs::path corpus;

  int topics = 0, iterations = 1000, keywords = 10;
  std::uint64_t seed = 42;
  std::optional<double> alpha;
  double beta = 0.01;
  auto* lda_cmd = app.add_subcommand("lda", "train a topic model");
  add_local_options(lda_cmd, run, corpus);
  lda_cmd->add_option("-k,--topics", topics, "number of topics")->required();
  lda_cmd->add_option("--iterations", iterations)->capture_default_str();
  lda_cmd->add_option("--seed", seed)->capture_default_str();
  lda_cmd->add_option("--keywords", keywords, "keywords per topic")->capture_default_str();
  lda_cmd->add_option("--alpha", alpha, "document-topic prior (default 50/K)");
  lda_cmd->add_option("--beta", beta)->capture_default_str();

  std::vector<int> k_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "compare coherence and perplexity across K");
  add_local_options(sweep_cmd, run, corpus);
  sweep_cmd->add_option("-k,--topics", k_values, "topic counts to try")->required();
  sweep_cmd->add_option("--iterations", iterations)->capture_default_str();
  sweep_cmd->add_option("--seed", seed)->capture_default_str();
  sweep_cmd->add_option("--keywords", keywords)->capture_default_str();

  std::string issue, model_id, backend = "reference-linear";
  int epochs = 3, batch_size = 8;
  double test_fraction = 0.2;
  auto* train_cmd = app.add_subcommand("train", "train a frame classifier on a labeled corpus");
  add_local_options(train_cmd, run, corpus);
  train_cmd->add_option("--issue", issue, "issue name stored with the model")->required();
  train_cmd->add_option("--model-id", model_id, "registry id (default: derived from checksum)");
  train_cmd->add_option("--backend", backend)
      ->check(CLI::IsMember({"reference-linear", "external-transformer"}))
      ->capture_default_str();
  train_cmd->add_option("--epochs", epochs)->capture_default_str();
  train_cmd->add_option("--batch-size", batch_size)->capture_default_str();
  train_cmd->add_option("--test-fraction", test_fraction)->capture_default_str();
  train_cmd->add_option("--seed", seed)->capture_default_str();

  auto* predict_cmd = app.add_subcommand("predict", "label a corpus with a registered model");
  add_local_options(predict_cmd, run, corpus);
  predict_cmd->add_option("-m,--model", model_id, "registry id")->required();

  fs::path registry = "framekit-models";
  auto* models_cmd = app.add_subcommand("models", "list registered models");
  models_cmd->add_option("--registry", registry)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return serve(config_file);
    if (*lda_cmd) {
      json p{{"num_topics", topics}, {"iterations", iterations}, {"seed", seed},
             {"keyword_count", keywords}, {"beta", beta}};
      if (alpha) p["alpha"] = *alpha;
      return run_local(run, jobs::JobKind::kLdaTrain, corpus, p);
    }
    if (*sweep_cmd) {
      return run_local(run, jobs::JobKind::kLdaSweep, corpus,
                       {{"k_values", k_values}, {"iterations", iterations}, {"seed", seed},
                        {"keyword_count", keywords}});
    }
    if (*train_cmd) {
      json p{{"issue_name", issue},
             {"backend", backend},
             {"config",
              {{"epochs", epochs}, {"batch_size", batch_size}, {"test_fraction", test_fraction},
               {"seed", seed}}}};
      if (!model_id.empty()) p["model_id"] = model_id;
      return run_local(run, jobs::JobKind::kClfTrain, corpus, p);
    }
    if (*predict_cmd) {
      return run_local(run, jobs::JobKind::kClfPredict, corpus, {{"model_id", model_id}});
    }
    if (*models_cmd) {
      const classifier::ModelRegistry reg(registry);
      for (const auto& e : reg.list()) {
        std::cout << fmt::format("{}\t{}\t{:.3f}\t{}\n", e.model_id, e.issue_name, e.accuracy,
                                 fmt::join(e.labels, ", "));
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
