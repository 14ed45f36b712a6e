#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "framekit/corpus.hpp"
#include "framekit/jobs.hpp"
#include "framekit/notify.hpp"
#include "framekit/registry.hpp"
#include "framekit/zip.hpp"

namespace framekit::jobs {

// Points inside run_worker_step where a test hook may simulate a crash.
enum class FaultPoint {
  kAfterClaim,
  kAfterExecute,
  kAfterArtifacts,
  kAfterTerminal,
  kAfterDelivery,
};
inline constexpr int kFaultPointCount = 5;
std::string_view fault_point_name(FaultPoint point);

// Thrown by fault hooks. run_worker_step lets it escape without touching the
// store, which is what a killed process would leave behind.
struct SimulatedCrash : std::runtime_error {
  SimulatedCrash() : std::runtime_error("simulated crash") {}
};

using FaultHook = std::function<void(FaultPoint, const std::string& job_id)>;

struct JobServiceOptions {
  std::filesystem::path store_dir = "framekit-data";
  std::filesystem::path registry_dir;  // default <store_dir>/models
  bool install_demo_models = true;
  std::string base_url = "http://localhost:8080";
  int artifact_ttl_days = 30;
  std::string transformer_endpoint;
  std::shared_ptr<NotificationSink> sink;  // default: <store_dir>/outbox.jsonl
  RetryPolicy retry;
  Sleeper sleeper = real_sleep;
  Clock clock = system_clock_ms;
  bool durable = true;
  FaultHook fault_hook;
};

// Parameters after defaulting, stored with the job. Throws
// Error(kInvalidParams) naming the offending field.
nlohmann::json normalize_params(JobKind kind, const nlohmann::json& params);

struct EnqueueResult {
  std::string job_id;
  std::vector<std::string> warnings;
};

struct CorpusSummary {
  StoredCorpus stored;
  std::optional<classifier::ValidationReport> validation;  // labeled corpora only
};

class JobService {
 public:
  explicit JobService(JobServiceOptions options);

  // Parses, validates and stores an uploaded corpus.
  CorpusSummary upload_corpus(std::string_view bytes, std::string source_name);
  // Stores the bytes unparsed; errors surface when a job reads them.
  StoredCorpus store_raw_corpus(std::string_view bytes, std::string source_name);
  Corpus load_corpus(const std::string& corpus_id, bool require_labels) const;

  // Checks that referenced corpora and models exist (kUnknownCorpus,
  // kUnknownModelId) and, for clf_train, that the corpus passes the FAIL
  // rules (kValidationFailed); WARN entries are returned.
  EnqueueResult enqueue(JobKind kind, const nlohmann::json& params,
                        std::optional<std::string> notify_email = std::nullopt);

  // Claims and executes the oldest queued job. Execution errors mark the job
  // failed; the id of the processed job is returned, or nullopt when idle.
  std::optional<std::string> run_worker_step();
  // Runs steps until the queue is empty; returns the number processed.
  std::size_t drain();

  Job get_job(const std::string& job_id) const { return store_.get(job_id); }
  std::size_t recover_on_startup();
  // Delivers notifications recorded as pending; returns how many went out.
  std::size_t deliver_pending_notifications();
  // Deterministic zip of the job's artifacts in result order. Throws
  // kResultsNotReady unless succeeded, kResultsExpired after the TTL sweep.
  std::string results_zip(const std::string& job_id) const;
  // Expires results older than the TTL and deletes their files.
  std::size_t sweep_expired();

  JobStore& store() { return store_; }
  const JobStore& store() const { return store_; }
  BlobStore& blobs() { return blobs_; }
  classifier::ModelRegistry& registry() { return registry_; }
  const classifier::ModelRegistry& registry() const { return registry_; }
  const JobServiceOptions& options() const { return options_; }

 private:
  std::vector<zip::Entry> execute(const Job& job);
  void notify_job(const std::string& job_id);
  void fault(FaultPoint point, const std::string& job_id) const;

  JobServiceOptions options_;
  BlobStore blobs_;
  JobStore store_;
  classifier::ModelRegistry registry_;
  std::shared_ptr<NotificationSink> sink_;
  Notifier notifier_;
};

// Background workers calling run_worker_step in a loop until stopped.
class WorkerPool {
 public:
  WorkerPool(JobService& service, int workers,
             std::chrono::milliseconds idle_wait = std::chrono::milliseconds(100));
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  void stop();

 private:
  JobService& service_;
  std::chrono::milliseconds idle_wait_;
  std::atomic<bool> stop_{false};
  std::vector<std::jthread> threads_;
};

}  // namespace framekit::jobs
