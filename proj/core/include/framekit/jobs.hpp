#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace framekit::jobs {

enum class JobKind { kLdaTrain, kLdaSweep, kClfTrain, kClfPredict };
enum class JobState { kQueued, kRunning, kSucceeded, kFailed };

std::string_view kind_name(JobKind kind);
JobKind kind_from_name(std::string_view name);
std::string_view state_name(JobState state);
JobState state_from_name(std::string_view name);

// Allowed edges: queued->running, running->succeeded, running->failed, and
// running->queued, which only recovery after a crash takes.
bool is_allowed_transition(JobState from, JobState to);
inline bool is_terminal(JobState s) { return s == JobState::kSucceeded || s == JobState::kFailed; }

// Milliseconds since the Unix epoch, UTC.
using Clock = std::function<std::int64_t()>;
std::int64_t system_clock_ms();
std::string format_timestamp(std::int64_t epoch_ms);

// A stored file: relative path inside the store directory plus checksum.
struct ArtifactRef {
  std::string name;
  std::string path;
  std::string sha256;
  std::size_t size = 0;

  friend bool operator==(const ArtifactRef&, const ArtifactRef&) = default;
};

struct Job {
  std::string job_id;
  JobKind kind = JobKind::kLdaTrain;
  JobState state = JobState::kQueued;
  std::uint64_t sequence = 0;  // FIFO position
  std::int64_t created_at = 0;
  std::optional<std::int64_t> started_at;
  std::optional<std::int64_t> finished_at;
  nlohmann::json params = nlohmann::json::object();
  std::vector<std::string> input_refs;
  std::vector<ArtifactRef> result_refs;
  std::optional<std::string> error_message;
  std::optional<std::string> notify_email;
  std::vector<std::string> notes;
  int attempts = 0;
  bool notification_pending = false;
  std::optional<std::int64_t> notified_at;
  bool results_expired = false;
};

nlohmann::json to_json(const Job& job);
Job job_from_json(const nlohmann::json& j);

struct StoredCorpus {
  std::string corpus_id;
  ArtifactRef blob;
  std::string source_name;
  std::optional<std::size_t> rows;  // unset when stored without parsing
  bool has_labels = false;
  std::map<std::string, std::size_t> label_counts;
  std::int64_t created_at = 0;
};

// Content-addressed files under <root>/blobs/<aa>/<sha256>.
class BlobStore {
 public:
  explicit BlobStore(std::filesystem::path root);

  ArtifactRef put(std::string name, std::string_view bytes);
  // Verifies size and checksum; throws Error(kStoreCorrupt) on mismatch.
  std::string get(const ArtifactRef& ref) const;
  bool remove(const std::string& relative_path);
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

// Single-file persistent store holding the job table (which doubles as the
// FIFO queue) and the corpus table. Every mutation rewrites the file
// atomically (temp file, fsync, rename) under one mutex, so claims are
// atomic and readers always see a committed state. The file starts with a
// checksum line; a truncated or edited file fails to load with
// Error(kStoreCorrupt).
class JobStore {
 public:
  JobStore(std::filesystem::path file, Clock clock = system_clock_ms, bool durable = true);

  StoredCorpus add_corpus(StoredCorpus corpus);
  std::optional<StoredCorpus> find_corpus(const std::string& corpus_id) const;

  Job enqueue(JobKind kind, nlohmann::json params, std::vector<std::string> input_refs,
              std::optional<std::string> notify_email);
  // Oldest queued job moved to running, or nullopt when the queue is empty.
  std::optional<Job> claim_next();
  Job complete(const std::string& job_id, std::vector<ArtifactRef> results);
  Job fail(const std::string& job_id, const std::string& message);
  // Running jobs go back to the queue with a note; returns how many.
  std::size_t recover();
  void mark_notified(const std::string& job_id);

  Job get(const std::string& job_id) const;  // throws Error(kUnknownJob)
  std::vector<Job> list() const;             // FIFO order
  std::vector<Job> pending_notifications() const;

  // Marks results of jobs finished before `cutoff_ms` as expired and returns
  // blob paths no longer referenced by any live job or corpus.
  std::vector<std::string> expire_results(std::int64_t cutoff_ms);

  // SHA-256 of the committed file.
  std::string file_digest() const;
  const std::filesystem::path& file() const { return file_; }

 private:
  Job& find_locked(const std::string& job_id);
  void transition_locked(Job& job, JobState to);
  void persist_locked();
  void load();

  std::filesystem::path file_;
  Clock clock_;
  bool durable_;
  mutable std::mutex mutex_;
  std::uint64_t next_sequence_ = 1;
  std::vector<Job> jobs_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, StoredCorpus> corpora_;
};

}  // namespace framekit::jobs
