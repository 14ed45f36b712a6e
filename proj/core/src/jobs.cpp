#include "framekit/jobs.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <set>

#include <fmt/format.h>

#include "framekit/error.hpp"
#include "framekit/hash.hpp"
#include "framekit/uuid.hpp"
#include "fsutil.hpp"

namespace framekit::jobs {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kStoreMagic = "FKSTORE1 ";
constexpr int kStoreVersion = 1;

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

json ref_json(const ArtifactRef& r) {
  return {{"name", r.name}, {"path", r.path}, {"sha256", r.sha256}, {"size", r.size}};
}

ArtifactRef ref_from(const json& j) {
  return {j.at("name").get<std::string>(), j.at("path").get<std::string>(),
          j.at("sha256").get<std::string>(), j.at("size").get<std::size_t>()};
}

json corpus_json(const StoredCorpus& c) {
  return {{"corpus_id", c.corpus_id},       {"blob", ref_json(c.blob)},
          {"source_name", c.source_name},   {"rows", optional_json(c.rows)},
          {"has_labels", c.has_labels},     {"label_counts", c.label_counts},
          {"created_at", c.created_at}};
}

StoredCorpus corpus_from(const json& j) {
  StoredCorpus c;
  c.corpus_id = j.at("corpus_id").get<std::string>();
  c.blob = ref_from(j.at("blob"));
  c.source_name = j.at("source_name").get<std::string>();
  c.rows = optional_from<std::size_t>(j, "rows");
  c.has_labels = j.at("has_labels").get<bool>();
  c.label_counts = j.at("label_counts").get<std::map<std::string, std::size_t>>();
  c.created_at = j.at("created_at").get<std::int64_t>();
  return c;
}

}  // namespace

std::string_view kind_name(JobKind kind) {
  switch (kind) {
    case JobKind::kLdaTrain: return "lda_train";
    case JobKind::kLdaSweep: return "lda_sweep";
    case JobKind::kClfTrain: return "clf_train";
    case JobKind::kClfPredict: return "clf_predict";
  }
  return "unknown";
}

JobKind kind_from_name(std::string_view name) {
  for (auto k : {JobKind::kLdaTrain, JobKind::kLdaSweep, JobKind::kClfTrain, JobKind::kClfPredict}) {
    if (kind_name(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidParams, fmt::format("unknown job kind '{}'", name), "kind");
}

std::string_view state_name(JobState state) {
  switch (state) {
    case JobState::kQueued: return "queued";
    case JobState::kRunning: return "running";
    case JobState::kSucceeded: return "succeeded";
    case JobState::kFailed: return "failed";
  }
  return "unknown";
}

JobState state_from_name(std::string_view name) {
  for (auto s : {JobState::kQueued, JobState::kRunning, JobState::kSucceeded, JobState::kFailed}) {
    if (state_name(s) == name) return s;
  }
  throw Error(ErrorCode::kStoreCorrupt, fmt::format("unknown job state '{}'", name));
}

bool is_allowed_transition(JobState from, JobState to) {
  switch (from) {
    case JobState::kQueued: return to == JobState::kRunning;
    case JobState::kRunning:
      return to == JobState::kSucceeded || to == JobState::kFailed || to == JobState::kQueued;
    default: return false;
  }
}

std::int64_t system_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string format_timestamp(std::int64_t epoch_ms) {
  auto secs = static_cast<std::time_t>(epoch_ms / 1000);
  auto ms = epoch_ms % 1000;
  if (ms < 0) {
    ms += 1000;
    --secs;
  }
  std::tm tm{};
  ::gmtime_r(&secs, &tm);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900, tm.tm_mon + 1,
                     tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
}

json to_json(const Job& job) {
  json refs = json::array();
  for (const auto& r : job.result_refs) refs.push_back(ref_json(r));
  return {{"job_id", job.job_id},
          {"kind", kind_name(job.kind)},
          {"state", state_name(job.state)},
          {"sequence", job.sequence},
          {"created_at", job.created_at},
          {"started_at", optional_json(job.started_at)},
          {"finished_at", optional_json(job.finished_at)},
          {"params", job.params},
          {"input_refs", job.input_refs},
          {"result_refs", refs},
          {"error_message", optional_json(job.error_message)},
          {"notify_email", optional_json(job.notify_email)},
          {"notes", job.notes},
          {"attempts", job.attempts},
          {"notification_pending", job.notification_pending},
          {"notified_at", optional_json(job.notified_at)},
          {"results_expired", job.results_expired}};
}

Job job_from_json(const json& j) {
  Job job;
  job.job_id = j.at("job_id").get<std::string>();
  job.kind = kind_from_name(j.at("kind").get<std::string>());
  job.state = state_from_name(j.at("state").get<std::string>());
  job.sequence = j.at("sequence").get<std::uint64_t>();
  job.created_at = j.at("created_at").get<std::int64_t>();
  job.started_at = optional_from<std::int64_t>(j, "started_at");
  job.finished_at = optional_from<std::int64_t>(j, "finished_at");
  job.params = j.at("params");
  job.input_refs = j.at("input_refs").get<std::vector<std::string>>();
  for (const auto& r : j.at("result_refs")) job.result_refs.push_back(ref_from(r));
  job.error_message = optional_from<std::string>(j, "error_message");
  job.notify_email = optional_from<std::string>(j, "notify_email");
  job.notes = j.at("notes").get<std::vector<std::string>>();
  job.attempts = j.at("attempts").get<int>();
  job.notification_pending = j.at("notification_pending").get<bool>();
  job.notified_at = optional_from<std::int64_t>(j, "notified_at");
  job.results_expired = j.at("results_expired").get<bool>();
  return job;
}

// BlobStore ------------------------------------------------------------------

BlobStore::BlobStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "blobs");
}

ArtifactRef BlobStore::put(std::string name, std::string_view bytes) {
  ArtifactRef ref;
  ref.name = std::move(name);
  ref.sha256 = sha256_hex(bytes);
  ref.size = bytes.size();
  ref.path = fmt::format("blobs/{}/{}", ref.sha256.substr(0, 2), ref.sha256);
  const auto full = root_ / ref.path;
  std::error_code ec;
  if (fs::exists(full, ec) && fs::file_size(full, ec) == bytes.size()) return ref;
  fs::create_directories(full.parent_path());
  detail::write_file_atomic(full, bytes, true);
  return ref;
}

std::string BlobStore::get(const ArtifactRef& ref) const {
  const auto full = root_ / ref.path;
  std::string bytes;
  try {
    bytes = detail::read_file(full);
  } catch (const Error&) {
    throw Error(ErrorCode::kStoreCorrupt, fmt::format("missing stored file {}", ref.path));
  }
  if (bytes.size() != ref.size || sha256_hex(bytes) != ref.sha256) {
    throw Error(ErrorCode::kStoreCorrupt, fmt::format("checksum mismatch for {}", ref.path));
  }
  return bytes;
}

bool BlobStore::remove(const std::string& relative_path) {
  std::error_code ec;
  return fs::remove(root_ / relative_path, ec);
}

// JobStore -------------------------------------------------------------------

JobStore::JobStore(fs::path file, Clock clock, bool durable)
    : file_(std::move(file)), clock_(std::move(clock)), durable_(durable) {
  if (file_.has_parent_path()) fs::create_directories(file_.parent_path());
  load();
}

void JobStore::load() {
  std::error_code ec;
  if (!fs::exists(file_, ec)) return;
  const auto text = detail::read_file(file_);
  const auto newline = text.find('\n');
  if (newline == std::string::npos || text.compare(0, kStoreMagic.size(), kStoreMagic) != 0) {
    throw Error(ErrorCode::kStoreCorrupt, fmt::format("{}: missing store header", file_.string()));
  }
  const auto expected = text.substr(kStoreMagic.size(), newline - kStoreMagic.size());
  const std::string_view body = std::string_view(text).substr(newline + 1);
  if (sha256_hex(body) != expected) {
    throw Error(ErrorCode::kStoreCorrupt,
                fmt::format("{}: checksum mismatch (truncated or modified)", file_.string()));
  }
  try {
    const auto doc = json::parse(body);
    if (doc.at("version").get<int>() != kStoreVersion) {
      throw Error(ErrorCode::kStoreCorrupt, "unsupported store version");
    }
    next_sequence_ = doc.at("next_sequence").get<std::uint64_t>();
    for (const auto& c : doc.at("corpora")) {
      auto corpus = corpus_from(c);
      corpora_.emplace(corpus.corpus_id, std::move(corpus));
    }
    for (const auto& j : doc.at("jobs")) {
      jobs_.push_back(job_from_json(j));
      index_[jobs_.back().job_id] = jobs_.size() - 1;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kStoreCorrupt, fmt::format("{}: {}", file_.string(), e.what()));
  }
}

void JobStore::persist_locked() {
  json doc;
  doc["format"] = "framekit-store";
  doc["version"] = kStoreVersion;
  doc["next_sequence"] = next_sequence_;
  doc["corpora"] = json::array();
  for (const auto& [id, c] : corpora_) doc["corpora"].push_back(corpus_json(c));
  doc["jobs"] = json::array();
  for (const auto& j : jobs_) doc["jobs"].push_back(to_json(j));
  const auto body = doc.dump();
  const auto text = fmt::format("{}{}\n{}", kStoreMagic, sha256_hex(body), body);
  detail::write_file_atomic(file_, text, durable_);
}

StoredCorpus JobStore::add_corpus(StoredCorpus corpus) {
  const std::lock_guard lock(mutex_);
  corpus.created_at = clock_();
  corpora_[corpus.corpus_id] = corpus;
  persist_locked();
  return corpus;
}

std::optional<StoredCorpus> JobStore::find_corpus(const std::string& corpus_id) const {
  const std::lock_guard lock(mutex_);
  const auto it = corpora_.find(corpus_id);
  if (it == corpora_.end()) return std::nullopt;
  return it->second;
}

Job& JobStore::find_locked(const std::string& job_id) {
  const auto it = index_.find(job_id);
  if (it == index_.end()) {
    throw Error(ErrorCode::kUnknownJob, fmt::format("unknown job '{}'", job_id), "job_id");
  }
  return jobs_[it->second];
}

void JobStore::transition_locked(Job& job, JobState to) {
  if (!is_allowed_transition(job.state, to)) {
    throw Error(ErrorCode::kIllegalTransition,
                fmt::format("job {}: {} -> {} not allowed", job.job_id, state_name(job.state),
                            state_name(to)));
  }
  job.state = to;
}

Job JobStore::enqueue(JobKind kind, json params, std::vector<std::string> input_refs,
                      std::optional<std::string> notify_email) {
  Job job;
  job.kind = kind;
  job.params = std::move(params);
  job.input_refs = std::move(input_refs);
  job.notify_email = std::move(notify_email);
  const std::lock_guard lock(mutex_);
  // make_uuid() collisions are astronomically unlikely but cheap to rule out.
  do {
    job.job_id = make_uuid();
  } while (index_.count(job.job_id) != 0);
  job.sequence = next_sequence_++;
  job.created_at = clock_();
  jobs_.push_back(job);
  index_[job.job_id] = jobs_.size() - 1;
  persist_locked();
  return job;
}

std::optional<Job> JobStore::claim_next() {
  const std::lock_guard lock(mutex_);
  // jobs_ is kept in sequence order, so the first queued entry is the oldest.
  for (auto& job : jobs_) {
    if (job.state != JobState::kQueued) continue;
    transition_locked(job, JobState::kRunning);
    job.started_at = std::max(clock_(), job.created_at);
    ++job.attempts;
    persist_locked();
    return job;
  }
  return std::nullopt;
}

Job JobStore::complete(const std::string& job_id, std::vector<ArtifactRef> results) {
  if (results.empty()) {
    throw Error(ErrorCode::kIllegalTransition,
                fmt::format("job {}: succeeded requires result artifacts", job_id));
  }
  const std::lock_guard lock(mutex_);
  auto& job = find_locked(job_id);
  transition_locked(job, JobState::kSucceeded);
  job.result_refs = std::move(results);
  job.finished_at = std::max(clock_(), job.started_at.value_or(job.created_at));
  job.notification_pending = job.notify_email.has_value();
  persist_locked();
  return job;
}

Job JobStore::fail(const std::string& job_id, const std::string& message) {
  const std::lock_guard lock(mutex_);
  auto& job = find_locked(job_id);
  transition_locked(job, JobState::kFailed);
  job.error_message = message.empty() ? std::string("unknown error") : message;
  job.finished_at = std::max(clock_(), job.started_at.value_or(job.created_at));
  job.notification_pending = job.notify_email.has_value();
  persist_locked();
  return job;
}

std::size_t JobStore::recover() {
  const std::lock_guard lock(mutex_);
  std::size_t count = 0;
  const auto now = clock_();
  for (auto& job : jobs_) {
    if (job.state != JobState::kRunning) continue;
    transition_locked(job, JobState::kQueued);
    job.notes.push_back(fmt::format("{}: requeued after interrupted attempt {}",
                                    format_timestamp(now), job.attempts));
    job.started_at.reset();
    ++count;
  }
  if (count > 0) persist_locked();
  return count;
}

void JobStore::mark_notified(const std::string& job_id) {
  const std::lock_guard lock(mutex_);
  auto& job = find_locked(job_id);
  if (!job.notification_pending) return;
  job.notification_pending = false;
  job.notified_at = clock_();
  persist_locked();
}

Job JobStore::get(const std::string& job_id) const {
  const std::lock_guard lock(mutex_);
  return const_cast<JobStore*>(this)->find_locked(job_id);
}

std::vector<Job> JobStore::list() const {
  const std::lock_guard lock(mutex_);
  return jobs_;
}

std::vector<Job> JobStore::pending_notifications() const {
  const std::lock_guard lock(mutex_);
  std::vector<Job> out;
  for (const auto& job : jobs_) {
    if (job.notification_pending) out.push_back(job);
  }
  return out;
}

std::vector<std::string> JobStore::expire_results(std::int64_t cutoff_ms) {
  const std::lock_guard lock(mutex_);
  bool changed = false;
  std::set<std::string> candidates;
  for (auto& job : jobs_) {
    if (!is_terminal(job.state) || job.results_expired || !job.finished_at ||
        *job.finished_at >= cutoff_ms) {
      continue;
    }
    job.results_expired = true;
    changed = true;
    for (const auto& r : job.result_refs) candidates.insert(r.path);
  }
  if (!changed) return {};
  for (const auto& job : jobs_) {
    if (job.results_expired) continue;
    for (const auto& r : job.result_refs) candidates.erase(r.path);
  }
  for (const auto& [id, c] : corpora_) candidates.erase(c.blob.path);
  persist_locked();
  return {candidates.begin(), candidates.end()};
}

std::string JobStore::file_digest() const {
  const std::lock_guard lock(mutex_);
  std::error_code ec;
  if (!fs::exists(file_, ec)) return sha256_hex("");
  return sha256_hex(detail::read_file(file_));
}

}  // namespace framekit::jobs
