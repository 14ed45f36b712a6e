#include "framekit/job_service.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <fmt/format.h>

#include "framekit/error.hpp"
#include "framekit/uuid.hpp"
#include "job_params.hpp"

namespace framekit::jobs {
namespace fs = std::filesystem;
using nlohmann::json;

std::string_view fault_point_name(FaultPoint point) {
  switch (point) {
    case FaultPoint::kAfterClaim: return "after_claim";
    case FaultPoint::kAfterExecute: return "after_execute";
    case FaultPoint::kAfterArtifacts: return "after_artifacts";
    case FaultPoint::kAfterTerminal: return "after_terminal";
    case FaultPoint::kAfterDelivery: return "after_delivery";
  }
  return "unknown";
}

// Parameter validation -------------------------------------------------------

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& message) {
  throw Error(ErrorCode::kInvalidParams, fmt::format("{}: {}", field, message), field);
}

class ParamReader {
 public:
  ParamReader(const json& params, std::string prefix = {})
      : params_(params), prefix_(std::move(prefix)) {
    if (!params_.is_object()) bad(prefix_.empty() ? "params" : prefix_, "must be a JSON object");
  }

  bool has(const char* key) const {
    return params_.contains(key) && !params_.at(key).is_null();
  }

  std::string string(const char* key, bool required) {
    seen_.push_back(key);
    if (!has(key)) {
      if (required) bad(name(key), "is required");
      return {};
    }
    const auto& v = params_.at(key);
    if (!v.is_string() || v.get<std::string>().empty()) bad(name(key), "must be a non-empty string");
    return v.get<std::string>();
  }

  std::optional<std::int64_t> integer(const char* key, std::int64_t min, std::int64_t max) {
    seen_.push_back(key);
    if (!has(key)) return std::nullopt;
    const auto& v = params_.at(key);
    if (!v.is_number_integer()) bad(name(key), "must be an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(max)) {
      bad(name(key), fmt::format("must be <= {}", max));
    }
    const auto i = v.get<std::int64_t>();
    if (i < min) bad(name(key), fmt::format("must be >= {}", min));
    if (i > max) bad(name(key), fmt::format("must be <= {}", max));
    return i;
  }

  std::optional<std::uint64_t> seed(const char* key) {
    seen_.push_back(key);
    if (!has(key)) return std::nullopt;
    const auto& v = params_.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      bad(name(key), "must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::optional<double> positive(const char* key) {
    seen_.push_back(key);
    if (!has(key)) return std::nullopt;
    const auto& v = params_.at(key);
    if (!v.is_number() || !(v.get<double>() > 0.0) || !std::isfinite(v.get<double>())) {
      bad(name(key), "must be a positive number");
    }
    return v.get<double>();
  }

  std::optional<double> number(const char* key) {
    seen_.push_back(key);
    if (!has(key)) return std::nullopt;
    const auto& v = params_.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) bad(name(key), "must be a number");
    return v.get<double>();
  }

  const json* raw(const char* key) {
    seen_.push_back(key);
    return has(key) ? &params_.at(key) : nullptr;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : params_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        bad(name(key.c_str()), "unknown parameter");
      }
    }
  }

  std::string name(const char* key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

 private:
  const json& params_;
  std::string prefix_;
  std::vector<std::string> seen_;
};

constexpr std::int64_t kMaxIterations = 1'000'000;
constexpr std::int64_t kMaxTopics = 1000;

json lda_common(ParamReader& r) {
  json out;
  out["corpus_id"] = r.string("corpus_id", true);
  out["keyword_count"] = r.integer("keyword_count", 1, 1000).value_or(10);
  out["iterations"] = r.integer("iterations", 1, kMaxIterations).value_or(1000);
  out["seed"] = r.seed("seed").value_or(42);
  const auto alpha = r.positive("alpha");
  out["alpha"] = alpha ? json(*alpha) : json(nullptr);
  out["beta"] = r.positive("beta").value_or(0.01);
  return out;
}

}  // namespace

lda::LdaConfig lda_config_from(const json& p, int num_topics) {
  lda::LdaConfig c;
  c.num_topics = num_topics;
  c.seed = p.at("seed").get<std::uint64_t>();
  c.iterations = p.at("iterations").get<int>();
  if (!p.at("alpha").is_null()) c.alpha = p.at("alpha").get<double>();
  c.beta = p.at("beta").get<double>();
  c.keyword_count = p.at("keyword_count").get<int>();
  return c;
}

classifier::TrainConfig train_config_from(const json& p) {
  classifier::TrainConfig c;
  c.epochs = p.at("epochs").get<int>();
  c.batch_size = p.at("batch_size").get<int>();
  if (!p.at("learning_rate").is_null()) c.learning_rate = p.at("learning_rate").get<double>();
  c.test_fraction = p.at("test_fraction").get<double>();
  c.seed = p.at("seed").get<std::uint64_t>();
  c.l2_penalty = p.at("l2_penalty").get<double>();
  return c;
}

json normalize_params(JobKind kind, const json& params) {
  ParamReader r(params);
  json out;
  switch (kind) {
    case JobKind::kLdaTrain: {
      out = lda_common(r);
      const auto k = r.integer("num_topics", 2, kMaxTopics);
      if (!k) bad("num_topics", "is required");
      out["num_topics"] = *k;
      break;
    }
    case JobKind::kLdaSweep: {
      out = lda_common(r);
      const auto* ks = r.raw("k_values");
      if (ks == nullptr) bad("k_values", "is required");
      if (!ks->is_array() || ks->empty()) bad("k_values", "must be a non-empty array");
      std::vector<std::int64_t> values;
      for (const auto& k : *ks) {
        if (!k.is_number_integer() || k.get<std::int64_t>() < 2 ||
            k.get<std::int64_t>() > kMaxTopics) {
          bad("k_values", fmt::format("entries must be integers in [2, {}]", kMaxTopics));
        }
        values.push_back(k.get<std::int64_t>());
      }
      out["k_values"] = values;
      break;
    }
    case JobKind::kClfTrain: {
      out["corpus_id"] = r.string("corpus_id", true);
      out["issue_name"] = r.string("issue_name", true);
      const auto test = r.string("test_corpus_id", false);
      out["test_corpus_id"] = test.empty() ? json(nullptr) : json(test);
      const auto model_id = r.string("model_id", false);
      if (!model_id.empty() && !classifier::ModelRegistry::is_valid_model_id(model_id)) {
        bad("model_id", "must match [A-Za-z0-9][A-Za-z0-9_.-]{0,127}");
      }
      out["model_id"] = model_id.empty() ? json(nullptr) : json(model_id);
      const auto backend = r.string("backend", false);
      try {
        out["backend"] = classifier::backend_name(
            backend.empty() ? classifier::Backend::kReferenceLinear
                            : classifier::backend_from_name(backend));
      } catch (const Error&) {
        bad("backend", "must be reference-linear or external-transformer");
      }
      static const json kEmpty = json::object();
      const auto* cfg = r.raw("config");
      ParamReader c(cfg ? *cfg : kEmpty, "config");
      classifier::TrainConfig defaults;
      json config;
      config["epochs"] = c.integer("epochs", 1, 10'000).value_or(defaults.epochs);
      config["batch_size"] = c.integer("batch_size", 1, 1'000'000).value_or(defaults.batch_size);
      const auto lr = c.positive("learning_rate");
      config["learning_rate"] = lr ? json(*lr) : json(nullptr);
      config["test_fraction"] = c.number("test_fraction").value_or(defaults.test_fraction);
      config["seed"] = c.seed("seed").value_or(defaults.seed);
      config["l2_penalty"] = c.number("l2_penalty").value_or(defaults.l2_penalty);
      c.reject_unknown();
      try {
        train_config_from(config).validate();
      } catch (const Error& e) {
        bad(c.name(e.field().c_str()), e.what());
      }
      out["config"] = config;
      break;
    }
    case JobKind::kClfPredict: {
      out["model_id"] = r.string("model_id", true);
      out["corpus_id"] = r.string("corpus_id", true);
      break;
    }
  }
  r.reject_unknown();
  return out;
}

// JobService -----------------------------------------------------------------

namespace {

JobServiceOptions with_defaults(JobServiceOptions o) {
  if (o.registry_dir.empty()) o.registry_dir = o.store_dir / "models";
  if (!o.sink) o.sink = std::make_shared<FileOutboxSink>(o.store_dir / "outbox.jsonl");
  if (!o.clock) o.clock = system_clock_ms;
  if (!o.sleeper) o.sleeper = real_sleep;
  return o;
}

bool plausible_email(const std::string& email) {
  if (email.empty() || email.size() > 320) return false;
  const auto at = email.find('@');
  if (at == std::string::npos || at == 0 || at + 1 == email.size()) return false;
  return std::none_of(email.begin(), email.end(), [](unsigned char c) {
    return c <= ' ' || c == 0x7f || c == '<' || c == '>' || c == ',';
  });
}

}  // namespace

JobService::JobService(JobServiceOptions options)
    : options_(with_defaults(std::move(options))),
      blobs_(options_.store_dir),
      store_(options_.store_dir / "jobs.store", options_.clock, options_.durable),
      registry_(options_.registry_dir, options_.install_demo_models),
      sink_(options_.sink),
      notifier_(*sink_, options_.retry, options_.sleeper, options_.clock) {}

void JobService::fault(FaultPoint point, const std::string& job_id) const {
  if (options_.fault_hook) options_.fault_hook(point, job_id);
}

CorpusSummary JobService::upload_corpus(std::string_view bytes, std::string source_name) {
  const auto corpus = parse_corpus(bytes, false, source_name);
  CorpusSummary summary;
  auto& c = summary.stored;
  c.corpus_id = make_uuid();
  c.blob = blobs_.put("corpus", bytes);
  c.source_name = std::move(source_name);
  c.rows = corpus.size();
  c.has_labels = corpus.has_labels();
  if (corpus.has_labels()) {
    c.label_counts = corpus.label_counts();
    summary.validation = classifier::validate_labeled_corpus(corpus);
  }
  c = store_.add_corpus(std::move(c));
  return summary;
}

StoredCorpus JobService::store_raw_corpus(std::string_view bytes, std::string source_name) {
  StoredCorpus c;
  c.corpus_id = make_uuid();
  c.blob = blobs_.put("corpus", bytes);
  c.source_name = std::move(source_name);
  return store_.add_corpus(std::move(c));
}

Corpus JobService::load_corpus(const std::string& corpus_id, bool require_labels) const {
  const auto stored = store_.find_corpus(corpus_id);
  if (!stored) {
    throw Error(ErrorCode::kUnknownCorpus, fmt::format("unknown corpus '{}'", corpus_id),
                "corpus_id");
  }
  return parse_corpus(blobs_.get(stored->blob), require_labels, stored->source_name);
}

EnqueueResult JobService::enqueue(JobKind kind, const json& params,
                                  std::optional<std::string> notify_email) {
  if (notify_email && !plausible_email(*notify_email)) {
    bad("notify_email", "must be an e-mail address");
  }
  auto normalized = normalize_params(kind, params);
  EnqueueResult result;
  std::vector<std::string> inputs;
  for (const char* key : {"corpus_id", "test_corpus_id"}) {
    if (!normalized.contains(key) || normalized.at(key).is_null()) continue;
    const auto id = normalized.at(key).get<std::string>();
    if (!store_.find_corpus(id)) {
      throw Error(ErrorCode::kUnknownCorpus, fmt::format("unknown corpus '{}'", id), key);
    }
    inputs.push_back(id);
  }
  if (kind == JobKind::kClfPredict) {
    const auto model_id = normalized.at("model_id").get<std::string>();
    if (!registry_.contains(model_id)) {
      throw Error(ErrorCode::kUnknownModelId, fmt::format("unknown model '{}'", model_id),
                  "model_id");
    }
  }
  if (kind == JobKind::kClfTrain) {
    for (const auto& id : inputs) {
      const auto report = classifier::validate_labeled_corpus(load_corpus(id, false));
      if (!report.ok()) {
        std::string message;
        for (const auto& f : report.failures) message += (message.empty() ? "" : "; ") + f;
        throw Error(ErrorCode::kValidationFailed, message,
                    id == inputs.front() ? "corpus_id" : "test_corpus_id");
      }
      if (id == inputs.front()) result.warnings = report.warnings;
    }
    if (normalized.at("backend") == "external-transformer" &&
        options_.transformer_endpoint.empty()) {
      throw Error(ErrorCode::kBackendUnavailable, "no external-transformer endpoint configured",
                  "backend");
    }
  }
  result.job_id =
      store_.enqueue(kind, std::move(normalized), std::move(inputs), std::move(notify_email))
          .job_id;
  return result;
}

std::optional<std::string> JobService::run_worker_step() {
  const auto claimed = store_.claim_next();
  if (!claimed) {
    deliver_pending_notifications();
    return std::nullopt;
  }
  const auto& id = claimed->job_id;
  fault(FaultPoint::kAfterClaim, id);

  std::vector<ArtifactRef> refs;
  std::optional<std::string> failure;
  try {
    const auto entries = execute(*claimed);
    fault(FaultPoint::kAfterExecute, id);
    for (const auto& e : entries) refs.push_back(blobs_.put(e.name, e.data));
    fault(FaultPoint::kAfterArtifacts, id);
  } catch (const SimulatedCrash&) {
    throw;
  } catch (const Error& e) {
    failure = fmt::format("{}: {}", e.code_name(), e.what());
  } catch (const std::exception& e) {
    failure = fmt::format("internal_error: {}", e.what());
  }
  if (failure) {
    store_.fail(id, *failure);
  } else {
    store_.complete(id, std::move(refs));
  }
  fault(FaultPoint::kAfterTerminal, id);
  notify_job(id);
  return id;
}

std::size_t JobService::drain() {
  std::size_t n = 0;
  while (run_worker_step()) ++n;
  return n;
}

std::size_t JobService::recover_on_startup() { return store_.recover(); }

void JobService::notify_job(const std::string& job_id) {
  const auto job = store_.get(job_id);
  if (!job.notification_pending) return;
  try {
    notifier_.notify(make_event(job, options_.base_url));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kSinkUnavailable) throw;
    std::fprintf(stderr, "framekit: %s\n", e.what());
    return;  // stays pending; retried later
  }
  fault(FaultPoint::kAfterDelivery, job_id);
  store_.mark_notified(job_id);
}

std::size_t JobService::deliver_pending_notifications() {
  std::size_t delivered = 0;
  for (const auto& job : store_.pending_notifications()) {
    notify_job(job.job_id);
    if (!store_.get(job.job_id).notification_pending) ++delivered;
  }
  return delivered;
}

std::string JobService::results_zip(const std::string& job_id) const {
  const auto job = store_.get(job_id);
  if (job.state != JobState::kSucceeded) {
    throw Error(ErrorCode::kResultsNotReady,
                fmt::format("job {} is {}", job_id, state_name(job.state)), "job_id");
  }
  if (job.results_expired) {
    throw Error(ErrorCode::kResultsExpired,
                fmt::format("results of job {} have expired", job_id), "job_id");
  }
  std::vector<zip::Entry> entries;
  for (const auto& ref : job.result_refs) entries.push_back({ref.name, blobs_.get(ref)});
  return zip::write_archive(entries);
}

std::size_t JobService::sweep_expired() {
  const auto cutoff =
      options_.clock() - static_cast<std::int64_t>(options_.artifact_ttl_days) * 86'400'000;
  const auto paths = store_.expire_results(cutoff);
  for (const auto& p : paths) blobs_.remove(p);
  return paths.size();
}

// WorkerPool -----------------------------------------------------------------

WorkerPool::WorkerPool(JobService& service, int workers, std::chrono::milliseconds idle_wait)
    : service_(service), idle_wait_(idle_wait) {
  for (int i = 0; i < std::max(1, workers); ++i) {
    threads_.emplace_back([this] {
      while (!stop_.load()) {
        bool worked = false;
        try {
          worked = service_.run_worker_step().has_value();
        } catch (const std::exception& e) {
          std::fprintf(stderr, "framekit: worker: %s\n", e.what());
        }
        if (!worked) {
          const auto until = std::chrono::steady_clock::now() + idle_wait_;
          while (!stop_.load() && std::chrono::steady_clock::now() < until) {
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
          }
        }
      }
    });
  }
}

WorkerPool::~WorkerPool() { stop(); }

void WorkerPool::stop() {
  stop_.store(true);
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
}

}  // namespace framekit::jobs
