#include "framekit/api.hpp"

#include <httplib.h>

#include <fmt/format.h>

#include "framekit/uuid.hpp"

namespace framekit::api {
using nlohmann::json;

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownJob:
    case ErrorCode::kUnknownCorpus:
    case ErrorCode::kUnknownModelId:
      return 404;
    case ErrorCode::kResultsNotReady:
      return 409;
    case ErrorCode::kResultsExpired:
      return 410;
    case ErrorCode::kBackendUnavailable:
    case ErrorCode::kSinkUnavailable:
      return 503;
    case ErrorCode::kStoreCorrupt:
    case ErrorCode::kIoError:
    case ErrorCode::kIllegalTransition:
      return 500;
    default:
      return 400;
  }
}

json ApiError::to_json() const {
  return {{"http_status", http_status},
          {"code", code},
          {"message", message},
          {"field", field ? json(*field) : json(nullptr)}};
}

ApiError ApiError::from(const Error& error) {
  ApiError e;
  e.http_status = http_status_for(error.code());
  e.code = std::string(error.code_name());
  e.message = error.what();
  if (!error.field().empty()) e.field = error.field();
  return e;
}

json job_to_json(const jobs::Job& job, const std::string& base_url) {
  const auto ts = [](const std::optional<std::int64_t>& v) {
    return v ? json(jobs::format_timestamp(*v)) : json(nullptr);
  };
  json refs = json::array();
  for (const auto& r : job.result_refs) {
    refs.push_back({{"name", r.name}, {"path", r.path}, {"sha256", r.sha256}, {"size", r.size}});
  }
  auto base = base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  const bool ready = job.state == jobs::JobState::kSucceeded && !job.results_expired;
  return {{"job_id", job.job_id},
          {"kind", jobs::kind_name(job.kind)},
          {"state", jobs::state_name(job.state)},
          {"created_at", jobs::format_timestamp(job.created_at)},
          {"started_at", ts(job.started_at)},
          {"finished_at", ts(job.finished_at)},
          {"params", job.params},
          {"input_refs", job.input_refs},
          {"result_refs", refs},
          {"error_message", job.error_message ? json(*job.error_message) : json(nullptr)},
          {"notify_email", job.notify_email ? json(*job.notify_email) : json(nullptr)},
          {"notes", job.notes},
          {"results_expired", job.results_expired},
          {"results_url",
           ready ? json(fmt::format("{}/api/jobs/{}/results", base, job.job_id)) : json(nullptr)}};
}

namespace {

constexpr const char* kJson = "application/json";

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void send_error(httplib::Response& res, const ApiError& e) {
  send_json(res, e.http_status, e.to_json());
}

void send_error(httplib::Response& res, int status, std::string code, std::string message,
                std::optional<std::string> field = std::nullopt) {
  send_error(res, ApiError{status, std::move(code), std::move(message), std::move(field)});
}

std::string status_code_name(int status) {
  switch (status) {
    case 400: return "bad_request";
    case 404: return "not_found";
    case 405: return "method_not_allowed";
    case 413: return "payload_too_large";
    case 414: return "uri_too_long";
    case 415: return "unsupported_media_type";
    default: return status >= 500 ? "internal_error" : "http_error";
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) throw Error(ErrorCode::kInvalidParams, "request body is empty", "body");
  auto body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    throw Error(ErrorCode::kInvalidParams, "request body must be a JSON object", "body");
  }
  return body;
}

std::optional<std::string> take_email(json& body) {
  if (!body.contains("notify_email")) return std::nullopt;
  auto v = body.at("notify_email");
  body.erase("notify_email");
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) {
    throw Error(ErrorCode::kInvalidParams, "notify_email must be a string", "notify_email");
  }
  return v.get<std::string>();
}

}  // namespace

struct Server::Impl {
  Impl(jobs::JobService& s, ServerOptions o) : service(s), options(std::move(o)) {
    routes();
  }

  template <typename F>
  httplib::Server::Handler guarded(F f) {
    return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const Error& e) {
        send_error(res, ApiError::from(e));
      } catch (const std::exception& e) {
        send_error(res, 500, "internal_error", e.what());
      }
    };
  }

  void routes() {
    // Multipart framing adds a little on top of the file itself.
    http.set_payload_max_length(options.max_upload_bytes + 64 * 1024);

    http.Post("/api/corpora", guarded([this](const auto& req, auto& res) { upload(req, res); }));
    http.Post("/api/lda", guarded([this](const auto& req, auto& res) {
                submit(req, res, jobs::JobKind::kLdaTrain, {});
              }));
    http.Post("/api/lda/sweep", guarded([this](const auto& req, auto& res) {
                submit(req, res, jobs::JobKind::kLdaSweep, {});
              }));
    http.Post("/api/classifiers/train", guarded([this](const auto& req, auto& res) {
                submit(req, res, jobs::JobKind::kClfTrain, {});
              }));
    http.Post(R"(/api/classifiers/([^/]+)/predict)",
              guarded([this](const auto& req, auto& res) {
                submit(req, res, jobs::JobKind::kClfPredict, req.matches[1].str());
              }));
    http.Get(R"(/api/jobs/([^/]+))", guarded([this](const auto& req, auto& res) {
               const auto id = job_id(req);
               send_json(res, 200, job_to_json(service.get_job(id), service.options().base_url));
             }));
    http.Get(R"(/api/jobs/([^/]+)/results)", guarded([this](const auto& req, auto& res) {
               const auto id = job_id(req);
               res.status = 200;
               res.set_header("Content-Disposition",
                              fmt::format("attachment; filename=\"{}-results.zip\"", id));
               res.set_content(service.results_zip(id), "application/zip");
             }));
    http.Get("/api/models", guarded([this](const auto&, auto& res) {
               json models = json::array();
               for (const auto& e : service.registry().list()) {
                 models.push_back({{"model_id", e.model_id},
                                   {"issue_name", e.issue_name},
                                   {"labels", e.labels},
                                   {"backend", classifier::backend_name(e.backend)},
                                   {"accuracy", e.accuracy},
                                   {"test_size", e.test_size},
                                   {"sha256", e.sha256}});
               }
               send_json(res, 200, {{"models", models}});
             }));
    http.Get(R"(/api/models/([^/]+)/download)", guarded([this](const auto& req, auto& res) {
               const auto id = req.matches[1].str();
               const auto bytes = service.registry().read_artifact(id);
               res.status = 200;
               res.set_header("Content-Disposition",
                              fmt::format("attachment; filename=\"{}.fkm\"", id));
               res.set_content(bytes, "application/octet-stream");
             }));

    if (!options.static_dir.empty()) http.set_mount_point("/", options.static_dir.string());

    http.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty() && res.get_header_value("Content-Type") == kJson) return;
      std::string message = res.status == 413 ? "upload exceeds the configured size cap"
                            : res.status == 404
                                ? fmt::format("no route for {} {}", req.method, req.path)
                                : std::string(httplib::status_message(res.status));
      send_error(res, res.status, status_code_name(res.status), std::move(message));
    });
    http.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
          send_error(res, 500, "internal_error", "unexpected server error");
        });
  }

  static std::string job_id(const httplib::Request& req) {
    auto id = req.matches[1].str();
    if (!is_uuid(id)) {
      throw Error(ErrorCode::kUnknownJob, fmt::format("unknown job '{}'", id), "job_id");
    }
    return id;
  }

  void upload(const httplib::Request& req, httplib::Response& res) {
    if (!req.is_multipart_form_data() || !req.has_file("file")) {
      throw Error(ErrorCode::kInvalidParams, "expected a multipart file part named \"file\"",
                  "file");
    }
    const auto file = req.get_file_value("file");
    if (file.content.size() > options.max_upload_bytes) {
      send_error(res, 413, "payload_too_large",
                 fmt::format("file is {} bytes; the limit is {}", file.content.size(),
                             options.max_upload_bytes),
                 "file");
      return;
    }
    const auto summary =
        service.upload_corpus(file.content, file.filename.empty() ? "upload" : file.filename);
    const auto& c = summary.stored;
    json body{{"corpus_id", c.corpus_id},
              {"rows", c.rows.value_or(0)},
              {"has_labels", c.has_labels},
              {"source_name", c.source_name},
              {"sha256", c.blob.sha256}};
    if (summary.validation) {
      const auto& v = *summary.validation;
      body["label_counts"] = c.label_counts;
      body["validation"] = {{"ok", v.ok()},
                            {"warn_labels", v.warn_labels},
                            {"warnings", v.warnings},
                            {"failures", v.failures}};
    }
    send_json(res, 200, body);
  }

  void submit(const httplib::Request& req, httplib::Response& res, jobs::JobKind kind,
              std::optional<std::string> model_id) {
    auto body = parse_body(req);
    auto email = take_email(body);
    if (model_id) {
      if (body.contains("model_id")) {
        throw Error(ErrorCode::kInvalidParams, "model_id comes from the path", "model_id");
      }
      body["model_id"] = *model_id;
    }
    const auto result = service.enqueue(kind, body, std::move(email));
    json out{{"job_id", result.job_id}};
    if (kind == jobs::JobKind::kClfTrain) out["warnings"] = result.warnings;
    send_json(res, 202, out);
  }

  jobs::JobService& service;
  ServerOptions options;
  httplib::Server http;
};

Server::Server(jobs::JobService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

Server::~Server() { stop(); }

bool Server::listen(const std::string& host, int port) { return impl_->http.listen(host, port); }

int Server::bind_any_port(const std::string& host) { return impl_->http.bind_to_any_port(host); }

bool Server::listen_after_bind() { return impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_) impl_->http.stop();
}

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

}  // namespace framekit::api
