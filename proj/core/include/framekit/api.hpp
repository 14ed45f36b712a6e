#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "framekit/error.hpp"
#include "framekit/job_service.hpp"

namespace framekit::api {

// Body of every non-2xx response.
struct ApiError {
  int http_status = 500;
  std::string code;
  std::string message;
  std::optional<std::string> field;

  nlohmann::json to_json() const;
  static ApiError from(const Error& error);
};

int http_status_for(ErrorCode code);

// Public job snapshot; timestamps rendered as ISO-8601 UTC.
nlohmann::json job_to_json(const jobs::Job& job, const std::string& base_url);

struct ServerOptions {
  std::size_t max_upload_bytes = 50u * 1024u * 1024u;
  std::filesystem::path static_dir;  // served at "/" when non-empty
};

class Server {
 public:
  Server(jobs::JobService& service, ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Blocks until stop().
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it; serve with listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace framekit::api
