#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace framekit {

// Service settings. Precedence: environment (FRAMEKIT_<KEY>) > config file
// (JSON object with the same snake_case keys) > built-in default.
struct ServiceConfig {
  std::filesystem::path store_dir = "framekit-data";
  std::string host = "127.0.0.1";
  int port = 8080;
  int workers = 1;
  int artifact_ttl_days = 30;
  std::size_t max_upload_bytes = 50u * 1024u * 1024u;
  // Prefix for result links in notifications.
  std::string base_url = "http://localhost:8080";
  // Only "file" is implemented; "smtp" is recognized and rejected at startup.
  std::string notification_sink = "file";
  std::filesystem::path outbox_path;   // default: <store_dir>/outbox.jsonl
  std::filesystem::path registry_dir;  // default: <store_dir>/models
  std::filesystem::path static_dir;    // served at "/" when set
  std::string transformer_endpoint;    // external-transformer backend, optional
  std::string smtp_host;
  int smtp_port = 25;
  std::string smtp_from;

  std::filesystem::path resolved_outbox() const;
  std::filesystem::path resolved_registry() const;

  // Throws Error(kInvalidConfig) for unknown keys or bad values.
  static ServiceConfig load(const std::optional<std::filesystem::path>& file,
                            const std::map<std::string, std::string>& env);
  // FRAMEKIT_* variables from the process environment.
  static std::map<std::string, std::string> process_environment();
};

}  // namespace framekit
