#include "framekit/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "framekit/error.hpp"

extern char** environ;

namespace framekit {
namespace {

using nlohmann::json;

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::kInvalidConfig, fmt::format("{}: '{}' is not a number", key, text), key);
  }
  return value;
}

struct Field {
  std::function<void(ServiceConfig&, const std::string&)> from_string;
};

std::map<std::string, Field> fields() {
  auto text = [](std::string ServiceConfig::*member) {
    return Field{[member](ServiceConfig& c, const std::string& v) { c.*member = v; }};
  };
  auto path = [](std::filesystem::path ServiceConfig::*member) {
    return Field{[member](ServiceConfig& c, const std::string& v) { c.*member = v; }};
  };
  auto integer = [](std::string key, int ServiceConfig::*member) {
    return Field{[key, member](ServiceConfig& c, const std::string& v) {
      c.*member = parse_number<int>(key, v);
    }};
  };
  return {
      {"store_dir", path(&ServiceConfig::store_dir)},
      {"host", text(&ServiceConfig::host)},
      {"port", integer("port", &ServiceConfig::port)},
      {"workers", integer("workers", &ServiceConfig::workers)},
      {"artifact_ttl_days", integer("artifact_ttl_days", &ServiceConfig::artifact_ttl_days)},
      {"max_upload_bytes",
       Field{[](ServiceConfig& c, const std::string& v) {
         c.max_upload_bytes = parse_number<std::size_t>("max_upload_bytes", v);
       }}},
      {"base_url", text(&ServiceConfig::base_url)},
      {"notification_sink", text(&ServiceConfig::notification_sink)},
      {"outbox_path", path(&ServiceConfig::outbox_path)},
      {"registry_dir", path(&ServiceConfig::registry_dir)},
      {"static_dir", path(&ServiceConfig::static_dir)},
      {"transformer_endpoint", text(&ServiceConfig::transformer_endpoint)},
      {"smtp_host", text(&ServiceConfig::smtp_host)},
      {"smtp_port", integer("smtp_port", &ServiceConfig::smtp_port)},
      {"smtp_from", text(&ServiceConfig::smtp_from)},
  };
}

std::string env_name(const std::string& key) {
  std::string out = "FRAMEKIT_";
  for (const char c : key) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  return out;
}

void check(const ServiceConfig& c) {
  if (c.port < 0 || c.port > 65535) {
    throw Error(ErrorCode::kInvalidConfig, "port must be in 0..65535", "port");
  }
  if (c.workers < 1) throw Error(ErrorCode::kInvalidConfig, "workers must be >= 1", "workers");
  if (c.artifact_ttl_days < 1) {
    throw Error(ErrorCode::kInvalidConfig, "artifact_ttl_days must be >= 1", "artifact_ttl_days");
  }
  if (c.max_upload_bytes == 0) {
    throw Error(ErrorCode::kInvalidConfig, "max_upload_bytes must be > 0", "max_upload_bytes");
  }
  if (c.notification_sink != "file" && c.notification_sink != "smtp") {
    throw Error(ErrorCode::kInvalidConfig,
                fmt::format("unknown notification_sink '{}'", c.notification_sink),
                "notification_sink");
  }
}

}  // namespace

std::filesystem::path ServiceConfig::resolved_outbox() const {
  return outbox_path.empty() ? store_dir / "outbox.jsonl" : outbox_path;
}

std::filesystem::path ServiceConfig::resolved_registry() const {
  return registry_dir.empty() ? store_dir / "models" : registry_dir;
}

ServiceConfig ServiceConfig::load(const std::optional<std::filesystem::path>& file,
                                  const std::map<std::string, std::string>& env) {
  ServiceConfig config;
  const auto table = fields();

  if (file) {
    std::ifstream in(*file);
    if (!in) {
      throw Error(ErrorCode::kInvalidConfig,
                  fmt::format("cannot read config file {}", file->string()), "config");
    }
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kInvalidConfig,
                  fmt::format("config file {}: {}", file->string(), e.what()), "config");
    }
    if (!doc.is_object()) {
      throw Error(ErrorCode::kInvalidConfig, "config file must hold a JSON object", "config");
    }
    for (const auto& [key, value] : doc.items()) {
      const auto it = table.find(key);
      if (it == table.end()) {
        throw Error(ErrorCode::kInvalidConfig, fmt::format("unknown config key '{}'", key), key);
      }
      it->second.from_string(config, value.is_string() ? value.get<std::string>() : value.dump());
    }
  }

  for (const auto& [key, field] : table) {
    const auto it = env.find(env_name(key));
    if (it != env.end()) field.from_string(config, it->second);
  }

  check(config);
  return config;
}

std::map<std::string, std::string> ServiceConfig::process_environment() {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    const std::string_view entry(*e);
    if (!entry.starts_with("FRAMEKIT_")) continue;
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace(std::string(entry.substr(0, eq)), std::string(entry.substr(eq + 1)));
  }
  return env;
}

}  // namespace framekit
