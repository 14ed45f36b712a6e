#include "api_harness.hpp"

#include <regex>
#include <stdexcept>

#include <fmt/format.h>

#include "framekit/hash.hpp"
#include "framekit/uuid.hpp"
#include "framekit/zip.hpp"

namespace framekit::testing {
namespace fs = std::filesystem;
using nlohmann::json;

ApiHarness::ApiHarness(HarnessOptions options) {
  jobs::JobServiceOptions o;
  o.store_dir = options.store_dir.empty() ? dir_.path() : options.store_dir;
  o.durable = false;
  o.base_url = "http://framekit.test";
  if (options.clock) {
    o.clock = options.clock;
  } else {
    o.clock = [offset = offset_ms_] { return jobs::system_clock_ms() + offset->load(); };
  }
  if (options.sink) o.sink = options.sink;
  o.sleeper = [](std::chrono::milliseconds) {};
  service_ = std::make_unique<jobs::JobService>(std::move(o));
  service_->recover_on_startup();

  api::ServerOptions so;
  so.max_upload_bytes = options.max_upload_bytes;
  server_ = std::make_unique<api::Server>(*service_, so);
  port_ = server_->bind_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("cannot bind test server");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  client_->set_read_timeout(120, 0);
}

ApiHarness::~ApiHarness() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string ApiHarness::upload(const std::string& content, const std::string& filename) {
  httplib::MultipartFormDataItems items{{"file", content, filename, "text/csv"}};
  const auto res = client_->Post("/api/corpora", items);
  if (!res || res->status != 200) {
    throw std::runtime_error("upload failed: " + (res ? res->body : std::string("no reply")));
  }
  return json::parse(res->body).at("corpus_id").get<std::string>();
}

bool GoldenReport::all_passed() const { return failures() == 0 && !cases.empty(); }

std::size_t GoldenReport::failures() const {
  std::size_t n = 0;
  for (const auto& c : cases) n += c.passed ? 0 : 1;
  return n;
}

// Matching ------------------------------------------------------------------

namespace {

bool is_hex(const std::string& s, std::size_t len) {
  return s.size() == len && s.find_first_not_of("0123456789abcdef") == std::string::npos;
}

bool fail(std::string* why, const std::string& where, const std::string& msg) {
  if (why) *why = where + ": " + msg;
  return false;
}

bool placeholder_matches(const std::string& p, const json& actual) {
  static const std::regex timestamp(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}\.\d{3}Z)");
  static const std::regex blob(R"(blobs/[0-9a-f]{2}/[0-9a-f]{64})");
  if (p == "<any>") return true;
  if (p == "<number>") return actual.is_number();
  if (p == "<int>") return actual.is_number_integer();
  if (!actual.is_string()) return false;
  const auto& s = actual.get_ref<const std::string&>();
  if (p == "<string>") return true;
  if (p == "<nonempty>") return !s.empty();
  if (p == "<uuid>") return is_uuid(s);
  if (p == "<sha256>") return is_hex(s, 64);
  if (p == "<timestamp>") return std::regex_match(s, timestamp);
  if (p == "<blob>") return std::regex_match(s, blob);
  if (p.rfind("<contains:", 0) == 0) {
    return s.find(p.substr(10, p.size() - 11)) != std::string::npos;
  }
  return false;
}

bool is_placeholder(const json& j) {
  if (!j.is_string()) return false;
  const auto& s = j.get_ref<const std::string&>();
  return s.size() > 2 && s.front() == '<' && s.back() == '>';
}

}  // namespace

bool json_matches(const json& expected, const json& actual, std::string* why,
                  const std::string& where) {
  if (is_placeholder(expected)) {
    return placeholder_matches(expected.get<std::string>(), actual) ||
           fail(why, where, fmt::format("{} does not match {}", actual.dump(), expected.dump()));
  }
  if (expected.is_object()) {
    if (!actual.is_object()) return fail(why, where, "expected an object, got " + actual.dump());
    for (const auto& [k, v] : expected.items()) {
      if (!actual.contains(k)) return fail(why, where, "missing key '" + k + "'");
      if (!json_matches(v, actual.at(k), why, where + "." + k)) return false;
    }
    for (const auto& [k, v] : actual.items()) {
      if (!expected.contains(k)) return fail(why, where, "unexpected key '" + k + "'");
    }
    return true;
  }
  if (expected.is_array()) {
    if (!actual.is_array()) return fail(why, where, "expected an array, got " + actual.dump());
    if (expected.size() != actual.size()) {
      return fail(why, where,
                  fmt::format("expected {} elements, got {}", expected.size(), actual.size()));
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (!json_matches(expected[i], actual[i], why, fmt::format("{}[{}]", where, i))) {
        return false;
      }
    }
    return true;
  }
  if (expected.is_number() && actual.is_number()) {
    if (expected.get<double>() == actual.get<double>()) return true;
    return fail(why, where, fmt::format("expected {}, got {}", expected.dump(), actual.dump()));
  }
  return expected == actual ||
         fail(why, where, fmt::format("expected {}, got {}", expected.dump(), actual.dump()));
}

// Replay --------------------------------------------------------------------

namespace {

using Vars = std::map<std::string, std::string>;

std::string substitute(std::string s, const Vars& vars) {
  for (const auto& [k, v] : vars) {
    const auto key = "{{" + k + "}}";
    for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + v.size())) {
      s.replace(pos, key.size(), v);
    }
  }
  return s;
}

json substitute(const json& j, const Vars& vars) {
  if (j.is_string()) return substitute(j.get<std::string>(), vars);
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : j.items()) out[k] = substitute(v, vars);
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(substitute(v, vars));
    return out;
  }
  return j;
}

// Replaces run-specific values so a recorded response can serve as golden.
json generalize(const json& j) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    json probe = s;
    for (const char* p : {"<uuid>", "<sha256>", "<timestamp>", "<blob>"}) {
      if (placeholder_matches(p, probe)) return p;
    }
    return j;
  }
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : j.items()) out[k] = generalize(v);
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(generalize(v));
    return out;
  }
  return j;
}

std::string multipart_content(const json& part, const fs::path& base) {
  if (part.contains("content")) return part.at("content").get<std::string>();
  if (part.contains("file")) return read_text(base / part.at("file").get<std::string>());
  if (part.contains("repeat")) {
    std::string out = part.at("repeat").value("header", "");
    const auto text = part.at("repeat").at("text").get<std::string>();
    const auto times = part.at("repeat").at("times").get<std::size_t>();
    for (std::size_t i = 0; i < times; ++i) out += text;
    return out;
  }
  throw std::runtime_error("multipart part needs content, file or repeat");
}

httplib::Result send(httplib::Client& client, const json& req, const Vars& vars,
                     const fs::path& base) {
  const auto method = req.at("method").get<std::string>();
  const auto path = substitute(req.at("path").get<std::string>(), vars);
  if (method == "GET") return client.Get(path);
  if (method != "POST") throw std::runtime_error("unsupported method " + method);
  if (req.contains("multipart")) {
    httplib::MultipartFormDataItems items;
    for (const auto& part : req.at("multipart")) {
      items.push_back({part.at("name").get<std::string>(), multipart_content(part, base),
                       part.value("filename", ""), part.value("content_type", "text/csv")});
    }
    return client.Post(path, items);
  }
  if (req.contains("json")) {
    return client.Post(path, substitute(req.at("json"), vars).dump(), "application/json");
  }
  return client.Post(path, substitute(req.value("raw", ""), vars),
                     req.value("content_type", "application/json"));
}

std::string content_type(const httplib::Response& res) {
  auto ct = res.get_header_value("Content-Type");
  return ct.substr(0, ct.find(';'));
}

}  // namespace

GoldenReport run_golden_suite(ApiHarness& harness, const fs::path& file) {
  GoldenReport report;
  const auto suite = json::parse(read_text(file));
  report.recorded = suite;
  const auto base = file.parent_path();
  Vars vars;

  auto& steps = report.recorded.at("cases");
  for (auto& step : steps) {
    GoldenCaseResult result;
    result.name = step.at("name").get<std::string>();
    try {
      if (step.contains("action")) {
        const auto action = step.at("action").get<std::string>();
        if (action == "drain") {
          harness.drain();
        } else if (action == "advance_clock") {
          harness.advance_clock(std::chrono::hours(24 * step.at("days").get<int>()));
        } else if (action == "sweep_expired") {
          harness.service().sweep_expired();
        } else {
          throw std::runtime_error("unknown action " + action);
        }
        result.passed = true;
        report.cases.push_back(result);
        continue;
      }
      const auto& req = step.at("request");
      const auto res = send(harness.client(), req, vars, base);
      if (!res) throw std::runtime_error("no response: " + httplib::to_string(res.error()));

      const auto ct = content_type(*res);
      json body = nullptr;
      json observed{{"status", res->status}, {"content_type", ct}};
      if (ct == "application/json") {
        body = json::parse(res->body);
        observed["body"] = body;
      } else if (ct == "application/zip") {
        json names = json::array();
        for (const auto& e : zip::read_archive(res->body)) names.push_back(e.name);
        observed["zip_entries"] = names;
        observed["sha256"] = sha256_hex(res->body);
      } else {
        observed["sha256"] = sha256_hex(res->body);
      }
      report.transcript.push_back({{"name", result.name},
                                   {"method", req.at("method")},
                                   {"path", substitute(req.at("path").get<std::string>(), vars)},
                                   {"status", res->status},
                                   {"content_type", ct},
                                   {"body", body}});

      if (step.contains("capture")) {
        for (const auto& [var, pointer] : step.at("capture").items()) {
          const auto p = pointer.get<std::string>();
          vars[var] = p == "@sha256" ? observed.at("sha256").get<std::string>()
                                     : observed.at("body").at(json::json_pointer(p)).get<std::string>();
        }
      }

      if (!step.contains("response")) {
        step["response"] = generalize(observed);
        result.detail = "recorded";
        result.passed = false;
      } else {
        const auto expected = substitute(step.at("response"), vars);
        std::string why;
        result.passed = json_matches(expected, observed, &why);
        result.detail = why;
      }
    } catch (const std::exception& e) {
      result.passed = false;
      result.detail = e.what();
    }
    report.cases.push_back(result);
  }
  return report;
}

}  // namespace framekit::testing
