#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "framekit/jobs.hpp"

namespace framekit::jobs {

struct NotificationEvent {
  std::string event_id;  // "<job_id>:<state>", one per terminal transition
  std::string job_id;
  std::string state;
  std::string recipient;
  std::string subject;
  std::string body;
  std::string sent_at;
};

nlohmann::json to_json(const NotificationEvent& event);
NotificationEvent event_from_json(const nlohmann::json& j);

// Event for a job that has reached a terminal state. The body carries
// `<base_url>/api/jobs/<id>/results` for successes and the job status link
// plus the error for failures.
NotificationEvent make_event(const Job& job, const std::string& base_url);

struct DeliveryRecord {
  std::string event_id;
  int attempts = 0;
  bool duplicate = false;  // the sink already held this event
};

class NotificationSink {
 public:
  virtual ~NotificationSink() = default;
  // Returns false when an event with the same id was already delivered.
  // Throws Error(kSinkUnavailable) on transient failure.
  virtual bool deliver(const NotificationEvent& event) = 0;
};

// Appends one JSON line per event to a file. Deduplicates by event_id, so
// redelivery after a crash is harmless.
class FileOutboxSink : public NotificationSink {
 public:
  explicit FileOutboxSink(std::filesystem::path path);
  bool deliver(const NotificationEvent& event) override;
  const std::filesystem::path& path() const { return path_; }

  static std::vector<NotificationEvent> read_all(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
void real_sleep(std::chrono::milliseconds d);

class Notifier {
 public:
  Notifier(NotificationSink& sink, RetryPolicy policy = {}, Sleeper sleeper = real_sleep,
           Clock clock = system_clock_ms);

  // Stamps sent_at and delivers with exponential backoff. Throws
  // Error(kSinkUnavailable) once max_attempts is exhausted.
  DeliveryRecord notify(NotificationEvent event);

 private:
  NotificationSink& sink_;
  RetryPolicy policy_;
  Sleeper sleeper_;
  Clock clock_;
};

}  // namespace framekit::jobs
