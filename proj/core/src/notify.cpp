#include "framekit/notify.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include <fmt/format.h>

#include "framekit/error.hpp"
#include "fsutil.hpp"

namespace framekit::jobs {
namespace fs = std::filesystem;
using nlohmann::json;

json to_json(const NotificationEvent& e) {
  return {{"event_id", e.event_id}, {"job_id", e.job_id},   {"state", e.state},
          {"recipient", e.recipient}, {"subject", e.subject}, {"body", e.body},
          {"sent_at", e.sent_at}};
}

NotificationEvent event_from_json(const json& j) {
  NotificationEvent e;
  e.event_id = j.at("event_id").get<std::string>();
  e.job_id = j.at("job_id").get<std::string>();
  e.state = j.at("state").get<std::string>();
  e.recipient = j.at("recipient").get<std::string>();
  e.subject = j.at("subject").get<std::string>();
  e.body = j.at("body").get<std::string>();
  e.sent_at = j.at("sent_at").get<std::string>();
  return e;
}

NotificationEvent make_event(const Job& job, const std::string& base_url) {
  NotificationEvent e;
  e.job_id = job.job_id;
  e.state = std::string(state_name(job.state));
  e.event_id = fmt::format("{}:{}", job.job_id, e.state);
  e.recipient = job.notify_email.value_or("");
  auto base = base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  if (job.state == JobState::kSucceeded) {
    e.subject = fmt::format("Your {} job is ready", kind_name(job.kind));
    e.body = fmt::format("Job {} finished. Download the results: {}/api/jobs/{}/results\n",
                         job.job_id, base, job.job_id);
  } else {
    e.subject = fmt::format("Your {} job failed", kind_name(job.kind));
    e.body = fmt::format("Job {} failed: {}\nStatus: {}/api/jobs/{}\n", job.job_id,
                         job.error_message.value_or(""), base, job.job_id);
  }
  return e;
}

// FileOutboxSink -------------------------------------------------------------

FileOutboxSink::FileOutboxSink(fs::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
}

namespace {

std::string read_fd(int fd) {
  std::string out;
  char buf[8192];
  ::lseek(fd, 0, SEEK_SET);
  for (;;) {
    const auto n = ::read(fd, buf, sizeof buf);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) break;
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

}  // namespace

bool FileOutboxSink::deliver(const NotificationEvent& event) {
  const std::lock_guard lock(mutex_);
  const int fd = ::open(path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw Error(ErrorCode::kSinkUnavailable,
                fmt::format("cannot open outbox {}: {}", path_.string(), std::strerror(errno)));
  }
  ::flock(fd, LOCK_EX);
  struct Closer {
    int fd;
    ~Closer() {
      ::flock(fd, LOCK_UN);
      ::close(fd);
    }
  } closer{fd};

  auto content = read_fd(fd);
  // A crash mid-append leaves a partial last line; drop it.
  const auto last_newline = content.rfind('\n');
  const std::size_t complete = last_newline == std::string::npos ? 0 : last_newline + 1;
  if (complete != content.size()) {
    if (::ftruncate(fd, static_cast<off_t>(complete)) != 0) {
      throw Error(ErrorCode::kSinkUnavailable, "cannot repair outbox");
    }
    content.resize(complete);
  }
  std::size_t pos = 0;
  while (pos < content.size()) {
    const auto end = content.find('\n', pos);
    const auto line = std::string_view(content).substr(pos, end - pos);
    pos = end + 1;
    const auto j = json::parse(line, nullptr, false);
    if (!j.is_discarded() && j.is_object() && j.value("event_id", "") == event.event_id) {
      return false;
    }
  }
  const auto line = to_json(event).dump() + "\n";
  ::lseek(fd, 0, SEEK_END);
  std::size_t written = 0;
  while (written < line.size()) {
    const auto n = ::write(fd, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kSinkUnavailable,
                  fmt::format("cannot append to outbox: {}", std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  return true;
}

std::vector<NotificationEvent> FileOutboxSink::read_all(const fs::path& path) {
  std::vector<NotificationEvent> out;
  std::error_code ec;
  if (!fs::exists(path, ec)) return out;
  const auto content = detail::read_file(path);
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string::npos) break;  // partial trailing line
    const auto line = std::string_view(content).substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty()) out.push_back(event_from_json(json::parse(line)));
  }
  return out;
}

// Notifier -------------------------------------------------------------------

void real_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

Notifier::Notifier(NotificationSink& sink, RetryPolicy policy, Sleeper sleeper, Clock clock)
    : sink_(sink), policy_(policy), sleeper_(std::move(sleeper)), clock_(std::move(clock)) {
  if (policy_.max_attempts < 1) policy_.max_attempts = 1;
}

DeliveryRecord Notifier::notify(NotificationEvent event) {
  DeliveryRecord record;
  record.event_id = event.event_id;
  auto backoff = policy_.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    record.attempts = attempt;
    event.sent_at = format_timestamp(clock_());
    try {
      record.duplicate = !sink_.deliver(event);
      return record;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSinkUnavailable) throw;
      if (attempt >= policy_.max_attempts) {
        throw Error(ErrorCode::kSinkUnavailable,
                    fmt::format("delivery of {} failed after {} attempts: {}", event.event_id,
                                attempt, e.what()));
      }
    }
    sleeper_(backoff);
    backoff = std::chrono::milliseconds(
        static_cast<std::int64_t>(static_cast<double>(backoff.count()) * policy_.multiplier));
  }
}

}  // namespace framekit::jobs
