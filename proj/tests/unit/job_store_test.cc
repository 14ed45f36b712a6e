#include "framekit/jobs.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include <gtest/gtest.h>

#include "framekit/error.hpp"
#include "framekit/rng.hpp"
#include "framekit/uuid.hpp"
#include "test_support.hpp"

namespace framekit::jobs {
namespace {

using framekit::testing::TempDir;
using nlohmann::json;

struct ManualClock {
  std::int64_t now = 1'600'000'000'000;
  Clock fn() {
    return [this] { return now; };
  }
};

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIoError;
}

ArtifactRef artifact_ref(const std::string& name) { return {name, "blobs/00/" + name, "00", 1}; }

TEST(JobNames, RoundTrip) {
  for (auto k : {JobKind::kLdaTrain, JobKind::kLdaSweep, JobKind::kClfTrain, JobKind::kClfPredict}) {
    EXPECT_EQ(kind_from_name(kind_name(k)), k);
  }
  for (auto s : {JobState::kQueued, JobState::kRunning, JobState::kSucceeded, JobState::kFailed}) {
    EXPECT_EQ(state_from_name(state_name(s)), s);
  }
  EXPECT_EQ(kind_name(JobKind::kClfPredict), "clf_predict");
  EXPECT_EQ(code_of([] { kind_from_name("sleep"); }), ErrorCode::kInvalidParams);
}

TEST(JobStateMachine, DeclaredEdgesOnly) {
  const std::vector<JobState> all = {JobState::kQueued, JobState::kRunning, JobState::kSucceeded,
                                     JobState::kFailed};
  const std::set<std::pair<JobState, JobState>> allowed = {
      {JobState::kQueued, JobState::kRunning},
      {JobState::kRunning, JobState::kSucceeded},
      {JobState::kRunning, JobState::kFailed},
      {JobState::kRunning, JobState::kQueued}};
  for (auto from : all) {
    for (auto to : all) {
      EXPECT_EQ(is_allowed_transition(from, to), allowed.count({from, to}) == 1)
          << state_name(from) << "->" << state_name(to);
    }
  }
}

TEST(Timestamp, Format) {
  EXPECT_EQ(format_timestamp(0), "1970-01-01T00:00:00.000Z");
  EXPECT_EQ(format_timestamp(1'588'291'200'123), "2020-05-01T00:00:00.123Z");
}

TEST(JobStore, EnqueueClaimCompleteLifecycle) {
  TempDir dir;
  ManualClock clock;
  JobStore store(dir.path() / "jobs.store", clock.fn(), false);
  const auto job = store.enqueue(JobKind::kLdaTrain, json{{"num_topics", 5}}, {"c1"}, "a@b.org");
  EXPECT_TRUE(is_uuid(job.job_id));
  EXPECT_EQ(store.get(job.job_id).state, JobState::kQueued);
  EXPECT_EQ(store.get(job.job_id).created_at, clock.now);

  clock.now += 10;
  const auto claimed = store.claim_next();
  ASSERT_TRUE(claimed);
  EXPECT_EQ(claimed->job_id, job.job_id);
  EXPECT_EQ(claimed->state, JobState::kRunning);
  EXPECT_EQ(claimed->attempts, 1);
  EXPECT_EQ(*claimed->started_at, clock.now);
  EXPECT_FALSE(store.claim_next());

  clock.now += 10;
  const auto done = store.complete(job.job_id, {artifact_ref("a")});
  EXPECT_EQ(done.state, JobState::kSucceeded);
  EXPECT_EQ(*done.finished_at, clock.now);
  EXPECT_TRUE(done.notification_pending);
  EXPECT_EQ(store.pending_notifications().size(), 1u);
  store.mark_notified(job.job_id);
  EXPECT_TRUE(store.pending_notifications().empty());
  EXPECT_EQ(*store.get(job.job_id).notified_at, clock.now);
}

TEST(JobStore, IllegalTransitionsRejected) {
  TempDir dir;
  JobStore store(dir.path() / "jobs.store", system_clock_ms, false);
  const auto a = store.enqueue(JobKind::kLdaTrain, json::object(), {}, std::nullopt);
  EXPECT_EQ(code_of([&] { store.complete(a.job_id, {artifact_ref("x")}); }), ErrorCode::kIllegalTransition);
  EXPECT_EQ(code_of([&] { store.fail(a.job_id, "boom"); }), ErrorCode::kIllegalTransition);
  store.claim_next();
  EXPECT_EQ(code_of([&] { store.complete(a.job_id, {}); }), ErrorCode::kIllegalTransition);
  store.fail(a.job_id, "");
  EXPECT_EQ(store.get(a.job_id).error_message, "unknown error");
  EXPECT_FALSE(store.get(a.job_id).notification_pending);
  EXPECT_EQ(code_of([&] { store.complete(a.job_id, {artifact_ref("x")}); }), ErrorCode::kIllegalTransition);
  EXPECT_EQ(code_of([&] { store.get(make_uuid()); }), ErrorCode::kUnknownJob);
}

TEST(JobStore, FifoAndDistinctIds) {
  TempDir dir;
  JobStore store(dir.path() / "jobs.store", system_clock_ms, false);
  std::vector<std::string> ids;
  for (int i = 0; i < 20; ++i) {
    ids.push_back(store.enqueue(JobKind::kLdaTrain, json{{"i", i}}, {}, std::nullopt).job_id);
  }
  EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), ids.size());
  for (const auto& id : ids) {
    const auto claimed = store.claim_next();
    ASSERT_TRUE(claimed);
    EXPECT_EQ(claimed->job_id, id);
    store.complete(id, {artifact_ref(id)});
  }
}

TEST(JobStore, PersistsAcrossReopen) {
  TempDir dir;
  const auto file = dir.path() / "jobs.store";
  std::string id;
  {
    JobStore store(file, system_clock_ms, true);
    id = store.enqueue(JobKind::kClfPredict, json{{"model_id", "m"}}, {"c"}, std::nullopt).job_id;
    store.add_corpus({"c", artifact_ref("blob"), "x.csv", 2, false, {}, 5});
  }
  JobStore reopened(file, system_clock_ms, true);
  const auto job = reopened.get(id);
  EXPECT_EQ(job.kind, JobKind::kClfPredict);
  EXPECT_EQ(job.params, json({{"model_id", "m"}}));
  EXPECT_EQ(job.input_refs, std::vector<std::string>{"c"});
  ASSERT_TRUE(reopened.find_corpus("c"));
  EXPECT_EQ(reopened.find_corpus("c")->rows, 2u);
  EXPECT_FALSE(reopened.find_corpus("d"));
  // Sequence numbers keep increasing after reopen.
  const auto next = reopened.enqueue(JobKind::kLdaTrain, json::object(), {}, std::nullopt);
  EXPECT_GT(next.sequence, job.sequence);
}

TEST(JobStore, JobJsonRoundTrip) {
  Job job;
  job.job_id = make_uuid();
  job.kind = JobKind::kLdaSweep;
  job.state = JobState::kFailed;
  job.sequence = 7;
  job.created_at = 1;
  job.started_at = 2;
  job.finished_at = 3;
  job.params = json{{"k_values", {2, 3}}};
  job.result_refs = {artifact_ref("r")};
  job.error_message = "invalid_config: bad";
  job.notify_email = "x@y.z";
  job.notes = {"n1"};
  job.attempts = 2;
  job.notification_pending = true;
  const auto back = job_from_json(to_json(job));
  EXPECT_EQ(to_json(back), to_json(job));
  EXPECT_EQ(back.result_refs, job.result_refs);
}

TEST(JobStore, RecoverRequeuesRunningOnly) {
  TempDir dir;
  const auto file = dir.path() / "jobs.store";
  ManualClock clock;
  JobStore store(file, clock.fn(), false);
  const auto a = store.enqueue(JobKind::kLdaTrain, json::object(), {}, std::nullopt);
  const auto b = store.enqueue(JobKind::kLdaTrain, json::object(), {}, std::nullopt);
  const auto c = store.enqueue(JobKind::kLdaTrain, json::object(), {}, std::nullopt);
  store.claim_next();
  store.complete(a.job_id, {artifact_ref("a")});
  store.claim_next();  // b left running, as after a crash

  JobStore after_crash(file, clock.fn(), false);
  EXPECT_EQ(after_crash.recover(), 1u);
  const auto recovered = after_crash.get(b.job_id);
  EXPECT_EQ(recovered.state, JobState::kQueued);
  EXPECT_FALSE(recovered.started_at);
  ASSERT_EQ(recovered.notes.size(), 1u);
  EXPECT_NE(recovered.notes[0].find("requeued after interrupted attempt 1"), std::string::npos);
  EXPECT_EQ(after_crash.get(a.job_id).state, JobState::kSucceeded);
  EXPECT_EQ(after_crash.get(c.job_id).state, JobState::kQueued);
  // b keeps its FIFO position ahead of c.
  EXPECT_EQ(after_crash.claim_next()->job_id, b.job_id);
  EXPECT_EQ(after_crash.get(b.job_id).attempts, 2);

  after_crash.complete(b.job_id, {artifact_ref("b")});
  after_crash.claim_next();
  after_crash.fail(c.job_id, "x");
  EXPECT_EQ(after_crash.recover(), 0u);
}

TEST(JobStore, CorruptFilesRejected) {
  TempDir dir;
  const auto file = dir.path() / "jobs.store";
  {
    JobStore store(file, system_clock_ms, false);
    store.enqueue(JobKind::kLdaTrain, json::object(), {}, std::nullopt);
  }
  const auto good = framekit::testing::read_text(file);
  auto write = [&](const std::string& text) { std::ofstream(file, std::ios::binary) << text; };
  auto opens = [&] { JobStore s(file, system_clock_ms, false); };

  write(good.substr(0, good.size() / 2));
  EXPECT_EQ(code_of(opens), ErrorCode::kStoreCorrupt);
  write("");
  EXPECT_EQ(code_of(opens), ErrorCode::kStoreCorrupt);
  auto edited = good;
  edited[edited.size() - 2] = edited[edited.size() - 2] == '0' ? '1' : '0';
  write(edited);
  EXPECT_EQ(code_of(opens), ErrorCode::kStoreCorrupt);
  write(good);
  EXPECT_NO_THROW(opens());
}

TEST(JobStore, ExpireResultsReturnsUnreferencedBlobs) {
  TempDir dir;
  ManualClock clock;
  JobStore store(dir.path() / "jobs.store", clock.fn(), false);
  store.add_corpus({"c", artifact_ref("corpus"), "x.csv", 2, false, {}, clock.now});
  const auto old_job = store.enqueue(JobKind::kLdaTrain, json::object(), {"c"}, std::nullopt);
  store.claim_next();
  store.complete(old_job.job_id, {artifact_ref("shared"), artifact_ref("only-old"), artifact_ref("corpus")});
  clock.now += 1000;
  const auto new_job = store.enqueue(JobKind::kLdaTrain, json::object(), {"c"}, std::nullopt);
  store.claim_next();
  store.complete(new_job.job_id, {artifact_ref("shared")});

  EXPECT_TRUE(store.expire_results(clock.now - 2000).empty());
  const auto removed = store.expire_results(clock.now - 500);
  EXPECT_EQ(removed, std::vector<std::string>{"blobs/00/only-old"});
  EXPECT_TRUE(store.get(old_job.job_id).results_expired);
  EXPECT_FALSE(store.get(new_job.job_id).results_expired);
  EXPECT_TRUE(store.expire_results(clock.now - 500).empty());
}

TEST(BlobStore, ContentAddressedAndVerified) {
  TempDir dir;
  BlobStore blobs(dir.path());
  const auto a = blobs.put("a.csv", "hello");
  EXPECT_EQ(a.sha256, "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824");
  EXPECT_EQ(a.path, "blobs/2c/" + a.sha256);
  EXPECT_EQ(a.size, 5u);
  EXPECT_EQ(blobs.get(a), "hello");
  EXPECT_EQ(blobs.put("b.csv", "hello").path, a.path);

  std::ofstream(dir.path() / a.path, std::ios::binary) << "jello";
  EXPECT_EQ(code_of([&] { blobs.get(a); }), ErrorCode::kStoreCorrupt);
  EXPECT_TRUE(blobs.remove(a.path));
  EXPECT_EQ(code_of([&] { blobs.get(a); }), ErrorCode::kStoreCorrupt);
}

TEST(JobStore, ConcurrentClaimsAreExclusive) {
  TempDir dir;
  JobStore store(dir.path() / "jobs.store", system_clock_ms, false);
  for (int i = 0; i < 60; ++i) store.enqueue(JobKind::kLdaTrain, json::object(), {}, std::nullopt);
  std::mutex m;
  std::vector<std::string> claimed;
  {
    std::vector<std::jthread> workers;
    for (int w = 0; w < 6; ++w) {
      workers.emplace_back([&] {
        while (auto job = store.claim_next()) {
          store.complete(job->job_id, {artifact_ref(job->job_id)});
          const std::lock_guard lock(m);
          claimed.push_back(job->job_id);
        }
      });
    }
  }
  EXPECT_EQ(claimed.size(), 60u);
  EXPECT_EQ(std::set<std::string>(claimed.begin(), claimed.end()).size(), 60u);
}

// Random operation sequences, including reopening the store from disk, never
// produce an undeclared transition or violate the terminal-state invariants.
TEST(JobStoreProperty, RandomInterleavingsStayOnDeclaredEdges) {
  Xoshiro256 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    TempDir dir;
    const auto file = dir.path() / "jobs.store";
    ManualClock clock;
    auto store = std::make_unique<JobStore>(file, clock.fn(), false);
    std::map<std::string, JobState> last;
    std::vector<std::string> running;
    for (int step = 0; step < 120; ++step) {
      clock.now += static_cast<std::int64_t>(rng.below(5));
      switch (rng.below(7)) {
        case 0:
        case 1: {
          const auto j = store->enqueue(JobKind::kLdaTrain, json::object(), {}, std::nullopt);
          ASSERT_EQ(j.state, JobState::kQueued);
          last[j.job_id] = JobState::kQueued;
          break;
        }
        case 2:
          if (auto j = store->claim_next()) running.push_back(j->job_id);
          break;
        case 3:
        case 4:
          if (!running.empty()) {
            const auto idx = rng.below(running.size());
            const auto id = running[idx];
            running.erase(running.begin() + static_cast<std::ptrdiff_t>(idx));
            if (rng.below(2) == 0) {
              store->complete(id, {artifact_ref(id)});
            } else {
              store->fail(id, "err");
            }
          }
          break;
        case 5: {
          // Any operation on an arbitrary job: illegal ones must throw and
          // leave the store unchanged.
          if (last.empty()) break;
          auto it = last.begin();
          std::advance(it, static_cast<std::ptrdiff_t>(rng.below(last.size())));
          const auto before = store->file_digest();
          const auto state = store->get(it->first).state;
          try {
            if (rng.below(2) == 0) {
              store->complete(it->first, {artifact_ref("x")});
            } else {
              store->fail(it->first, "x");
            }
            ASSERT_EQ(state, JobState::kRunning);
            running.erase(std::remove(running.begin(), running.end(), it->first), running.end());
          } catch (const Error& e) {
            ASSERT_EQ(e.code(), ErrorCode::kIllegalTransition);
            ASSERT_NE(state, JobState::kRunning);
            ASSERT_EQ(store->file_digest(), before);
          }
          break;
        }
        case 6:
          // Simulated restart.
          store = std::make_unique<JobStore>(file, clock.fn(), false);
          store->recover();
          running.clear();
          break;
      }
      for (const auto& job : store->list()) {
        const auto prev = last.at(job.job_id);
        if (prev != job.state) {
          ASSERT_TRUE(is_allowed_transition(prev, job.state))
              << state_name(prev) << "->" << state_name(job.state);
        }
        last[job.job_id] = job.state;
        if (job.state == JobState::kSucceeded) ASSERT_FALSE(job.result_refs.empty());
        if (job.state == JobState::kFailed) ASSERT_TRUE(job.error_message);
        if (job.started_at) ASSERT_LE(job.created_at, *job.started_at);
        if (job.finished_at) ASSERT_LE(*job.started_at, *job.finished_at);
      }
    }
  }
}

}  // namespace
}  // namespace framekit::jobs
