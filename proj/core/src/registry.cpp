#include "framekit/registry.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "framekit/error.hpp"
#include "framekit/hash.hpp"

namespace framekit::classifier {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kExtension = ".fkm";

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Advisory inter-process lock on <dir>/.lock.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) {
    fd_ = ::open((dir / ".lock").c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ >= 0) ::flock(fd_, LOCK_EX);
  }
  ~DirLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace

ModelRegistry::ModelRegistry(fs::path dir, bool install_demos) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  if (!install_demos) return;
  const auto ids = demo_model_ids();
  const bool missing = std::any_of(ids.begin(), ids.end(),
                                   [&](const std::string& id) { return !contains(id); });
  if (!missing) return;
  for (auto& model : build_demo_models()) {
    if (!contains(model.model_id)) {
      try {
        add(std::move(model));
      } catch (const Error& e) {
        // Another process installed it between the check and the add.
        if (e.code() != ErrorCode::kDuplicateModelId) throw;
      }
    }
  }
}

bool ModelRegistry::is_valid_model_id(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  const auto alnum = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  };
  if (!alnum(id.front())) return false;
  return std::all_of(id.begin(), id.end(),
                     [&](char c) { return alnum(c) || c == '-' || c == '_' || c == '.'; });
}

fs::path ModelRegistry::path_for(const std::string& model_id) const {
  return dir_ / (model_id + std::string(kExtension));
}

bool ModelRegistry::contains(const std::string& model_id) const {
  return is_valid_model_id(model_id) && fs::exists(path_for(model_id));
}

std::vector<RegistryEntry> ModelRegistry::list() const {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == kExtension) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<RegistryEntry> entries;
  entries.reserve(files.size());
  for (const auto& file : files) {
    const auto bytes = read_file(file);
    const auto model = decode_model(bytes, file.filename().string());
    entries.push_back({model.model_id, model.issue_name, model.labels, model.backend,
                       model.metrics.accuracy, model.metrics.test_size, sha256_hex(bytes)});
  }
  return entries;
}

std::string ModelRegistry::add(ClassifierModel model) {
  model.validate();
  if (model.model_id.empty()) {
    model.model_id = "clf-" + sha256_hex(encode_model(model)).substr(0, 16);
  }
  if (!is_valid_model_id(model.model_id)) {
    throw Error(ErrorCode::kInvalidParams,
                fmt::format("invalid model id '{}'", model.model_id), "model_id");
  }
  const auto bytes = encode_model(model);

  const std::lock_guard guard(mutex_);
  const DirLock lock(dir_);
  const auto path = path_for(model.model_id);
  if (fs::exists(path)) {
    throw Error(ErrorCode::kDuplicateModelId,
                fmt::format("model '{}' already exists", model.model_id), "model_id");
  }
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIoError, fmt::format("cannot write {}", tmp.string()));
  }
  fs::rename(tmp, path);
  return model.model_id;
}

std::string ModelRegistry::read_artifact(const std::string& model_id) const {
  if (!contains(model_id)) {
    throw Error(ErrorCode::kUnknownModelId, fmt::format("unknown model '{}'", model_id),
                "model_id");
  }
  const auto path = path_for(model_id);
  auto bytes = read_file(path);
  decode_model(bytes, path.filename().string());
  return bytes;
}

ClassifierModel ModelRegistry::get(const std::string& model_id) const {
  if (!contains(model_id)) {
    throw Error(ErrorCode::kUnknownModelId, fmt::format("unknown model '{}'", model_id),
                "model_id");
  }
  const auto path = path_for(model_id);
  return decode_model(read_file(path), path.filename().string());
}

}  // namespace framekit::classifier
