#include "ereval/journal.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include "ereval/error.hpp"

namespace ereval {
namespace fs = std::filesystem;

namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Complete journal lines. An unterminated last line is a torn write and
// dropped.
std::vector<std::string> read_journal(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open journal " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string data = buffer.str();
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < data.size()) {
    const std::size_t nl = data.find('\n', pos);
    if (nl == std::string::npos) break;
    if (nl > pos) lines.push_back(data.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

void write_durably(const std::string& path, const std::string& data, bool append) {
  const int flags = O_WRONLY | O_CREAT | O_CLOEXEC | (append ? O_APPEND : O_TRUNC);
  const int fd = ::open(path.c_str(), flags, 0644);
  if (fd < 0) fail(ErrorKind::kIo, "cannot open " + path + " for writing");
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      ::close(fd);
      fail(ErrorKind::kIo, "write failed on " + path);
    }
    done += static_cast<std::size_t>(n);
  }
  const bool synced = ::fsync(fd) == 0;
  ::close(fd);
  if (!synced) fail(ErrorKind::kIo, "fsync failed on " + path);
}

}  // namespace

void validate_session_id(const std::string& id) {
  if (id.empty() || id.size() > 128 || id.front() == '.')
    fail(ErrorKind::kInvalidInput, "invalid session id: '" + id + "'");
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) fail(ErrorKind::kInvalidInput, "invalid session id: '" + id + "' (use letters, digits, '-', '_', '.')");
  }
}

SessionStore::SessionStore(std::string directory, std::size_t snapshot_every)
    : directory_(std::move(directory)), snapshot_every_(snapshot_every) {
  std::error_code ec;
  fs::create_directories(directory_, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create journal directory " + directory_ + ": " + ec.message());
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(directory_)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && ends_with(name, ".jsonl")) ids.push_back(name.substr(0, name.size() - 6));
  }
  for (const auto& id : ids) {
    LabelingSession session = load(id);
    index_tasks(session);
    sessions_.emplace(id, std::move(session));
  }
}

std::string SessionStore::journal_path(const std::string& session_id) const {
  return (fs::path(directory_) / (session_id + ".jsonl")).string();
}

std::string SessionStore::snapshot_path(const std::string& session_id) const {
  return (fs::path(directory_) / (session_id + ".snapshot.json")).string();
}

LabelingSession SessionStore::replay_file(const std::string& path) {
  return LabelingSession::replay(read_journal(path));
}

LabelingSession SessionStore::load(const std::string& session_id) const {
  const auto events = read_journal(journal_path(session_id));
  std::ifstream snap(snapshot_path(session_id), std::ios::binary);
  if (snap) {
    std::stringstream buffer;
    buffer << snap.rdbuf();
    try {
      LabelingSession session = LabelingSession::from_state_json(buffer.str());
      if (session.event_count() <= events.size()) {
        for (std::size_t i = session.event_count(); i < events.size(); ++i) session.apply_event(events[i]);
        return session;
      }
    } catch (const std::exception&) {
      // Unreadable snapshot: fall back to a full replay.
    }
  }
  return LabelingSession::replay(events);
}

void SessionStore::index_tasks(const LabelingSession& session) {
  for (const auto& t : session.tasks()) task_owner_[t.id] = session.id();
}

std::vector<std::string> SessionStore::session_ids() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

bool SessionStore::contains(const std::string& session_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  return sessions_.count(session_id) != 0;
}

const LabelingSession& SessionStore::get(const std::string& session_id) const {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) fail(ErrorKind::kNotFound, "unknown session: " + session_id);
  return it->second;
}

void SessionStore::append(const std::string& session_id, const std::string& event) {
  write_durably(journal_path(session_id), event + "\n", true);
}

void SessionStore::write_snapshot(const std::string& session_id, const LabelingSession& session) {
  const std::string path = snapshot_path(session_id);
  const std::string tmp = path + ".tmp";
  write_durably(tmp, session.state_json(), false);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::kIo, "cannot install snapshot " + path + ": " + ec.message());
}

void SessionStore::create(const Clustering& prediction, const SessionParams& params) {
  validate_session_id(params.id);
  std::lock_guard<std::mutex> lock(mutex_);
  if (sessions_.count(params.id) || fs::exists(journal_path(params.id)))
    fail(ErrorKind::kConflict, "session already exists: " + params.id);
  auto [session, event] = LabelingSession::create(prediction, params);
  for (const auto& t : session.tasks())
    if (task_owner_.count(t.id)) fail(ErrorKind::kConflict, "task id collides with an existing session: " + t.id);
  append(params.id, event);
  index_tasks(session);
  sessions_.emplace(params.id, std::move(session));
}

LabelingSession::Event SessionStore::mutate(const std::string& session_id,
                                            const std::function<LabelingSession::Event(LabelingSession&)>& op) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) fail(ErrorKind::kNotFound, "unknown session: " + session_id);
  LabelingSession& session = it->second;
  LabelingSession::Event event = op(session);
  try {
    append(session_id, event);
  } catch (...) {
    session = load(session_id);
    throw;
  }
  if (snapshot_every_ > 0 && session.event_count() % snapshot_every_ == 0) write_snapshot(session_id, session);
  return event;
}

std::string SessionStore::session_of_task(const std::string& task_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = task_owner_.find(task_id);
  if (it == task_owner_.end()) fail(ErrorKind::kNotFound, "unknown task: " + task_id);
  return it->second;
}

std::vector<std::string> SessionStore::journal(const std::string& session_id) const {
  std::lock_guard<std::mutex> lock(mutex_);
  get(session_id);
  return read_journal(journal_path(session_id));
}

void SessionStore::snapshot(const std::string& session_id) {
  std::lock_guard<std::mutex> lock(mutex_);
  write_snapshot(session_id, get(session_id));
}

}  // namespace ereval
