#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ereval/labeling.hpp"

namespace ereval {

// Labeling sessions persisted in a directory: `<id>.jsonl` holds the
// append-only event journal and `<id>.snapshot.json` the state after the
// first `event_count` events. Loading restores the snapshot and replays the
// journal tail. A torn final line (crash during append) is ignored.
class SessionStore {
 public:
  explicit SessionStore(std::string directory, std::size_t snapshot_every = 100);

  const std::string& directory() const { return directory_; }

  std::vector<std::string> session_ids() const;
  bool contains(const std::string& session_id) const;

  // Creates and journals a new session. Fails with kConflict if the id exists.
  void create(const Clustering& prediction, const SessionParams& params);

  // Runs one validated mutation and appends its event. If the append fails
  // the in-memory session is reloaded from disk.
  LabelingSession::Event mutate(const std::string& session_id,
                                const std::function<LabelingSession::Event(LabelingSession&)>& op);

  // Session owning `task_id`; kNotFound otherwise.
  std::string session_of_task(const std::string& task_id) const;

  // Read access under the store lock.
  template <typename F>
  auto read(const std::string& session_id, F&& fn) const {
    std::lock_guard<std::mutex> lock(mutex_);
    return fn(get(session_id));
  }

  std::vector<std::string> journal(const std::string& session_id) const;

  // Writes a snapshot now (normally done every `snapshot_every` events).
  void snapshot(const std::string& session_id);

  // Rebuilds the session from scratch by replaying only the journal.
  static LabelingSession replay_file(const std::string& journal_path);

 private:
  const LabelingSession& get(const std::string& session_id) const;
  LabelingSession load(const std::string& session_id) const;
  void append(const std::string& session_id, const std::string& event);
  void write_snapshot(const std::string& session_id, const LabelingSession& session);
  std::string journal_path(const std::string& session_id) const;
  std::string snapshot_path(const std::string& session_id) const;
  void index_tasks(const LabelingSession& session);

  std::string directory_;
  std::size_t snapshot_every_;
  mutable std::mutex mutex_;
  std::map<std::string, LabelingSession> sessions_;
  std::map<std::string, std::string> task_owner_;
};

// Session ids become file names; letters, digits, '-', '_' and '.' only.
void validate_session_id(const std::string& id);

}  // namespace ereval
