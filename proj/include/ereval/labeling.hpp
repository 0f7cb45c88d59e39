#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ereval/core_model.hpp"
#include "ereval/error_metrics.hpp"
#include "ereval/sampling.hpp"

namespace ereval {

enum class TaskStatus { kPending, kInProgress, kFinalized };
std::string to_string(TaskStatus status);

struct Lease {
  std::string holder;
  std::int64_t expires_at = 0;
};

// One seed record's labeling pass: start from the frozen predicted cluster,
// note removals (A_r) and additions (B_r), resolve to the true cluster.
struct LabelingTask {
  std::string id;
  std::string seed_record;
  std::vector<std::string> predicted_cluster;  // frozen snapshot
  std::set<std::string> removed;               // A_r
  std::set<std::string> added;                 // B_r
  TaskStatus status = TaskStatus::kPending;
  std::string labeler;
  std::optional<Lease> lease;
  std::int64_t updated_at = 0;
  std::int64_t finalized_at = 0;
  double p_c = 0.0;  // set at finalization

  // (ĉ \ A_r) ∪ B_r: surviving predicted members in snapshot order, then
  // additions in id order.
  std::vector<std::string> resolved() const;
};

enum class Direction { kOverclustering, kUnderclustering };
std::string to_string(Direction direction);
Direction parse_direction(const std::string& name);

struct AuditTag {
  std::string cluster_id;
  Direction direction = Direction::kOverclustering;
  std::string label;
  std::string note;
  double p_c = 1.0;
};

// Editable default taxonomy of error causes.
const std::vector<std::string>& default_audit_taxonomy();

// Tags a benchmark cluster; the direction must match a nonzero OCE(c)
// (overclustering) or UCE(c) (underclustering).
AuditTag record_audit_tag(const ClusterErrors& row, Direction direction, std::string label, std::string note = {});

struct AuditFrequency {
  Direction direction;
  std::string label;
  double weight = 0.0;     // Σ 1/p_c
  double frequency = 0.0;  // normalized within direction
  std::size_t count = 0;
};

// Inverse-probability-weighted relative frequency per (direction, label).
std::vector<AuditFrequency> audit_frequencies(const std::vector<AuditTag>& tags);

void save_audit_tags(const std::vector<AuditTag>& tags, const std::string& path);
std::vector<AuditTag> load_audit_tags(const std::string& path);

enum class QcSeverity { kHard, kSoft };

struct QcFlag {
  std::string task_id;
  QcSeverity severity;
  std::string code;
  std::string record;
  std::string message;
};

// Blocking key for the soft "different block" check; empty keys never flag.
using BlockingKey = std::function<std::string(const std::string& label)>;
// Default key: last case-folded token of the label (surname for person names).
BlockingKey default_blocking_key();

struct QcOptions {
  bool token_overlap = true;
  BlockingKey blocking_key = default_blocking_key();
};

// Hard flags: invariant violations of A_r / B_r. Soft flags: additions that
// share no token with the seed's label or fall in another block. Report-only.
std::vector<QcFlag> qc_check(const LabelingTask& task, const AttributeTable* attrs, const QcOptions& options = {},
                             const Clustering* prediction = nullptr);

bool has_hard_flags(const std::vector<QcFlag>& flags);

// Externally produced labels, checked against the prediction.
struct ImportedLabel {
  std::string seed_record;
  std::vector<std::string> removed;
  std::vector<std::string> added;
};

// JSON lines: {"seed_record": ..., "removed": [...], "added": [...]}.
std::vector<ImportedLabel> load_imported_labels(const std::string& path);
std::vector<QcFlag> qc_imported(const std::vector<ImportedLabel>& labels, const Clustering& prediction,
                                const AttributeTable* attrs, const QcOptions& options = {});

struct BenchmarkEntry {
  std::vector<std::string> members;  // sorted
  double p_c = 0.0;
  std::vector<std::string> seed_records;  // one per draw
  std::vector<std::int64_t> finalized_at;
  std::vector<std::string> labelers;

  const std::string& cluster_id() const { return members.front(); }
};

// Finalized ground-truth clusters. Entry ids are the smallest member id, so
// repeated draws of the same cluster share an id.
struct BenchmarkSet {
  std::vector<BenchmarkEntry> entries;
  Design design = Design::kPpsRecord;
  std::uint64_t rng_seed = 0;
  std::string session_id;
  std::string prediction_snapshot;

  std::size_t draws() const;
  // One draw per finalized task, in task order.
  ClusterSample to_sample() const;
};

// JSON lines, one object per draw:
// {"seed_record","members","p_c","design","finalized_at","labeler"}.
std::string benchmark_to_jsonl(const BenchmarkSet& set);
void save_benchmark(const BenchmarkSet& set, const std::string& path);
// Draws keep an explicit "cluster_id" when present, else the smallest member.
ClusterSample load_benchmark_sample(const std::string& path);
ClusterSample parse_benchmark_sample(const std::string& jsonl);

// Same line format for an arbitrary sample, with "cluster_id" added.
std::string sample_to_jsonl(const ClusterSample& sample);

// Content hash of a clustering used to tie sessions to a prediction.
std::string clustering_fingerprint(const Clustering& clustering);

struct SessionParams {
  std::string id;
  Design design = Design::kPpsRecord;
  std::size_t k = 0;
  std::uint64_t rng_seed = 0;
  std::string labeler;
  std::int64_t now = 0;
  // Record weights for the expected_error design.
  std::unordered_map<std::string, double> record_weights;
};

// Mutable state of one labeling pass. Every mutation is expressed as a JSON
// event; the public operations validate, build the event, apply it through
// apply_event() and return it so the caller can journal it. Replaying the
// returned events on a fresh session reproduces the state exactly.
class LabelingSession {
 public:
  using Event = std::string;  // one compact JSON document

  // Samples k seed records and freezes their predicted clusters. p_c is
  // computed at finalization from the design parameters frozen here
  // (N for pps_record, record weights for expected_error).
  static std::pair<LabelingSession, Event> create(const Clustering& prediction, const SessionParams& params);

  static LabelingSession replay(const std::vector<Event>& events);
  void apply_event(const Event& event);

  const std::string& id() const { return id_; }
  Design design() const { return design_; }
  std::uint64_t rng_seed() const { return rng_seed_; }
  std::size_t universe_size() const { return universe_size_; }
  const std::string& prediction_snapshot() const { return snapshot_; }
  std::int64_t created_at() const { return created_at_; }
  std::size_t event_count() const { return event_count_; }

  const std::vector<LabelingTask>& tasks() const { return tasks_; }
  const LabelingTask& task(const std::string& task_id) const;
  const std::vector<AuditTag>& tags() const { return tags_; }

  // First pending task, or one whose lease expired. nullopt when none left.
  std::optional<std::string> next_task(std::int64_t now) const;

  // Acquires (or renews) the task lease and marks it in progress. Fails with
  // kConflict if another holder's lease is still valid.
  Event begin_task(const std::string& task_id, const std::string& labeler, std::int64_t now,
                   std::int64_t lease_seconds = 900);
  Event release_task(const std::string& task_id, const std::string& labeler, std::int64_t now);

  enum class EditOp { kAdd, kRemove, kRestore, kRetract };
  static EditOp parse_edit_op(const std::string& name);

  // add: B_r += record (must be outside ĉ). remove: A_r += record (must be in
  // ĉ and not the seed). restore / retract undo a remove / add. Re-applying
  // an edit is accepted and leaves the state unchanged.
  Event apply_edit(const std::string& task_id, EditOp op, const std::string& record, const std::string& labeler,
                   std::int64_t now, const Clustering* prediction = nullptr);

  // Requires zero hard QC flags and a live lease held by `labeler`.
  Event finalize(const std::string& task_id, const std::string& labeler, std::int64_t now,
                 const AttributeTable* attrs = nullptr);

  Event add_tag(const AuditTag& tag, std::int64_t now);

  std::vector<QcFlag> qc(const AttributeTable* attrs, const QcOptions& options = {}) const;

  // All tasks must be finalized unless `finalized_only`, which skips the
  // unfinished ones. Overlapping non-identical clusters fail with kConflict
  // listing the offending tasks.
  BenchmarkSet export_benchmark(bool finalized_only = false) const;

  // Canonical state document (sorted keys, deterministic formatting).
  std::string state_json() const;
  static LabelingSession from_state_json(const std::string& state);

 private:
  LabelingTask& mutable_task(const std::string& task_id);
  void require_lease(const LabelingTask& task, const std::string& labeler, std::int64_t now) const;
  double cluster_weight(const std::vector<std::string>& members) const;

  std::string id_;
  Design design_ = Design::kPpsRecord;
  std::uint64_t rng_seed_ = 0;
  std::size_t universe_size_ = 0;
  std::string snapshot_;
  std::int64_t created_at_ = 0;
  std::unordered_map<std::string, double> record_weights_;
  double total_weight_ = 0.0;
  std::vector<LabelingTask> tasks_;
  std::unordered_map<std::string, std::size_t> task_lookup_;
  std::vector<AuditTag> tags_;
  std::size_t event_count_ = 0;
};

}  // namespace ereval
