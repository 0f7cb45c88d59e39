#include "ereval/labeling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "ereval/csv.hpp"
#include "ereval/error.hpp"
#include "ereval/text.hpp"

namespace ereval {

using json = nlohmann::json;

std::string to_string(TaskStatus status) {
  switch (status) {
    case TaskStatus::kPending: return "pending";
    case TaskStatus::kInProgress: return "in_progress";
    case TaskStatus::kFinalized: return "finalized";
  }
  return "pending";
}

namespace {

TaskStatus parse_status(const std::string& s) {
  if (s == "pending") return TaskStatus::kPending;
  if (s == "in_progress") return TaskStatus::kInProgress;
  if (s == "finalized") return TaskStatus::kFinalized;
  fail(ErrorKind::kInvalidInput, "unknown task status: " + s);
}

std::vector<std::string> sorted_copy(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

std::vector<std::string> LabelingTask::resolved() const {
  std::vector<std::string> out;
  for (const auto& r : predicted_cluster)
    if (!removed.count(r)) out.push_back(r);
  for (const auto& r : added)
    if (!contains(predicted_cluster, r)) out.push_back(r);
  return out;
}

std::string to_string(Direction direction) {
  return direction == Direction::kOverclustering ? "overclustering" : "underclustering";
}

Direction parse_direction(const std::string& name) {
  if (name == "overclustering") return Direction::kOverclustering;
  if (name == "underclustering") return Direction::kUnderclustering;
  fail(ErrorKind::kInvalidInput, "direction must be overclustering or underclustering, got: " + name);
}

const std::vector<std::string>& default_audit_taxonomy() {
  static const std::vector<std::string> taxonomy{
      "same name",      "middle name",    "nickname",        "last name order", "typo in name",
      "name variation", "missing initial", "different person", "unknown"};
  return taxonomy;
}

AuditTag record_audit_tag(const ClusterErrors& row, Direction direction, std::string label, std::string note) {
  if (label.empty()) fail(ErrorKind::kInvalidInput, "audit tag needs a label");
  const double error = direction == Direction::kOverclustering ? row.oce : row.uce;
  if (!(error > 0.0))
    fail(ErrorKind::kInvalidInput, "cluster " + row.cluster_id + " has no " + to_string(direction) + " error to tag");
  return AuditTag{row.cluster_id, direction, std::move(label), std::move(note), row.p_c};
}

std::vector<AuditFrequency> audit_frequencies(const std::vector<AuditTag>& tags) {
  std::map<std::pair<Direction, std::string>, AuditFrequency> cells;
  std::map<Direction, double> totals;
  for (const auto& t : tags) {
    if (!(t.p_c > 0.0)) fail(ErrorKind::kInvalidInput, "audit tag with nonpositive p_c on cluster " + t.cluster_id);
    auto& cell = cells[{t.direction, t.label}];
    cell.direction = t.direction;
    cell.label = t.label;
    cell.weight += 1.0 / t.p_c;
    ++cell.count;
    totals[t.direction] += 1.0 / t.p_c;
  }
  std::vector<AuditFrequency> out;
  for (auto& [key, cell] : cells) {
    cell.frequency = cell.weight / totals[cell.direction];
    out.push_back(cell);
  }
  return out;
}

void save_audit_tags(const std::vector<AuditTag>& tags, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  csv::write_row(out, {"cluster_id", "direction", "label", "note", "p_c"});
  for (const auto& t : tags) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, t.p_c);
    csv::write_row(out, {t.cluster_id, to_string(t.direction), t.label, t.note, std::string(buf, res.ptr)});
  }
}

std::vector<AuditTag> load_audit_tags(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);
  csv::Reader reader(in);
  std::vector<std::string> fields;
  const std::vector<std::string> header{"cluster_id", "direction", "label", "note", "p_c"};
  if (!reader.next(fields) || fields != header)
    fail(ErrorKind::kInvalidInput, "audit tag header must be cluster_id,direction,label,note,p_c");
  std::vector<AuditTag> tags;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != 5)
      fail(ErrorKind::kInvalidInput, "audit tag line " + std::to_string(reader.line()) + ": expected 5 fields");
    double p = 0.0;
    auto res = std::from_chars(fields[4].data(), fields[4].data() + fields[4].size(), p);
    if (res.ec != std::errc())
      fail(ErrorKind::kInvalidInput, "audit tag line " + std::to_string(reader.line()) + ": bad p_c");
    tags.push_back({fields[0], parse_direction(fields[1]), fields[2], fields[3], p});
  }
  return tags;
}

BlockingKey default_blocking_key() {
  return [](const std::string& label) {
    auto toks = text::tokens(label);
    return toks.empty() ? std::string() : toks.back();
  };
}

std::vector<QcFlag> qc_check(const LabelingTask& task, const AttributeTable* attrs, const QcOptions& options,
                             const Clustering* prediction) {
  std::vector<QcFlag> flags;
  auto hard = [&](std::string code, const std::string& record, std::string message) {
    flags.push_back({task.id, QcSeverity::kHard, std::move(code), record, std::move(message)});
  };
  auto soft = [&](std::string code, const std::string& record, std::string message) {
    flags.push_back({task.id, QcSeverity::kSoft, std::move(code), record, std::move(message)});
  };

  if (!contains(task.predicted_cluster, task.seed_record))
    hard("seed_outside_prediction", task.seed_record, "seed record is not in its predicted cluster");
  if (task.removed.count(task.seed_record))
    hard("seed_removed", task.seed_record, "seed record is immovable: r must not be in A_r");
  for (const auto& r : task.removed)
    if (!contains(task.predicted_cluster, r))
      hard("removed_outside_prediction", r, "A_r must be a subset of the predicted cluster");
  for (const auto& r : task.added) {
    if (contains(task.predicted_cluster, r))
      hard("added_inside_prediction", r, "B_r must not intersect the predicted cluster");
    if (task.removed.count(r)) hard("added_and_removed", r, "record is in both A_r and B_r");
  }
  if (prediction) {
    for (const auto& r : task.added)
      if (!prediction->find_record(r)) hard("unknown_record", r, "record is not in the prediction");
  }

  if (attrs) {
    const std::string* seed_label = attrs->find_label(task.seed_record);
    if (seed_label) {
      const auto seed_tokens = text::tokens(*seed_label);
      const std::string seed_block = options.blocking_key ? options.blocking_key(*seed_label) : std::string();
      for (const auto& r : task.added) {
        const std::string* label = attrs->find_label(r);
        if (!label) continue;
        if (options.token_overlap) {
          const auto toks = text::tokens(*label);
          const bool shared = std::any_of(toks.begin(), toks.end(), [&](const std::string& t) {
            return std::find(seed_tokens.begin(), seed_tokens.end(), t) != seed_tokens.end();
          });
          if (!shared) soft("no_shared_token", r, "addition '" + *label + "' shares no token with seed '" + *seed_label + "'");
        }
        if (options.blocking_key) {
          const std::string block = options.blocking_key(*label);
          if (!seed_block.empty() && !block.empty() && block != seed_block)
            soft("different_block", r, "addition is in block '" + block + "', seed in '" + seed_block + "'");
        }
      }
    }
  }
  return flags;
}

bool has_hard_flags(const std::vector<QcFlag>& flags) {
  return std::any_of(flags.begin(), flags.end(), [](const QcFlag& f) { return f.severity == QcSeverity::kHard; });
}

std::vector<ImportedLabel> load_imported_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);
  std::vector<ImportedLabel> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      out.push_back({j.at("seed_record").get<std::string>(), j.value("removed", std::vector<std::string>{}),
                     j.value("added", std::vector<std::string>{})});
    } catch (const json::exception& e) {
      fail(ErrorKind::kInvalidInput, "label line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::vector<QcFlag> qc_imported(const std::vector<ImportedLabel>& labels, const Clustering& prediction,
                                const AttributeTable* attrs, const QcOptions& options) {
  std::vector<QcFlag> flags;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto& l = labels[i];
    LabelingTask task;
    task.id = "label-" + std::to_string(i + 1);
    task.seed_record = l.seed_record;
    auto seed = prediction.find_record(l.seed_record);
    if (!seed) {
      flags.push_back({task.id, QcSeverity::kHard, "unknown_record", l.seed_record, "seed record is not in the prediction"});
      continue;
    }
    task.predicted_cluster = prediction.member_ids(prediction.cluster_of(*seed));
    task.removed.insert(l.removed.begin(), l.removed.end());
    task.added.insert(l.added.begin(), l.added.end());
    auto task_flags = qc_check(task, attrs, options, &prediction);
    flags.insert(flags.end(), task_flags.begin(), task_flags.end());
  }
  return flags;
}

std::size_t BenchmarkSet::draws() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.seed_records.size();
  return n;
}

ClusterSample BenchmarkSet::to_sample() const {
  ClusterSample sample{{}, design, rng_seed};
  for (const auto& e : entries)
    for (const auto& seed : e.seed_records) sample.draws.push_back({e.cluster_id(), e.members, e.p_c, seed});
  return sample;
}

std::string benchmark_to_jsonl(const BenchmarkSet& set) {
  std::string out;
  for (const auto& e : set.entries) {
    for (std::size_t d = 0; d < e.seed_records.size(); ++d) {
      nlohmann::ordered_json j;
      j["seed_record"] = e.seed_records[d];
      j["members"] = e.members;
      j["p_c"] = e.p_c;
      j["design"] = to_string(set.design);
      j["finalized_at"] = e.finalized_at[d];
      j["labeler"] = e.labelers[d];
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

std::string sample_to_jsonl(const ClusterSample& sample) {
  std::string out;
  for (const auto& d : sample.draws) {
    nlohmann::ordered_json j;
    if (d.seed_record) j["seed_record"] = *d.seed_record;
    j["cluster_id"] = d.cluster_id;
    j["members"] = d.members;
    j["p_c"] = d.p_c;
    j["design"] = to_string(sample.design);
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_benchmark(const BenchmarkSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  out << benchmark_to_jsonl(set);
}

ClusterSample parse_benchmark_sample(const std::string& jsonl) {
  ClusterSample sample;
  std::istringstream in(jsonl);
  std::string line;
  std::size_t n = 0;
  std::optional<Design> design;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      Draw d;
      d.members = sorted_copy(j.at("members").get<std::vector<std::string>>());
      if (d.members.empty()) fail(ErrorKind::kInvalidInput, "benchmark line " + std::to_string(n) + ": empty cluster");
      d.cluster_id = j.contains("cluster_id") ? j.at("cluster_id").get<std::string>() : d.members.front();
      d.p_c = j.at("p_c").get<double>();
      if (j.contains("seed_record")) d.seed_record = j.at("seed_record").get<std::string>();
      const Design line_design = parse_design(j.value("design", std::string("external")));
      if (design && *design != line_design) design = Design::kExternal;
      else if (!design) design = line_design;
      sample.draws.push_back(std::move(d));
    } catch (const json::exception& e) {
      fail(ErrorKind::kInvalidInput, "benchmark line " + std::to_string(n) + ": " + e.what());
    }
  }
  sample.design = design.value_or(Design::kExternal);
  return sample;
}

ClusterSample load_benchmark_sample(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_benchmark_sample(buffer.str());
}

std::string clustering_fingerprint(const Clustering& clustering) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (RecordIndex r = 0; r < clustering.universe_size(); ++r) {
    mix(clustering.record_id(r));
    mix("\t");
    mix(clustering.cluster_id(clustering.cluster_of(r)));
    mix("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// LabelingSession

std::pair<LabelingSession, LabelingSession::Event> LabelingSession::create(const Clustering& prediction,
                                                                           const SessionParams& params) {
  if (params.k < 1) fail(ErrorKind::kInvalidInput, "a labeling session needs k >= 1");
  if (params.id.empty()) fail(ErrorKind::kInvalidInput, "session id must be non-empty");
  if (prediction.empty()) fail(ErrorKind::kInvalidInput, "prediction is empty");

  ClusterSample seeds;
  switch (params.design) {
    case Design::kPpsRecord: seeds = sample_pps(prediction, params.k, params.rng_seed); break;
    case Design::kExpectedError:
      seeds = sample_weighted(prediction, params.record_weights, params.k, params.rng_seed);
      break;
    default:
      fail(ErrorKind::kInvalidInput,
           "labeling sessions sample seed records; use pps_record or expected_error (got " + to_string(params.design) +
               ")");
  }

  json ev;
  ev["type"] = "session_created";
  ev["v"] = 1;
  ev["session_id"] = params.id;
  ev["design"] = to_string(params.design);
  ev["k"] = params.k;
  ev["seed"] = params.rng_seed;
  ev["universe_size"] = prediction.universe_size();
  ev["snapshot"] = clustering_fingerprint(prediction);
  ev["labeler"] = params.labeler;
  ev["at"] = params.now;
  if (params.design == Design::kExpectedError) {
    json w = json::object();
    for (const auto& [r, weight] : params.record_weights) w[r] = weight;
    ev["weights"] = std::move(w);
  }
  json tasks = json::array();
  const std::size_t width = std::to_string(params.k).size();
  for (std::size_t i = 0; i < seeds.draws.size(); ++i) {
    std::string num = std::to_string(i + 1);
    num.insert(0, width - num.size(), '0');
    const auto& d = seeds.draws[i];
    tasks.push_back({{"id", params.id + "-t" + num}, {"seed_record", *d.seed_record}, {"predicted_cluster", d.members}});
  }
  ev["tasks"] = std::move(tasks);

  LabelingSession session;
  Event event = ev.dump();
  session.apply_event(event);
  return {std::move(session), std::move(event)};
}

LabelingSession LabelingSession::replay(const std::vector<Event>& events) {
  LabelingSession session;
  for (const auto& e : events) session.apply_event(e);
  return session;
}

void LabelingSession::apply_event(const Event& event) {
  const json ev = json::parse(event);
  const std::string type = ev.at("type").get<std::string>();
  const std::int64_t at = ev.value("at", std::int64_t{0});

  if (type == "session_created") {
    if (event_count_ != 0) fail(ErrorKind::kInvalidInput, "session_created must be the first event");
    id_ = ev.at("session_id").get<std::string>();
    design_ = parse_design(ev.at("design").get<std::string>());
    rng_seed_ = ev.at("seed").get<std::uint64_t>();
    universe_size_ = ev.at("universe_size").get<std::size_t>();
    snapshot_ = ev.at("snapshot").get<std::string>();
    created_at_ = at;
    if (ev.contains("weights")) {
      for (const auto& [r, w] : ev.at("weights").items()) {
        record_weights_[r] = w.get<double>();
      }
      // Summed in key order for a reproducible total.
      std::map<std::string, double> ordered(record_weights_.begin(), record_weights_.end());
      total_weight_ = 0.0;
      for (const auto& [r, w] : ordered) total_weight_ += w;
    }
    for (const auto& t : ev.at("tasks")) {
      LabelingTask task;
      task.id = t.at("id").get<std::string>();
      task.seed_record = t.at("seed_record").get<std::string>();
      task.predicted_cluster = t.at("predicted_cluster").get<std::vector<std::string>>();
      task.updated_at = at;
      task_lookup_[task.id] = tasks_.size();
      tasks_.push_back(std::move(task));
    }
  } else if (type == "lease") {
    LabelingTask& task = mutable_task(ev.at("task").get<std::string>());
    task.lease = Lease{ev.at("holder").get<std::string>(), ev.at("expires_at").get<std::int64_t>()};
    if (task.status == TaskStatus::kPending) task.status = TaskStatus::kInProgress;
    task.labeler = task.lease->holder;
    task.updated_at = at;
  } else if (type == "release") {
    LabelingTask& task = mutable_task(ev.at("task").get<std::string>());
    task.lease.reset();
    task.updated_at = at;
  } else if (type == "edit") {
    LabelingTask& task = mutable_task(ev.at("task").get<std::string>());
    const std::string record = ev.at("record").get<std::string>();
    switch (parse_edit_op(ev.at("op").get<std::string>())) {
      case EditOp::kAdd: task.added.insert(record); break;
      case EditOp::kRemove: task.removed.insert(record); break;
      case EditOp::kRestore: task.removed.erase(record); break;
      case EditOp::kRetract: task.added.erase(record); break;
    }
    task.labeler = ev.at("labeler").get<std::string>();
    task.updated_at = at;
  } else if (type == "finalized") {
    LabelingTask& task = mutable_task(ev.at("task").get<std::string>());
    task.status = TaskStatus::kFinalized;
    task.p_c = ev.at("p_c").get<double>();
    task.labeler = ev.at("labeler").get<std::string>();
    task.finalized_at = at;
    task.updated_at = at;
    task.lease.reset();
  } else if (type == "tag") {
    tags_.push_back({ev.at("cluster_id").get<std::string>(), parse_direction(ev.at("direction").get<std::string>()),
                     ev.at("label").get<std::string>(), ev.value("note", std::string()),
                     ev.at("p_c").get<double>()});
  } else {
    fail(ErrorKind::kInvalidInput, "unknown journal event type: " + type);
  }
  ++event_count_;
}

const LabelingTask& LabelingSession::task(const std::string& task_id) const {
  auto it = task_lookup_.find(task_id);
  if (it == task_lookup_.end()) fail(ErrorKind::kNotFound, "unknown task: " + task_id);
  return tasks_[it->second];
}

LabelingTask& LabelingSession::mutable_task(const std::string& task_id) {
  auto it = task_lookup_.find(task_id);
  if (it == task_lookup_.end()) fail(ErrorKind::kNotFound, "unknown task: " + task_id);
  return tasks_[it->second];
}

std::optional<std::string> LabelingSession::next_task(std::int64_t now) const {
  for (const auto& t : tasks_) {
    if (t.status == TaskStatus::kFinalized) continue;
    if (!t.lease || t.lease->expires_at <= now) return t.id;
  }
  return std::nullopt;
}

void LabelingSession::require_lease(const LabelingTask& task, const std::string& labeler, std::int64_t now) const {
  if (!task.lease || task.lease->expires_at <= now)
    fail(ErrorKind::kConflict, "task " + task.id + " has no live lease; begin the task first");
  if (task.lease->holder != labeler)
    fail(ErrorKind::kConflict, "task " + task.id + " is leased by " + task.lease->holder);
}

LabelingSession::Event LabelingSession::begin_task(const std::string& task_id, const std::string& labeler,
                                                   std::int64_t now, std::int64_t lease_seconds) {
  if (labeler.empty()) fail(ErrorKind::kInvalidInput, "labeler id must be non-empty");
  if (lease_seconds <= 0) fail(ErrorKind::kInvalidInput, "lease duration must be positive");
  const LabelingTask& t = task(task_id);
  if (t.status == TaskStatus::kFinalized) fail(ErrorKind::kConflict, "task " + task_id + " is already finalized");
  if (t.lease && t.lease->holder != labeler && t.lease->expires_at > now)
    fail(ErrorKind::kConflict, "task " + task_id + " is leased by " + t.lease->holder);
  json ev{{"type", "lease"}, {"task", task_id}, {"holder", labeler}, {"expires_at", now + lease_seconds}, {"at", now}};
  Event event = ev.dump();
  apply_event(event);
  return event;
}

LabelingSession::Event LabelingSession::release_task(const std::string& task_id, const std::string& labeler,
                                                     std::int64_t now) {
  require_lease(task(task_id), labeler, now);
  json ev{{"type", "release"}, {"task", task_id}, {"holder", labeler}, {"at", now}};
  Event event = ev.dump();
  apply_event(event);
  return event;
}

LabelingSession::EditOp LabelingSession::parse_edit_op(const std::string& name) {
  if (name == "add") return EditOp::kAdd;
  if (name == "remove") return EditOp::kRemove;
  if (name == "restore") return EditOp::kRestore;
  if (name == "retract") return EditOp::kRetract;
  fail(ErrorKind::kInvalidInput, "edit op must be add, remove, restore or retract; got: " + name);
}

LabelingSession::Event LabelingSession::apply_edit(const std::string& task_id, EditOp op, const std::string& record,
                                                   const std::string& labeler, std::int64_t now,
                                                   const Clustering* prediction) {
  const LabelingTask& t = task(task_id);
  if (t.status == TaskStatus::kFinalized) fail(ErrorKind::kConflict, "task " + task_id + " is already finalized");
  require_lease(t, labeler, now);
  if (record.empty()) fail(ErrorKind::kInvalidInput, "edit needs a record id");

  const bool inside = contains(t.predicted_cluster, record);
  std::string op_name;
  switch (op) {
    case EditOp::kAdd:
      if (inside) fail(ErrorKind::kQualityControl, "record " + record + " is already in the predicted cluster");
      if (prediction && !prediction->find_record(record)) fail(ErrorKind::kNotFound, "unknown record: " + record);
      op_name = "add";
      break;
    case EditOp::kRemove:
      if (record == t.seed_record) fail(ErrorKind::kQualityControl, "seed record is immovable");
      if (!inside) fail(ErrorKind::kQualityControl, "record " + record + " is not in the predicted cluster");
      op_name = "remove";
      break;
    case EditOp::kRestore: op_name = "restore"; break;
    case EditOp::kRetract: op_name = "retract"; break;
  }
  json ev{{"type", "edit"}, {"task", task_id}, {"op", op_name}, {"record", record}, {"labeler", labeler}, {"at", now}};
  Event event = ev.dump();
  apply_event(event);
  return event;
}

double LabelingSession::cluster_weight(const std::vector<std::string>& members) const {
  if (design_ == Design::kPpsRecord) return static_cast<double>(members.size()) / static_cast<double>(universe_size_);
  double w = 0.0;
  for (const auto& r : sorted_copy(members)) {
    auto it = record_weights_.find(r);
    if (it != record_weights_.end()) w += it->second;
  }
  return w / total_weight_;
}

LabelingSession::Event LabelingSession::finalize(const std::string& task_id, const std::string& labeler,
                                                 std::int64_t now, const AttributeTable* attrs) {
  const LabelingTask& t = task(task_id);
  if (t.status == TaskStatus::kFinalized) fail(ErrorKind::kConflict, "task " + task_id + " is already finalized");
  require_lease(t, labeler, now);
  const auto flags = qc_check(t, attrs);
  if (has_hard_flags(flags)) {
    std::string msg = "task " + task_id + " fails hard QC:";
    for (const auto& f : flags)
      if (f.severity == QcSeverity::kHard) msg += " " + f.code + "(" + f.record + ")";
    fail(ErrorKind::kQualityControl, msg);
  }
  const double p_c = cluster_weight(t.resolved());
  if (!(p_c > 0.0)) fail(ErrorKind::kInvalidInput, "resolved cluster of task " + task_id + " has zero sampling weight");
  json ev{{"type", "finalized"}, {"task", task_id}, {"labeler", labeler}, {"p_c", p_c}, {"at", now}};
  Event event = ev.dump();
  apply_event(event);
  return event;
}

LabelingSession::Event LabelingSession::add_tag(const AuditTag& tag, std::int64_t now) {
  json ev{{"type", "tag"},       {"cluster_id", tag.cluster_id}, {"direction", to_string(tag.direction)},
          {"label", tag.label}, {"note", tag.note},             {"p_c", tag.p_c},
          {"at", now}};
  Event event = ev.dump();
  apply_event(event);
  return event;
}

std::vector<QcFlag> LabelingSession::qc(const AttributeTable* attrs, const QcOptions& options) const {
  std::vector<QcFlag> out;
  for (const auto& t : tasks_) {
    auto flags = qc_check(t, attrs, options);
    out.insert(out.end(), flags.begin(), flags.end());
  }
  return out;
}

BenchmarkSet LabelingSession::export_benchmark(bool finalized_only) const {
  std::vector<std::string> unfinished;
  for (const auto& t : tasks_)
    if (t.status != TaskStatus::kFinalized) unfinished.push_back(t.id);
  if (!unfinished.empty() && !finalized_only) {
    std::string msg = "cannot export: unfinalized tasks:";
    for (const auto& id : unfinished) msg += " " + id;
    fail(ErrorKind::kConflict, msg);
  }

  BenchmarkSet set;
  set.design = design_;
  set.rng_seed = rng_seed_;
  set.session_id = id_;
  set.prediction_snapshot = snapshot_;

  std::map<std::vector<std::string>, std::size_t> by_members;
  std::unordered_map<std::string, std::pair<std::size_t, std::string>> owner;  // record -> (entry, task)
  std::vector<std::string> conflicts;
  for (const auto& t : tasks_) {
    if (t.status != TaskStatus::kFinalized) continue;
    auto members = sorted_copy(t.resolved());
    auto [it, inserted] = by_members.emplace(members, set.entries.size());
    if (inserted) {
      for (const auto& r : members) {
        auto [oit, fresh] = owner.emplace(r, std::make_pair(set.entries.size(), t.id));
        if (!fresh) conflicts.push_back(t.id + " and " + oit->second.second + " share record " + r);
      }
      BenchmarkEntry entry;
      entry.members = std::move(members);
      entry.p_c = t.p_c;
      set.entries.push_back(std::move(entry));
    }
    BenchmarkEntry& entry = set.entries[it->second];
    entry.seed_records.push_back(t.seed_record);
    entry.finalized_at.push_back(t.finalized_at);
    entry.labelers.push_back(t.labeler);
  }
  if (!conflicts.empty()) {
    std::string msg = "overlapping benchmark clusters:";
    for (const auto& c : conflicts) msg += " [" + c + "]";
    fail(ErrorKind::kConflict, msg);
  }
  return set;
}

std::string LabelingSession::state_json() const {
  json s;
  s["v"] = 1;
  s["id"] = id_;
  s["design"] = to_string(design_);
  s["seed"] = rng_seed_;
  s["universe_size"] = universe_size_;
  s["snapshot"] = snapshot_;
  s["created_at"] = created_at_;
  s["event_count"] = event_count_;
  if (!record_weights_.empty()) {
    json w = json::object();
    for (const auto& [r, weight] : record_weights_) w[r] = weight;
    s["weights"] = std::move(w);
  }
  json tasks = json::array();
  for (const auto& t : tasks_) {
    json j;
    j["id"] = t.id;
    j["seed_record"] = t.seed_record;
    j["predicted_cluster"] = t.predicted_cluster;
    j["removed"] = t.removed;
    j["added"] = t.added;
    j["status"] = to_string(t.status);
    j["labeler"] = t.labeler;
    j["updated_at"] = t.updated_at;
    j["finalized_at"] = t.finalized_at;
    j["p_c"] = t.p_c;
    if (t.lease) j["lease"] = {{"holder", t.lease->holder}, {"expires_at", t.lease->expires_at}};
    else j["lease"] = nullptr;
    tasks.push_back(std::move(j));
  }
  s["tasks"] = std::move(tasks);
  json tags = json::array();
  for (const auto& t : tags_)
    tags.push_back({{"cluster_id", t.cluster_id},
                    {"direction", to_string(t.direction)},
                    {"label", t.label},
                    {"note", t.note},
                    {"p_c", t.p_c}});
  s["tags"] = std::move(tags);
  return s.dump(2) + "\n";
}

LabelingSession LabelingSession::from_state_json(const std::string& state) {
  const json s = json::parse(state);
  LabelingSession out;
  out.id_ = s.at("id").get<std::string>();
  out.design_ = parse_design(s.at("design").get<std::string>());
  out.rng_seed_ = s.at("seed").get<std::uint64_t>();
  out.universe_size_ = s.at("universe_size").get<std::size_t>();
  out.snapshot_ = s.at("snapshot").get<std::string>();
  out.created_at_ = s.at("created_at").get<std::int64_t>();
  out.event_count_ = s.at("event_count").get<std::size_t>();
  if (s.contains("weights")) {
    std::map<std::string, double> ordered;
    for (const auto& [r, w] : s.at("weights").items()) ordered[r] = w.get<double>();
    out.record_weights_.insert(ordered.begin(), ordered.end());
    for (const auto& [r, w] : ordered) out.total_weight_ += w;
  }
  for (const auto& j : s.at("tasks")) {
    LabelingTask t;
    t.id = j.at("id").get<std::string>();
    t.seed_record = j.at("seed_record").get<std::string>();
    t.predicted_cluster = j.at("predicted_cluster").get<std::vector<std::string>>();
    for (const auto& r : j.at("removed")) t.removed.insert(r.get<std::string>());
    for (const auto& r : j.at("added")) t.added.insert(r.get<std::string>());
    t.status = parse_status(j.at("status").get<std::string>());
    t.labeler = j.at("labeler").get<std::string>();
    t.updated_at = j.at("updated_at").get<std::int64_t>();
    t.finalized_at = j.at("finalized_at").get<std::int64_t>();
    t.p_c = j.at("p_c").get<double>();
    if (!j.at("lease").is_null())
      t.lease = Lease{j.at("lease").at("holder").get<std::string>(), j.at("lease").at("expires_at").get<std::int64_t>()};
    out.task_lookup_[t.id] = out.tasks_.size();
    out.tasks_.push_back(std::move(t));
  }
  for (const auto& j : s.at("tags"))
    out.tags_.push_back({j.at("cluster_id").get<std::string>(), parse_direction(j.at("direction").get<std::string>()),
                         j.at("label").get<std::string>(), j.at("note").get<std::string>(), j.at("p_c").get<double>()});
  return out;
}

}  // namespace ereval
