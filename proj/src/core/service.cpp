#include "ereval/service.hpp"

#include <charconv>
#include <chrono>
#include <random>
#include <set>

#include "httplib.h"
#include "json.hpp"

#include "ereval/estimators.hpp"
#include "ereval/summary_stats.hpp"
#include "ereval/text.hpp"

namespace ereval {

using json = nlohmann::ordered_json;

namespace {

constexpr std::size_t kDefaultLimit = 100;
constexpr std::size_t kMaxLimit = 10000;

HttpResponse reply(int status, const json& body) { return {status, body.dump() + "\n", "application/json"}; }

HttpResponse error_reply(int status, const std::string& kind, const std::string& message) {
  json body;
  body["v"] = 1;
  body["error"] = {{"kind", kind}, {"message", message}};
  return reply(status, body);
}

std::string kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid_input";
    case ErrorKind::kNotFound: return "not_found";
    case ErrorKind::kConflict: return "conflict";
    case ErrorKind::kQualityControl: return "quality_control";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kIo: return "io";
  }
  return "error";
}

std::vector<std::string> path_segments(const std::string& path) { return text::split(path, '/'); }

std::size_t parse_count(const std::map<std::string, std::string>& query, const std::string& key, std::size_t fallback) {
  auto it = query.find(key);
  if (it == query.end() || it->second.empty()) return fallback;
  std::size_t value = 0;
  auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), value);
  if (res.ec != std::errc() || res.ptr != it->second.data() + it->second.size())
    fail(ErrorKind::kInvalidInput, key + " must be a non-negative integer");
  return value;
}

struct Page {
  std::size_t limit;
  std::size_t offset;
};

Page page_of(const HttpRequest& req) {
  Page p{parse_count(req.query, "limit", kDefaultLimit), parse_count(req.query, "offset", 0)};
  if (p.limit > kMaxLimit) fail(ErrorKind::kInvalidInput, "limit must be at most " + std::to_string(kMaxLimit));
  return p;
}

template <typename T, typename F>
json paginate(const std::vector<T>& items, const Page& page, F&& render) {
  json out = json::array();
  for (std::size_t i = page.offset; i < items.size() && i < page.offset + page.limit; ++i) out.push_back(render(items[i]));
  return out;
}

json parse_body(const HttpRequest& req) {
  if (req.body.empty()) return json::object();
  try {
    json body = json::parse(req.body);
    if (!body.is_object()) fail(ErrorKind::kInvalidInput, "request body must be a JSON object");
    return body;
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kInvalidInput, std::string("malformed JSON body: ") + e.what());
  }
}

std::string required_string(const json& body, const char* key) {
  if (!body.contains(key) || !body.at(key).is_string() || body.at(key).get<std::string>().empty())
    fail(ErrorKind::kInvalidInput, std::string("body field '") + key + "' must be a non-empty string");
  return body.at(key).get<std::string>();
}

std::string query_param(const HttpRequest& req, const std::string& key) {
  auto it = req.query.find(key);
  return it == req.query.end() ? std::string() : it->second;
}

json record_json(const std::string& record, const AttributeTable* attrs) {
  json r;
  r["record"] = record;
  if (attrs && attrs->contains(record)) {
    json a = json::object();
    for (const auto& [name, value] : attrs->row(record)) a[name] = value;
    r["attributes"] = std::move(a);
  } else {
    r["attributes"] = json::object();
  }
  return r;
}

json flag_json(const QcFlag& f) {
  json j;
  j["task_id"] = f.task_id;
  j["severity"] = f.severity == QcSeverity::kHard ? "hard" : "soft";
  j["code"] = f.code;
  j["record"] = f.record;
  j["message"] = f.message;
  return j;
}

json session_summary(const LabelingSession& s) {
  std::size_t finalized = 0;
  for (const auto& t : s.tasks()) finalized += t.status == TaskStatus::kFinalized ? 1 : 0;
  json j;
  j["id"] = s.id();
  j["design"] = to_string(s.design());
  j["k"] = s.tasks().size();
  j["seed"] = s.rng_seed();
  j["created_at"] = s.created_at();
  j["finalized"] = finalized;
  j["prediction_snapshot"] = s.prediction_snapshot();
  return j;
}

json task_json(const LabelingSession& session, const LabelingTask& t, const AttributeTable* attrs) {
  json j;
  j["id"] = t.id;
  j["session"] = session.id();
  j["seed_record"] = t.seed_record;
  j["status"] = to_string(t.status);
  j["labeler"] = t.labeler;
  if (t.lease) j["lease"] = {{"holder", t.lease->holder}, {"expires_at", t.lease->expires_at}};
  else j["lease"] = nullptr;
  j["predicted_cluster"] = t.predicted_cluster;
  j["removed"] = t.removed;
  j["added"] = t.added;
  j["resolved"] = t.resolved();
  j["p_c"] = t.p_c;
  j["finalized_at"] = t.finalized_at;
  json records = json::array();
  for (const auto& r : t.predicted_cluster) records.push_back(record_json(r, attrs));
  for (const auto& r : t.added) records.push_back(record_json(r, attrs));
  j["records"] = std::move(records);
  json flags = json::array();
  for (const auto& f : qc_check(t, attrs)) flags.push_back(flag_json(f));
  j["qc"] = std::move(flags);
  return j;
}

json tag_json(const AuditTag& t) {
  json j;
  j["cluster_id"] = t.cluster_id;
  j["direction"] = to_string(t.direction);
  j["label"] = t.label;
  j["note"] = t.note;
  j["p_c"] = t.p_c;
  return j;
}

std::int64_t system_now() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

bool label_covers(const AttributeTable& attrs, const Clustering& clustering) {
  for (RecordIndex r = 0; r < clustering.universe_size(); ++r)
    if (!attrs.contains(clustering.record_id(r))) return false;
  return true;
}

}  // namespace

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return 400;
    case ErrorKind::kNotFound: return 404;
    case ErrorKind::kConflict: return 409;
    case ErrorKind::kQualityControl: return 422;
    case ErrorKind::kDegenerate: return 422;
    case ErrorKind::kIo: return 500;
  }
  return 500;
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  if (config_.prediction_path.empty()) fail(ErrorKind::kInvalidInput, "service needs a prediction membership file");
  if (!config_.clock) config_.clock = system_now;
  if (config_.lease_seconds <= 0) fail(ErrorKind::kInvalidInput, "lease duration must be positive");
  prediction_ = load_membership(config_.prediction_path);
  if (!config_.attributes_path.empty()) {
    attrs_ = load_attributes(config_.attributes_path);
    index_ = TokenIndex(*attrs_);
  }
  if (!config_.truth_path.empty()) truth_ = load_membership(config_.truth_path);
  if (!config_.match_probabilities.empty())
    error_weights_ = expected_error_weights(prediction_, load_match_probabilities(config_.match_probabilities));

  std::optional<NameIndex> names;
  if (attrs_ && label_covers(*attrs_, prediction_)) names = name_index(*attrs_);
  summary_json_ = summary_report_json(summarize(prediction_, names ? &*names : nullptr, default_hill_grid()));

  store_ = std::make_unique<SessionStore>(config_.journal_dir);
}

Service::~Service() = default;

std::int64_t Service::now() const { return config_.clock(); }

HttpResponse Service::handle(const HttpRequest& request) {
  try {
    const bool open = request.path == "/health";
    if (!open && !config_.token.empty() && request.authorization != "Bearer " + config_.token) {
      HttpResponse r = error_reply(401, "unauthorized", "missing or invalid bearer token");
      return r;
    }
    return route(request);
  } catch (const Error& e) {
    return error_reply(http_status(e.kind()), kind_name(e.kind()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_reply(400, "invalid_input", e.what());
  } catch (const std::exception& e) {
    return error_reply(500, "internal", e.what());
  }
}

HttpResponse Service::route(const HttpRequest& req) {
  const auto seg = path_segments(req.path);
  const bool get = req.method == "GET";
  const bool post = req.method == "POST";
  auto method_not_allowed = [] { return error_reply(405, "method_not_allowed", "method not allowed"); };

  if (seg.empty()) return get ? reply(200, json{{"v", 1}, {"service", "ereval"}}) : method_not_allowed();
  const std::string& head = seg[0];
  if (seg.size() == 1) {
    if (head == "health") return get ? reply(200, json{{"v", 1}, {"status", "ok"}}) : method_not_allowed();
    if (head == "sessions") return get ? list_sessions(req) : post ? create_session(req) : method_not_allowed();
    if (head == "search") return get ? search(req) : method_not_allowed();
    if (head == "estimates") return get ? estimates(req) : method_not_allowed();
    if (head == "summary-stats") return get ? summary_stats() : method_not_allowed();
  }
  if (head == "sessions" && seg.size() >= 2) {
    const std::string& id = seg[1];
    if (seg.size() == 2) return get ? get_session(id) : method_not_allowed();
    if (seg.size() == 3 && seg[2] == "tasks") return get ? list_tasks(id, req) : method_not_allowed();
    if (seg.size() == 4 && seg[2] == "tasks" && seg[3] == "next") return get ? next_task(id) : method_not_allowed();
    if (seg.size() == 3 && seg[2] == "export") return get ? export_session(id) : method_not_allowed();
    if (seg.size() == 3 && seg[2] == "qc") return get ? session_qc(id) : method_not_allowed();
    if (seg.size() == 3 && seg[2] == "audit") return get ? session_audit(id) : method_not_allowed();
  }
  if (head == "tasks" && seg.size() >= 2) {
    const std::string& id = seg[1];
    if (seg.size() == 2) return get ? get_task(id) : method_not_allowed();
    if (seg.size() == 3) {
      if (!post) return method_not_allowed();
      if (seg[2] == "begin") return begin_task(id, req);
      if (seg[2] == "release") return release_task(id, req);
      if (seg[2] == "edits") return edit_task(id, req);
      if (seg[2] == "finalize") return finalize_task(id, req);
    }
  }
  if (head == "clusters" && seg.size() == 3) {
    if (seg[2] == "membership-matrix") return get ? membership_matrix(seg[1], req) : method_not_allowed();
    if (seg[2] == "tags") return post ? add_tag(seg[1], req) : method_not_allowed();
  }
  return error_reply(404, "not_found", "no route for " + req.method + " " + req.path);
}

HttpResponse Service::list_sessions(const HttpRequest& req) {
  const Page page = page_of(req);
  const auto ids = store_->session_ids();
  json body;
  body["v"] = 1;
  body["total"] = ids.size();
  body["limit"] = page.limit;
  body["offset"] = page.offset;
  body["items"] = paginate(ids, page, [&](const std::string& id) {
    return store_->read(id, [](const LabelingSession& s) { return session_summary(s); });
  });
  return reply(200, body);
}

HttpResponse Service::create_session(const HttpRequest& req) {
  const json body = parse_body(req);
  SessionParams params;
  params.design = parse_design(body.value("design", std::string("pps_record")));
  if (!body.contains("k") || !body.at("k").is_number_unsigned())
    fail(ErrorKind::kInvalidInput, "body field 'k' must be a positive integer");
  params.k = body.at("k").get<std::size_t>();
  if (body.contains("seed")) {
    if (!body.at("seed").is_number_unsigned()) fail(ErrorKind::kInvalidInput, "seed must be a non-negative integer");
    params.rng_seed = body.at("seed").get<std::uint64_t>();
  } else {
    std::random_device rd;
    params.rng_seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  params.labeler = body.value("labeler", std::string());
  params.now = now();
  if (params.design == Design::kExpectedError) {
    if (error_weights_.empty())
      fail(ErrorKind::kInvalidInput, "expected_error sessions need match probabilities configured on the service");
    params.record_weights = error_weights_;
  }
  if (body.contains("id")) {
    params.id = required_string(body, "id");
  } else {
    for (std::size_t n = store_->session_ids().size() + 1;; ++n) {
      params.id = "session-" + std::to_string(n);
      if (!store_->contains(params.id)) break;
    }
  }
  store_->create(prediction_, params);
  json out;
  out["v"] = 1;
  out["session"] = store_->read(params.id, [](const LabelingSession& s) { return session_summary(s); });
  return reply(201, out);
}

HttpResponse Service::get_session(const std::string& id) {
  return {200, store_->read(id, [](const LabelingSession& s) { return s.state_json(); }), "application/json"};
}

HttpResponse Service::list_tasks(const std::string& id, const HttpRequest& req) {
  const Page page = page_of(req);
  const AttributeTable* attrs = attrs_ ? &*attrs_ : nullptr;
  return store_->read(id, [&](const LabelingSession& s) {
    json body;
    body["v"] = 1;
    body["total"] = s.tasks().size();
    body["limit"] = page.limit;
    body["offset"] = page.offset;
    body["items"] = paginate(s.tasks(), page, [&](const LabelingTask& t) { return task_json(s, t, attrs); });
    return reply(200, body);
  });
}

HttpResponse Service::next_task(const std::string& id) {
  const AttributeTable* attrs = attrs_ ? &*attrs_ : nullptr;
  const std::int64_t t = now();
  return store_->read(id, [&](const LabelingSession& s) {
    json body;
    body["v"] = 1;
    auto next = s.next_task(t);
    body["task"] = next ? task_json(s, s.task(*next), attrs) : json(nullptr);
    return reply(200, body);
  });
}

HttpResponse Service::get_task(const std::string& task_id) {
  const std::string session = store_->session_of_task(task_id);
  const AttributeTable* attrs = attrs_ ? &*attrs_ : nullptr;
  return store_->read(session, [&](const LabelingSession& s) {
    return reply(200, json{{"v", 1}, {"task", task_json(s, s.task(task_id), attrs)}});
  });
}

HttpResponse Service::begin_task(const std::string& task_id, const HttpRequest& req) {
  const json body = parse_body(req);
  const std::string labeler = required_string(body, "labeler");
  const std::int64_t lease = body.value("lease_seconds", config_.lease_seconds);
  const std::string session = store_->session_of_task(task_id);
  const std::int64_t t = now();
  store_->mutate(session, [&](LabelingSession& s) { return s.begin_task(task_id, labeler, t, lease); });
  return get_task(task_id);
}

HttpResponse Service::release_task(const std::string& task_id, const HttpRequest& req) {
  const json body = parse_body(req);
  const std::string labeler = required_string(body, "labeler");
  const std::string session = store_->session_of_task(task_id);
  const std::int64_t t = now();
  store_->mutate(session, [&](LabelingSession& s) { return s.release_task(task_id, labeler, t); });
  return get_task(task_id);
}

HttpResponse Service::edit_task(const std::string& task_id, const HttpRequest& req) {
  const json body = parse_body(req);
  const std::string labeler = required_string(body, "labeler");
  const auto op = LabelingSession::parse_edit_op(required_string(body, "op"));
  const std::string record = required_string(body, "record");
  const std::string session = store_->session_of_task(task_id);
  const std::int64_t t = now();
  store_->mutate(session, [&](LabelingSession& s) { return s.apply_edit(task_id, op, record, labeler, t, &prediction_); });
  return get_task(task_id);
}

HttpResponse Service::finalize_task(const std::string& task_id, const HttpRequest& req) {
  const json body = parse_body(req);
  const std::string labeler = required_string(body, "labeler");
  const std::string session = store_->session_of_task(task_id);
  const std::int64_t t = now();
  const AttributeTable* attrs = attrs_ ? &*attrs_ : nullptr;
  store_->mutate(session, [&](LabelingSession& s) { return s.finalize(task_id, labeler, t, attrs); });
  return get_task(task_id);
}

HttpResponse Service::export_session(const std::string& id) {
  const BenchmarkSet set = store_->read(id, [](const LabelingSession& s) { return s.export_benchmark(); });
  return {200, benchmark_to_jsonl(set), "application/x-ndjson"};
}

HttpResponse Service::session_qc(const std::string& id) {
  const AttributeTable* attrs = attrs_ ? &*attrs_ : nullptr;
  const auto flags = store_->read(id, [&](const LabelingSession& s) { return s.qc(attrs); });
  json body;
  body["v"] = 1;
  body["hard"] = has_hard_flags(flags);
  json items = json::array();
  for (const auto& f : flags) items.push_back(flag_json(f));
  body["flags"] = std::move(items);
  return reply(200, body);
}

HttpResponse Service::session_audit(const std::string& id) {
  const auto tags = store_->read(id, [](const LabelingSession& s) { return s.tags(); });
  json body;
  body["v"] = 1;
  json items = json::array();
  for (const auto& t : tags) items.push_back(tag_json(t));
  body["tags"] = std::move(items);
  json freqs = json::array();
  for (const auto& f : audit_frequencies(tags))
    freqs.push_back({{"direction", to_string(f.direction)},
                     {"label", f.label},
                     {"weight", f.weight},
                     {"frequency", f.frequency},
                     {"count", f.count}});
  body["frequencies"] = std::move(freqs);
  return reply(200, body);
}

HttpResponse Service::search(const HttpRequest& req) {
  if (!attrs_) fail(ErrorKind::kInvalidInput, "search needs a record attribute table configured on the service");
  const Page page = page_of(req);
  const std::string q = query_param(req, "q");
  const auto hits = index_.search(q);
  json body;
  body["v"] = 1;
  body["query"] = q;
  body["total"] = hits.size();
  body["limit"] = page.limit;
  body["offset"] = page.offset;
  body["items"] = paginate(hits, page, [&](const TokenIndex::Hit& h) {
    json j = record_json(h.record, &*attrs_);
    j["matched_tokens"] = h.matched_tokens;
    auto r = prediction_.find_record(h.record);
    j["predicted_cluster"] = r ? json(prediction_.cluster_id(prediction_.cluster_of(*r))) : json(nullptr);
    return j;
  });
  return reply(200, body);
}

HttpResponse Service::membership_matrix(const std::string& cluster_id, const HttpRequest& req) {
  const Page page = page_of(req);
  const std::string session = query_param(req, "session");
  std::vector<std::string> focal;
  std::unordered_map<std::string, std::string> true_cluster;
  std::string source;
  if (!session.empty()) {
    const BenchmarkSet set = store_->read(session, [](const LabelingSession& s) { return s.export_benchmark(true); });
    for (const auto& e : set.entries) {
      for (const auto& r : e.members) true_cluster[r] = e.cluster_id();
      if (e.cluster_id() == cluster_id) focal = e.members;
    }
    if (focal.empty()) fail(ErrorKind::kNotFound, "no finalized benchmark cluster " + cluster_id + " in " + session);
    source = "session";
  } else if (truth_) {
    const ClusterIndex c = truth_->cluster_index(cluster_id);
    focal = truth_->member_ids(c);
    for (RecordIndex r = 0; r < truth_->universe_size(); ++r)
      true_cluster[truth_->record_id(r)] = truth_->cluster_id(truth_->cluster_of(r));
    source = "truth";
  } else {
    fail(ErrorKind::kInvalidInput, "membership-matrix needs ?session= or a truth file configured on the service");
  }

  std::set<ClusterIndex> predicted;
  for (const auto& r : focal) predicted.insert(prediction_.cluster_of(prediction_.record_index(r)));
  const std::set<std::string> focal_set(focal.begin(), focal.end());
  std::vector<RecordIndex> rows;
  for (ClusterIndex c : predicted)
    for (RecordIndex r : prediction_.members(c)) rows.push_back(r);

  const AttributeTable* attrs = attrs_ ? &*attrs_ : nullptr;
  json body;
  body["v"] = 1;
  body["cluster_id"] = cluster_id;
  body["source"] = source;
  json pred_ids = json::array();
  for (ClusterIndex c : predicted) pred_ids.push_back(prediction_.cluster_id(c));
  body["predicted_clusters"] = std::move(pred_ids);
  body["total"] = rows.size();
  body["limit"] = page.limit;
  body["offset"] = page.offset;
  body["rows"] = paginate(rows, page, [&](RecordIndex r) {
    const std::string& id = prediction_.record_id(r);
    json j = record_json(id, attrs);
    auto it = true_cluster.find(id);
    j["true_cluster"] = it == true_cluster.end() ? json(nullptr) : json(it->second);
    j["predicted_cluster"] = prediction_.cluster_id(prediction_.cluster_of(r));
    j["in_focal_cluster"] = focal_set.count(id) != 0;
    return j;
  });
  return reply(200, body);
}

HttpResponse Service::add_tag(const std::string& cluster_id, const HttpRequest& req) {
  const json body = parse_body(req);
  const std::string session = required_string(body, "session");
  const Direction direction = parse_direction(required_string(body, "direction"));
  const std::string label = required_string(body, "label");
  const std::string note = body.value("note", std::string());
  const BenchmarkSet set = store_->read(session, [](const LabelingSession& s) { return s.export_benchmark(true); });
  const BenchmarkEntry* entry = nullptr;
  for (const auto& e : set.entries)
    if (e.cluster_id() == cluster_id) entry = &e;
  if (!entry) fail(ErrorKind::kNotFound, "no finalized benchmark cluster " + cluster_id + " in " + session);
  const AuditTag tag =
      record_audit_tag(cluster_errors(entry->members, prediction_, cluster_id, entry->p_c), direction, label, note);
  const std::int64_t t = now();
  store_->mutate(session, [&](LabelingSession& s) { return s.add_tag(tag, t); });
  return reply(201, json{{"v", 1}, {"tag", tag_json(tag)}});
}

HttpResponse Service::estimates(const HttpRequest& req) {
  const std::string session = query_param(req, "session");
  if (session.empty()) fail(ErrorKind::kInvalidInput, "estimates need ?session=");
  const std::string metric_list = query_param(req, "metrics");
  const auto metrics = parse_metric_list(metric_list.empty() ? "all" : metric_list);
  double beta = 1.0;
  const std::string beta_text = query_param(req, "beta");
  if (!beta_text.empty()) {
    auto res = std::from_chars(beta_text.data(), beta_text.data() + beta_text.size(), beta);
    if (res.ec != std::errc() || res.ptr != beta_text.data() + beta_text.size())
      fail(ErrorKind::kInvalidInput, "beta must be a number");
  }
  const std::string clamp_text = query_param(req, "clamp");
  const bool clamp = clamp_text == "1" || clamp_text == "true";
  const BenchmarkSet set = store_->read(session, [](const LabelingSession& s) { return s.export_benchmark(true); });
  const ClusterSample sample = parse_benchmark_sample(benchmark_to_jsonl(set));
  return {200, estimates_to_json(estimate_sample(sample, prediction_, metrics, beta, clamp)), "application/json"};
}

HttpResponse Service::summary_stats() { return {200, summary_json_, "application/json"}; }

int Service::bind() {
  server_ = std::make_unique<httplib::Server>();
  auto adapt = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    r.body = req.body;
    r.authorization = req.get_header_value("Authorization");
    HttpResponse out = handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type.c_str());
  };
  server_->Get(".*", adapt);
  server_->Post(".*", adapt);
  server_->Put(".*", adapt);
  server_->Patch(".*", adapt);
  server_->Delete(".*", adapt);
  if (!config_.static_dir.empty() && !server_->set_mount_point("/", config_.static_dir))
    fail(ErrorKind::kIo, "static directory not found: " + config_.static_dir);
  int port = config_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(config_.host);
    if (port < 0) fail(ErrorKind::kIo, "cannot bind " + config_.host);
  } else if (!server_->bind_to_port(config_.host, port)) {
    fail(ErrorKind::kIo, "cannot bind " + config_.host + ":" + std::to_string(port));
  }
  return port;
}

void Service::listen_after_bind() {
  if (!server_) fail(ErrorKind::kInvalidInput, "bind() must be called before listening");
  server_->listen_after_bind();
}

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace ereval
