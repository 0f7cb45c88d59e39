#include "ereval/ereval.h"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "json.hpp"

#include "ereval/core_model.hpp"
#include "ereval/error.hpp"
#include "ereval/error_metrics.hpp"
#include "ereval/estimators.hpp"
#include "ereval/journal.hpp"
#include "ereval/labeling.hpp"
#include "ereval/sampling.hpp"
#include "ereval/search.hpp"
#include "ereval/service.hpp"
#include "ereval/simulation.hpp"
#include "ereval/summary_stats.hpp"
#include "ereval/text.hpp"

struct ereval_clustering {
  ereval::Clustering value;
};
struct ereval_attributes {
  ereval::AttributeTable value;
};
struct ereval_sample {
  ereval::ClusterSample value;
};
struct ereval_error_table {
  ereval::ErrorTable value;
};
struct ereval_store {
  std::unique_ptr<ereval::SessionStore> value;
};
struct ereval_service {
  std::unique_ptr<ereval::Service> value;
  std::thread thread;
};

namespace {

using json = nlohmann::json;
using ereval::ErrorKind;
using ereval::fail;

thread_local std::string last_error;

int status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return EREVAL_E_INVALID;
    case ErrorKind::kNotFound: return EREVAL_E_NOT_FOUND;
    case ErrorKind::kConflict: return EREVAL_E_CONFLICT;
    case ErrorKind::kQualityControl: return EREVAL_E_QC;
    case ErrorKind::kDegenerate: return EREVAL_E_DEGENERATE;
    case ErrorKind::kIo: return EREVAL_E_IO;
  }
  return EREVAL_E_INTERNAL;
}

template <typename F>
int guard(F&& body) {
  last_error.clear();
  try {
    body();
    return EREVAL_OK;
  } catch (const ereval::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const json::exception& e) {
    last_error = e.what();
    return EREVAL_E_INVALID;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return EREVAL_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return EREVAL_E_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return EREVAL_E_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

template <typename T>
void require(const T* p, const char* what) {
  if (!p) fail(ErrorKind::kInvalidInput, std::string(what) + " must not be NULL");
}

std::string str_or(const char* s, const char* fallback) { return s ? std::string(s) : std::string(fallback); }

json parse_object(const char* text, const char* what) {
  if (!text || !*text) return json::object();
  json j = json::parse(text);
  if (!j.is_object()) fail(ErrorKind::kInvalidInput, std::string(what) + " must be a JSON object");
  return j;
}

std::int64_t now_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

std::vector<std::string> string_list(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  const json& v = j.at(key);
  if (v.is_string()) return ereval::text::split(v.get<std::string>(), ',');
  return v.get<std::vector<std::string>>();
}

std::string flags_json(const std::vector<ereval::QcFlag>& flags) {
  nlohmann::ordered_json body;
  body["v"] = 1;
  body["hard"] = ereval::has_hard_flags(flags);
  auto items = nlohmann::ordered_json::array();
  for (const auto& f : flags) {
    nlohmann::ordered_json j;
    j["task_id"] = f.task_id;
    j["severity"] = f.severity == ereval::QcSeverity::kHard ? "hard" : "soft";
    j["code"] = f.code;
    j["record"] = f.record;
    j["message"] = f.message;
    items.push_back(std::move(j));
  }
  body["flags"] = std::move(items);
  return body.dump(2) + "\n";
}

std::string audit_json(const std::vector<ereval::AuditTag>& tags) {
  nlohmann::ordered_json body;
  body["v"] = 1;
  body["tags"] = tags.size();
  auto items = nlohmann::ordered_json::array();
  for (const auto& f : ereval::audit_frequencies(tags)) {
    nlohmann::ordered_json j;
    j["direction"] = ereval::to_string(f.direction);
    j["label"] = f.label;
    j["count"] = f.count;
    j["weight"] = f.weight;
    j["frequency"] = f.frequency;
    items.push_back(std::move(j));
  }
  body["frequencies"] = std::move(items);
  return body.dump(2) + "\n";
}

ereval::ServiceConfig service_config(const char* config_json) {
  const json c = parse_object(config_json, "service config");
  ereval::ServiceConfig config;
  config.prediction_path = c.value("prediction", std::string());
  config.attributes_path = c.value("attributes", std::string());
  config.truth_path = c.value("truth", std::string());
  config.match_probabilities = c.value("match_probabilities", std::string());
  config.journal_dir = c.value("journal", std::string("journal"));
  config.static_dir = c.value("static", std::string());
  config.host = c.value("host", std::string("127.0.0.1"));
  config.port = c.value("port", 8080);
  config.lease_seconds = c.value("lease_seconds", std::int64_t{900});
  if (c.contains("token")) {
    config.token = c.at("token").get<std::string>();
  } else if (const char* env = std::getenv("EREVAL_API_TOKEN")) {
    config.token = env;
  }
  return config;
}

}  // namespace

extern "C" {

const char* ereval_version(void) { return "1.0.0"; }

const char* ereval_last_error(void) { return last_error.c_str(); }

void ereval_string_free(char* s) { std::free(s); }

int ereval_clustering_load(const char* path, ereval_clustering** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new ereval_clustering{ereval::load_membership(path)};
  });
}

int ereval_clustering_parse(const char* csv, size_t len, ereval_clustering** out) {
  return guard([&] {
    require(csv, "csv");
    require(out, "out");
    std::istringstream in(std::string(csv, len));
    *out = new ereval_clustering{ereval::ingest_membership(in)};
  });
}

int ereval_clustering_save(const ereval_clustering* c, const char* path) {
  return guard([&] {
    require(c, "clustering");
    require(path, "path");
    ereval::save_membership(c->value, path);
  });
}

int ereval_clustering_counts(const ereval_clustering* c, size_t* records, size_t* clusters) {
  return guard([&] {
    require(c, "clustering");
    if (records) *records = c->value.universe_size();
    if (clusters) *clusters = c->value.num_clusters();
  });
}

void ereval_clustering_free(ereval_clustering* c) { delete c; }

int ereval_attributes_load(const char* path, ereval_attributes** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new ereval_attributes{ereval::load_attributes(path)};
  });
}

int ereval_attributes_save(const ereval_attributes* a, const char* path) {
  return guard([&] {
    require(a, "attributes");
    require(path, "path");
    ereval::save_attributes(a->value, path);
  });
}

void ereval_attributes_free(ereval_attributes* a) { delete a; }

int ereval_summary_json(const ereval_clustering* c, const ereval_attributes* attrs, const double* grid,
                        size_t grid_len, char** out_json) {
  return guard([&] {
    require(c, "clustering");
    require(out_json, "out_json");
    std::vector<double> q = grid_len == 0 ? ereval::default_hill_grid() : std::vector<double>(grid, grid + grid_len);
    std::optional<ereval::NameIndex> names;
    if (attrs) names = ereval::name_index(attrs->value);
    *out_json = dup(ereval::summary_report_json(ereval::summarize(c->value, names ? &*names : nullptr, q)));
  });
}

int ereval_sample_draw(const ereval_clustering* truth, const char* design, size_t k, uint64_t seed,
                       const char* match_probabilities, ereval_sample** out) {
  return guard([&] {
    require(truth, "truth");
    require(out, "out");
    const ereval::Design d = ereval::parse_design(str_or(design, "pps_record"));
    ereval::ClusterSample sample;
    switch (d) {
      case ereval::Design::kPpsRecord: sample = ereval::sample_pps(truth->value, k, seed); break;
      case ereval::Design::kUniformCluster: sample = ereval::sample_uniform(truth->value, k, seed); break;
      case ereval::Design::kExpectedError: {
        if (!match_probabilities) fail(ErrorKind::kInvalidInput, "expected_error sampling needs match probabilities");
        const auto weights =
            ereval::expected_error_weights(truth->value, ereval::load_match_probabilities(match_probabilities));
        sample = ereval::sample_weighted(truth->value, weights, k, seed);
        break;
      }
      case ereval::Design::kExternal: fail(ErrorKind::kInvalidInput, "cannot draw an external sample");
    }
    *out = new ereval_sample{std::move(sample)};
  });
}

int ereval_sample_load(const char* path, ereval_sample** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new ereval_sample{ereval::load_benchmark_sample(path)};
  });
}

int ereval_sample_parse(const char* jsonl, size_t len, ereval_sample** out) {
  return guard([&] {
    require(jsonl, "jsonl");
    require(out, "out");
    *out = new ereval_sample{ereval::parse_benchmark_sample(std::string(jsonl, len))};
  });
}

int ereval_sample_save(const ereval_sample* s, const char* path) {
  return guard([&] {
    require(s, "sample");
    require(path, "path");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kIo, std::string("cannot write ") + path);
    out << ereval::sample_to_jsonl(s->value);
  });
}

int ereval_sample_jsonl(const ereval_sample* s, char** out_jsonl) {
  return guard([&] {
    require(s, "sample");
    require(out_jsonl, "out_jsonl");
    *out_jsonl = dup(ereval::sample_to_jsonl(s->value));
  });
}

int ereval_sample_size(const ereval_sample* s, size_t* draws) {
  return guard([&] {
    require(s, "sample");
    require(draws, "draws");
    *draws = s->value.size();
  });
}

void ereval_sample_free(ereval_sample* s) { delete s; }

int ereval_error_table_build(const ereval_sample* s, const ereval_clustering* prediction, ereval_error_table** out) {
  return guard([&] {
    require(s, "sample");
    require(prediction, "prediction");
    require(out, "out");
    *out = new ereval_error_table{ereval::error_table(s->value, prediction->value)};
  });
}

int ereval_error_table_census(const ereval_clustering* truth, const ereval_clustering* prediction,
                              ereval_error_table** out) {
  return guard([&] {
    require(truth, "truth");
    require(prediction, "prediction");
    require(out, "out");
    *out = new ereval_error_table{
        ereval::census_error_table(truth->value, prediction->value, ereval::Design::kUniformCluster)};
  });
}

int ereval_error_table_load(const char* path, ereval_error_table** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new ereval_error_table{ereval::load_error_table(path)};
  });
}

int ereval_error_table_save(const ereval_error_table* t, const char* path) {
  return guard([&] {
    require(t, "error table");
    require(path, "path");
    ereval::save_error_table(t->value, path);
  });
}

int ereval_error_table_rows(const ereval_error_table* t, size_t* rows) {
  return guard([&] {
    require(t, "error table");
    require(rows, "rows");
    *rows = t->value.size();
  });
}

void ereval_error_table_free(ereval_error_table* t) { delete t; }

int ereval_estimate_json(const ereval_sample* s, const ereval_clustering* prediction, const char* metrics, double beta,
                         int clamp, char** out_json) {
  return guard([&] {
    require(s, "sample");
    require(prediction, "prediction");
    require(out_json, "out_json");
    const auto list = ereval::parse_metric_list(str_or(metrics, "all"));
    *out_json =
        dup(ereval::estimates_to_json(ereval::estimate_sample(s->value, prediction->value, list, beta, clamp != 0)));
  });
}

int ereval_estimate_table_json(const ereval_error_table* t, const char* metrics, double beta, int clamp,
                               size_t universe_size, size_t pred_clusters, const char* design, char** out_json) {
  return guard([&] {
    require(t, "error table");
    require(out_json, "out_json");
    ereval::EstimateOptions options;
    options.beta = beta;
    options.clamp = clamp != 0;
    if (universe_size > 0) options.globals = ereval::PredictionGlobals{universe_size, pred_clusters};
    options.design = str_or(design, "external");
    const auto list = ereval::parse_metric_list(str_or(metrics, "all"));
    *out_json = dup(ereval::estimates_to_json(ereval::estimate_metrics(t->value, list, options)));
  });
}

int ereval_summary_estimate_json(const ereval_sample* s, const char* statistics, const ereval_attributes* attrs,
                                 char** out_json) {
  return guard([&] {
    require(s, "sample");
    require(out_json, "out_json");
    std::optional<ereval::NameIndex> names;
    if (attrs) names = ereval::name_index(attrs->value);
    std::vector<ereval::Estimate> out;
    for (const auto& name : ereval::text::split(str_or(statistics, "avg_cluster_size,matching_rate"), ','))
      out.push_back(
          ereval::estimate_summary(s->value, ereval::parse_summary_statistic(name), names ? &*names : nullptr));
    *out_json = dup(ereval::estimates_to_json(out));
  });
}

int ereval_oracle_json(const ereval_clustering* truth, const ereval_clustering* prediction, double beta,
                       char** out_json) {
  return guard([&] {
    require(truth, "truth");
    require(prediction, "prediction");
    require(out_json, "out_json");
    const auto m = ereval::oracle_metrics(truth->value, prediction->value, beta);
    nlohmann::ordered_json body;
    body["v"] = 1;
    body["beta"] = beta;
    nlohmann::ordered_json values;
    for (ereval::Metric metric : ereval::all_metrics()) {
      const double v = m.get(metric);
      values[ereval::to_string(metric)] = std::isfinite(v) ? nlohmann::ordered_json(v) : nullptr;
    }
    body["metrics"] = std::move(values);
    *out_json = dup(body.dump(2) + "\n");
  });
}

int ereval_generate_population(const char* config_json, ereval_clustering** truth, ereval_attributes** attrs) {
  return guard([&] {
    require(truth, "truth");
    const json c = parse_object(config_json, "population config");
    ereval::PopulationConfig config;
    config.n_pairs = c.value("pairs", config.n_pairs);
    config.n_singletons = c.value("singletons", config.n_singletons);
    if (c.contains("corruption")) {
      const json& r = c.at("corruption");
      if (r.is_number()) {
        config.corruption = ereval::CorruptionRates::uniform(r.get<double>());
      } else {
        config.corruption.first_name = r.value("first_name", config.corruption.first_name);
        config.corruption.last_name = r.value("last_name", config.corruption.last_name);
        config.corruption.birth_year = r.value("birth_year", config.corruption.birth_year);
        config.corruption.birth_month = r.value("birth_month", config.corruption.birth_month);
        config.corruption.birth_day = r.value("birth_day", config.corruption.birth_day);
      }
    }
    config.first_name_pool = c.value("first_name_pool", config.first_name_pool);
    config.last_name_pool = c.value("last_name_pool", config.last_name_pool);
    config.name_zipf_exponent = c.value("zipf", config.name_zipf_exponent);
    config.seed = c.value("seed", config.seed);
    auto pop = ereval::generate_rldata_like(config);
    *truth = new ereval_clustering{std::move(pop.truth)};
    if (attrs) *attrs = new ereval_attributes{std::move(pop.attrs)};
  });
}

int ereval_load_rldata(const char* path, ereval_clustering** truth, ereval_attributes** attrs) {
  return guard([&] {
    require(path, "path");
    require(truth, "truth");
    auto pop = ereval::load_rldata(path);
    *truth = new ereval_clustering{std::move(pop.truth)};
    if (attrs) *attrs = new ereval_attributes{std::move(pop.attrs)};
  });
}

int ereval_match_all_but_one(const ereval_attributes* attrs, int exact, ereval_clustering** out) {
  return guard([&] {
    require(attrs, "attributes");
    require(out, "out");
    *out = new ereval_clustering{ereval::all_but_one_match(attrs->value, exact != 0)};
  });
}

int ereval_simulate(const ereval_clustering* truth, const ereval_clustering* prediction, const char* config_json,
                    char** out_json, char** out_csv) {
  return guard([&] {
    require(truth, "truth");
    require(prediction, "prediction");
    require(out_json, "out_json");
    const json c = parse_object(config_json, "simulation config");
    ereval::SimConfig config;
    if (c.contains("designs")) {
      config.designs.clear();
      for (const auto& d : string_list(c, "designs")) config.designs.push_back(ereval::parse_design(d));
    }
    if (c.contains("sizes")) config.sizes = c.at("sizes").get<std::vector<std::size_t>>();
    config.reps = c.value("reps", config.reps);
    if (c.contains("metrics")) {
      config.metrics.clear();
      for (const auto& m : string_list(c, "metrics")) {
        const auto expanded = ereval::parse_metric_list(m);
        config.metrics.insert(config.metrics.end(), expanded.begin(), expanded.end());
      }
    }
    config.seed = c.value("seed", config.seed);
    config.beta = c.value("beta", config.beta);
    config.threads = c.value("threads", config.threads);
    config.checkpoint_path = c.value("checkpoint", std::string());
    const auto report = ereval::run_simulation(truth->value, prediction->value, config);
    std::string j = ereval::sim_report_json(report);
    std::string csv = out_csv ? ereval::sim_report_csv(report) : std::string();
    *out_json = dup(j);
    if (out_csv) *out_csv = dup(csv);
  });
}

int ereval_qc_labels_json(const char* labels_path, const ereval_clustering* prediction, const ereval_attributes* attrs,
                          int token_rule, char** out_json) {
  return guard([&] {
    require(labels_path, "labels_path");
    require(prediction, "prediction");
    require(out_json, "out_json");
    ereval::QcOptions options;
    options.token_overlap = token_rule != 0;
    const auto flags = ereval::qc_imported(ereval::load_imported_labels(labels_path), prediction->value,
                                           attrs ? &attrs->value : nullptr, options);
    *out_json = dup(flags_json(flags));
  });
}

int ereval_audit_report_json(const char* tags_path, char** out_json) {
  return guard([&] {
    require(tags_path, "tags_path");
    require(out_json, "out_json");
    *out_json = dup(audit_json(ereval::load_audit_tags(tags_path)));
  });
}

int ereval_search_json(const ereval_attributes* attrs, const char* query, size_t limit, char** out_json) {
  return guard([&] {
    require(attrs, "attributes");
    require(query, "query");
    require(out_json, "out_json");
    ereval::TokenIndex index(attrs->value);
    const auto hits = index.search(query);
    nlohmann::ordered_json body;
    body["v"] = 1;
    body["query"] = query;
    body["total"] = hits.size();
    auto items = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < hits.size() && i < limit; ++i)
      items.push_back({{"record", hits[i].record},
                       {"label", attrs->value.label(hits[i].record)},
                       {"matched_tokens", hits[i].matched_tokens}});
    body["items"] = std::move(items);
    *out_json = dup(body.dump(2) + "\n");
  });
}

int ereval_store_open(const char* directory, ereval_store** out) {
  return guard([&] {
    require(directory, "directory");
    require(out, "out");
    *out = new ereval_store{std::make_unique<ereval::SessionStore>(directory)};
  });
}

void ereval_store_free(ereval_store* store) { delete store; }

int ereval_session_create(ereval_store* store, const ereval_clustering* prediction, const char* params_json,
                          char** out_state_json) {
  return guard([&] {
    require(store, "store");
    require(prediction, "prediction");
    const json p = parse_object(params_json, "session params");
    ereval::SessionParams params;
    params.id = p.at("id").get<std::string>();
    params.design = ereval::parse_design(p.value("design", std::string("pps_record")));
    params.k = p.at("k").get<std::size_t>();
    params.rng_seed = p.value("seed", std::uint64_t{0});
    params.labeler = p.value("labeler", std::string());
    params.now = p.value("now", now_seconds());
    if (params.design == ereval::Design::kExpectedError) {
      if (!p.contains("match_probabilities"))
        fail(ErrorKind::kInvalidInput, "expected_error sessions need \"match_probabilities\"");
      params.record_weights = ereval::expected_error_weights(
          prediction->value, ereval::load_match_probabilities(p.at("match_probabilities").get<std::string>()));
    }
    store->value->create(prediction->value, params);
    if (out_state_json)
      *out_state_json = dup(store->value->read(params.id, [](const ereval::LabelingSession& s) { return s.state_json(); }));
  });
}

int ereval_session_apply(ereval_store* store, const char* session_id, const char* op_json,
                         const ereval_clustering* prediction, const ereval_attributes* attrs, char** out_event_json) {
  return guard([&] {
    require(store, "store");
    require(session_id, "session_id");
    const json o = parse_object(op_json, "operation");
    const std::string op = o.at("op").get<std::string>();
    const std::int64_t now = o.value("now", now_seconds());
    const std::string labeler = o.value("labeler", std::string());
    const std::string task = o.value("task", std::string());
    const ereval::Clustering* pred = prediction ? &prediction->value : nullptr;
    const ereval::AttributeTable* table = attrs ? &attrs->value : nullptr;

    std::function<std::string(ereval::LabelingSession&)> action;
    if (op == "begin") {
      const std::int64_t lease = o.value("lease_seconds", std::int64_t{900});
      action = [&](ereval::LabelingSession& s) { return s.begin_task(task, labeler, now, lease); };
    } else if (op == "release") {
      action = [&](ereval::LabelingSession& s) { return s.release_task(task, labeler, now); };
    } else if (op == "edit") {
      const auto edit = ereval::LabelingSession::parse_edit_op(o.at("edit").get<std::string>());
      const std::string record = o.at("record").get<std::string>();
      action = [&, edit, record](ereval::LabelingSession& s) {
        return s.apply_edit(task, edit, record, labeler, now, pred);
      };
    } else if (op == "finalize") {
      action = [&](ereval::LabelingSession& s) { return s.finalize(task, labeler, now, table); };
    } else if (op == "tag") {
      if (!pred) fail(ErrorKind::kInvalidInput, "tagging needs the prediction");
      const std::string cluster = o.at("cluster_id").get<std::string>();
      const auto set = store->value->read(session_id, [](const ereval::LabelingSession& s) {
        return s.export_benchmark(true);
      });
      const ereval::BenchmarkEntry* entry = nullptr;
      for (const auto& e : set.entries)
        if (e.cluster_id() == cluster) entry = &e;
      if (!entry) fail(ErrorKind::kNotFound, "no finalized benchmark cluster " + cluster);
      const auto tag = ereval::record_audit_tag(ereval::cluster_errors(entry->members, *pred, cluster, entry->p_c),
                                                ereval::parse_direction(o.at("direction").get<std::string>()),
                                                o.at("label").get<std::string>(), o.value("note", std::string()));
      action = [tag, now](ereval::LabelingSession& s) { return s.add_tag(tag, now); };
    } else {
      fail(ErrorKind::kInvalidInput, "unknown session operation: " + op);
    }
    const std::string event = store->value->mutate(session_id, action);
    if (out_event_json) *out_event_json = dup(event);
  });
}

int ereval_session_state(ereval_store* store, const char* session_id, char** out_state_json) {
  return guard([&] {
    require(store, "store");
    require(session_id, "session_id");
    require(out_state_json, "out_state_json");
    *out_state_json = dup(store->value->read(session_id, [](const ereval::LabelingSession& s) { return s.state_json(); }));
  });
}

int ereval_session_qc_json(ereval_store* store, const char* session_id, const ereval_attributes* attrs,
                           char** out_json) {
  return guard([&] {
    require(store, "store");
    require(session_id, "session_id");
    require(out_json, "out_json");
    const auto flags = store->value->read(
        session_id, [&](const ereval::LabelingSession& s) { return s.qc(attrs ? &attrs->value : nullptr); });
    *out_json = dup(flags_json(flags));
  });
}

int ereval_session_export(ereval_store* store, const char* session_id, char** out_jsonl) {
  return guard([&] {
    require(store, "store");
    require(session_id, "session_id");
    require(out_jsonl, "out_jsonl");
    const auto set =
        store->value->read(session_id, [](const ereval::LabelingSession& s) { return s.export_benchmark(); });
    *out_jsonl = dup(ereval::benchmark_to_jsonl(set));
  });
}

int ereval_session_audit_json(ereval_store* store, const char* session_id, char** out_json) {
  return guard([&] {
    require(store, "store");
    require(session_id, "session_id");
    require(out_json, "out_json");
    const auto tags = store->value->read(session_id, [](const ereval::LabelingSession& s) { return s.tags(); });
    *out_json = dup(audit_json(tags));
  });
}

int ereval_journal_replay(const char* journal_path, char** out_state_json) {
  return guard([&] {
    require(journal_path, "journal_path");
    require(out_state_json, "out_state_json");
    *out_state_json = dup(ereval::SessionStore::replay_file(journal_path).state_json());
  });
}

int ereval_serve(const char* config_json) {
  return guard([&] {
    ereval::Service service(service_config(config_json));
    const int port = service.bind();
    std::cerr << "listening on http://" << service_config(config_json).host << ":" << port << std::endl;
    service.listen_after_bind();
  });
}

int ereval_service_start(const char* config_json, ereval_service** out, int* port) {
  return guard([&] {
    require(out, "out");
    auto handle = std::make_unique<ereval_service>();
    handle->value = std::make_unique<ereval::Service>(service_config(config_json));
    const int bound = handle->value->bind();
    ereval::Service* svc = handle->value.get();
    handle->thread = std::thread([svc] { svc->listen_after_bind(); });
    if (port) *port = bound;
    *out = handle.release();
  });
}

void ereval_service_stop(ereval_service* service) {
  if (!service) return;
  service->value->stop();
  if (service->thread.joinable()) service->thread.join();
  delete service;
}

}  // extern "C"
