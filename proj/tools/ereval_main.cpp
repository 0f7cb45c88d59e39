// ereval command-line tool. Talks to the library only through the C API.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ereval/ereval.h"

namespace {

using json = nlohmann::ordered_json;

// Carries a C API status out of a subcommand.
struct Failure {
  int status;
  std::string message;
};

void check(int status) {
  if (status != EREVAL_OK) throw Failure{status, ereval_last_error()};
}

[[noreturn]] void usage_error(const std::string& message) { throw Failure{EREVAL_E_INVALID, message}; }

int exit_code(int status) {
  switch (status) {
    case EREVAL_E_INVALID:
    case EREVAL_E_NOT_FOUND:
    case EREVAL_E_CONFLICT:
    case EREVAL_E_QC: return 1;
    default: return 2;
  }
}

// Owning wrappers over the C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (ptr) Free(ptr);
  }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Clustering = Handle<ereval_clustering, ereval_clustering_free>;
using Attributes = Handle<ereval_attributes, ereval_attributes_free>;
using Sample = Handle<ereval_sample, ereval_sample_free>;
using Table = Handle<ereval_error_table, ereval_error_table_free>;
using Store = Handle<ereval_store, ereval_store_free>;

std::string take(char* s) {
  std::string out = s ? s : "";
  ereval_string_free(s);
  return out;
}

void load(Clustering& c, const std::string& path) { check(ereval_clustering_load(path.c_str(), c.out())); }
void load(Attributes& a, const std::string& path) { check(ereval_attributes_load(path.c_str(), a.out())); }

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t drawn = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "seed: " << drawn << "\n";
  return drawn;
}

void write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Failure{EREVAL_E_IO, "cannot write " + path};
  out << text;
}

std::string fmt(const json& v, int precision = 4) {
  if (v.is_null()) return "-";
  if (v.is_number_float()) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << v.get<double>();
    return s.str();
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// Fixed-width table; the first row is the header.
std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (width.size() <= i) width.push_back(0);
      width[i] = std::max(width[i], r[i].size());
    }
  std::ostringstream out;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (std::size_t i = 0; i < rows[n].size(); ++i)
      out << (i ? "  " : "") << std::left << std::setw(static_cast<int>(width[i])) << rows[n][i];
    out << "\n";
    if (n == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out << std::string(total > 2 ? total - 2 : 0, '-') << "\n";
    }
  }
  return out.str();
}

std::string pretty_estimates(const std::string& doc) {
  const json j = json::parse(doc);
  std::vector<std::vector<std::string>> rows{{"metric", "point", "std", "lower", "upper", "k", "flags"}};
  for (const auto& e : j.at("estimates")) {
    std::string flags;
    for (const auto& f : e.at("flags")) flags += (flags.empty() ? "" : ",") + f.get<std::string>();
    rows.push_back({e.at("metric").get<std::string>(), fmt(e.at("point")), fmt(e.at("std")), fmt(e.at("lower")),
                    fmt(e.at("upper")), fmt(e.at("k")), flags});
  }
  return table(rows);
}

std::string pretty_summary(const json& j) {
  std::vector<std::vector<std::string>> rows{{"statistic", "value"}};
  for (const char* key : {"universe_size", "num_clusters", "avg_cluster_size", "matching_rate", "homonymy_rate",
                          "name_variation_rate"})
    rows.push_back({key, fmt(j.at(key))});
  for (const auto& h : j.at("hill")) rows.push_back({"hill q=" + fmt(h.at("q"), 2), fmt(h.at("value"))});
  return table(rows);
}

std::string pretty_simulation(const std::string& doc) {
  const json j = json::parse(doc);
  std::vector<std::vector<std::string>> rows{
      {"metric", "design", "k", "truth", "bias", "rmse", "coverage_2", "mean_std", "failures"}};
  for (const auto& c : j.at("cells"))
    rows.push_back({fmt(c.at("metric")), fmt(c.at("design")), fmt(c.at("k")), fmt(c.at("truth")), fmt(c.at("bias"), 5),
                    fmt(c.at("rmse"), 5), fmt(c.at("coverage_2"), 3), fmt(c.at("mean_std"), 5),
                    fmt(c.at("failures"))});
  return table(rows);
}

std::string pretty_flags(const std::string& doc) {
  const json j = json::parse(doc);
  std::vector<std::vector<std::string>> rows{{"task", "severity", "code", "record", "message"}};
  for (const auto& f : j.at("flags"))
    rows.push_back({fmt(f.at("task_id")), fmt(f.at("severity")), fmt(f.at("code")), fmt(f.at("record")),
                    fmt(f.at("message"))});
  return rows.size() == 1 ? std::string("no QC flags\n") : table(rows);
}

std::string pretty_audit(const std::string& doc) {
  const json j = json::parse(doc);
  std::vector<std::vector<std::string>> rows{{"direction", "label", "count", "weight", "frequency"}};
  for (const auto& f : j.at("frequencies"))
    rows.push_back({fmt(f.at("direction")), fmt(f.at("label")), fmt(f.at("count")), fmt(f.at("weight"), 2),
                    fmt(f.at("frequency"))});
  return table(rows);
}

void emit(const std::string& doc, const std::string& out_path, bool pretty,
          const std::function<std::string(const std::string&)>& render) {
  write_text(pretty ? render(doc) : doc, out_path);
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    if (item == "inf" || item == "infinity") {
      grid.push_back(INFINITY);
      continue;
    }
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      usage_error("bad Hill order: " + item);
    }
  }
  if (grid.empty()) usage_error("--hill-grid is empty");
  return grid;
}

// --- stats -----------------------------------------------------------------

struct StatsOptions {
  std::string membership, attributes, series, truth_sample, statistics = "avg_cluster_size,matching_rate";
  std::string hill_grid, out;
  bool pretty = false;
};

std::string summary_of(const std::string& membership, const Attributes& attrs, const std::vector<double>& grid) {
  Clustering c;
  load(c, membership);
  char* doc = nullptr;
  check(ereval_summary_json(c.get(), attrs.get(), grid.data(), grid.size(), &doc));
  return take(doc);
}

void run_stats(const StatsOptions& o) {
  const int modes = !o.membership.empty() + !o.series.empty() + !o.truth_sample.empty();
  if (modes != 1) usage_error("stats needs exactly one of --membership, --series or --truth-sample");
  Attributes attrs;
  if (!o.attributes.empty()) load(attrs, o.attributes);
  const std::vector<double> grid = o.hill_grid.empty() ? std::vector<double>{} : parse_grid(o.hill_grid);

  if (!o.truth_sample.empty()) {
    if (o.statistics.find("hill") != std::string::npos)
      usage_error("Hill numbers are not estimated from samples; compute them on a full clustering with --membership");
    Sample s;
    check(ereval_sample_load(o.truth_sample.c_str(), s.out()));
    char* doc = nullptr;
    check(ereval_summary_estimate_json(s.get(), o.statistics.c_str(), attrs.get(), &doc));
    emit(take(doc), o.out, o.pretty, pretty_estimates);
    return;
  }
  if (!o.membership.empty()) {
    emit(summary_of(o.membership, attrs, grid), o.out, o.pretty,
         [](const std::string& d) { return pretty_summary(json::parse(d)); });
    return;
  }
  namespace fs = std::filesystem;
  if (!fs::is_directory(o.series)) throw Failure{EREVAL_E_IO, "not a directory: " + o.series};
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(o.series))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) usage_error("no .csv membership files in " + o.series);
  json doc;
  doc["v"] = 1;
  doc["series"] = json::array();
  for (const auto& f : files) {
    json item = json::parse(summary_of(f.string(), attrs, grid));
    item.erase("v");
    json entry;
    entry["name"] = f.stem().string();
    entry.update(item);
    doc["series"].push_back(std::move(entry));
  }
  emit(doc.dump(2) + "\n", o.out, o.pretty, [](const std::string& d) {
    std::string out;
    for (const auto& s : json::parse(d).at("series")) out += "== " + s.at("name").get<std::string>() + "\n" + pretty_summary(s);
    return out;
  });
}

// --- estimate --------------------------------------------------------------

struct EstimateOptionsCli {
  std::string truth_sample, prediction, error_table, error_table_out, metrics = "all", design = "external", out;
  std::size_t universe_size = 0, pred_clusters = 0;
  double beta = 1.0;
  bool clamp = false, pretty = false;
};

void run_estimate(const EstimateOptionsCli& o) {
  if (o.truth_sample.empty() == o.error_table.empty())
    usage_error("estimate needs exactly one of --truth-sample or --error-table");
  char* doc = nullptr;
  if (!o.truth_sample.empty()) {
    if (o.prediction.empty()) usage_error("--truth-sample needs --prediction");
    Clustering pred;
    load(pred, o.prediction);
    Sample s;
    check(ereval_sample_load(o.truth_sample.c_str(), s.out()));
    if (!o.error_table_out.empty()) {
      Table t;
      check(ereval_error_table_build(s.get(), pred.get(), t.out()));
      check(ereval_error_table_save(t.get(), o.error_table_out.c_str()));
    }
    check(ereval_estimate_json(s.get(), pred.get(), o.metrics.c_str(), o.beta, o.clamp, &doc));
  } else {
    std::size_t n = o.universe_size, m = o.pred_clusters;
    if (!o.prediction.empty()) {
      Clustering pred;
      load(pred, o.prediction);
      check(ereval_clustering_counts(pred.get(), &n, &m));
    }
    Table t;
    check(ereval_error_table_load(o.error_table.c_str(), t.out()));
    check(ereval_estimate_table_json(t.get(), o.metrics.c_str(), o.beta, o.clamp, n, m, o.design.c_str(), &doc));
  }
  emit(take(doc), o.out, o.pretty, pretty_estimates);
}

// --- sample ----------------------------------------------------------------

struct SampleOptions {
  std::string membership, design = "pps_record", match_probabilities, out, journal, session, labeler;
  std::size_t k = 0;
  std::optional<std::uint64_t> seed;
};

void run_sample(const SampleOptions& o) {
  if (o.k == 0) usage_error("--k must be positive");
  if (o.journal.empty() != o.session.empty()) usage_error("--journal and --session go together");
  const std::uint64_t seed = resolve_seed(o.seed);
  Clustering c;
  load(c, o.membership);
  if (!o.journal.empty()) {
    Store store;
    check(ereval_store_open(o.journal.c_str(), store.out()));
    json params{{"id", o.session}, {"design", o.design}, {"k", o.k}, {"seed", seed}, {"labeler", o.labeler}};
    if (!o.match_probabilities.empty()) params["match_probabilities"] = o.match_probabilities;
    char* state = nullptr;
    check(ereval_session_create(store.get(), c.get(), params.dump().c_str(), &state));
    write_text(take(state), o.out);
    return;
  }
  Sample s;
  check(ereval_sample_draw(c.get(), o.design.c_str(), o.k, seed,
                           o.match_probabilities.empty() ? nullptr : o.match_probabilities.c_str(), s.out()));
  char* jsonl = nullptr;
  check(ereval_sample_jsonl(s.get(), &jsonl));
  write_text(take(jsonl), o.out);
}

// --- simulate --------------------------------------------------------------

struct SimulateOptions {
  std::string truth, prediction, rldata, designs = "pps_record,uniform_cluster", sizes = "200,400,800",
                                         metrics = "pairwise_precision,pairwise_recall", checkpoint,
                                         out = "simreport.json", csv;
  bool generate = false, exact_matcher = false, pretty = false;
  std::size_t reps = 1000, pairs = 1000, singletons = 8000;
  std::optional<double> corruption;
  std::optional<std::uint64_t> seed;
  double beta = 1.0;
  unsigned threads = 0;
};

void run_simulate(const SimulateOptions& o) {
  const int modes = !o.truth.empty() + o.generate + !o.rldata.empty();
  if (modes != 1) usage_error("simulate needs exactly one of --truth, --generate or --rldata");
  if (!o.truth.empty() && o.prediction.empty()) usage_error("--truth needs --prediction");
  const std::uint64_t seed = resolve_seed(o.seed);

  Clustering truth, pred;
  if (!o.truth.empty()) {
    load(truth, o.truth);
    load(pred, o.prediction);
  } else {
    Attributes attrs;
    if (o.generate) {
      json config{{"pairs", o.pairs}, {"singletons", o.singletons}, {"seed", seed}};
      if (o.corruption) config["corruption"] = *o.corruption;
      check(ereval_generate_population(config.dump().c_str(), truth.out(), attrs.out()));
    } else {
      check(ereval_load_rldata(o.rldata.c_str(), truth.out(), attrs.out()));
    }
    if (!o.prediction.empty()) load(pred, o.prediction);
    else check(ereval_match_all_but_one(attrs.get(), o.exact_matcher, pred.out()));
  }

  std::vector<std::size_t> sizes;
  {
    std::stringstream in(o.sizes);
    std::string item;
    while (std::getline(in, item, ',')) {
      if (item.empty()) continue;
      try {
        sizes.push_back(std::stoul(item));
      } catch (const std::exception&) {
        usage_error("bad sample size: " + item);
      }
    }
  }
  json config{{"designs", o.designs}, {"sizes", sizes}, {"reps", o.reps}, {"metrics", o.metrics},
              {"seed", seed},       {"beta", o.beta},   {"threads", o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency())}};
  if (!o.checkpoint.empty()) config["checkpoint"] = o.checkpoint;
  char* report = nullptr;
  char* csv = nullptr;
  check(ereval_simulate(truth.get(), pred.get(), config.dump().c_str(), &report, o.csv.empty() ? nullptr : &csv));
  const std::string doc = take(report);
  if (!o.csv.empty()) write_text(take(csv), o.csv);
  write_text(doc, o.out);
  if (o.pretty) std::cout << pretty_simulation(doc);
}

// --- qc --------------------------------------------------------------------

struct QcOptionsCli {
  std::string labels, prediction, attributes, journal, session, out;
  bool no_token_rule = false, pretty = false;
};

void run_qc(const QcOptionsCli& o) {
  if (o.labels.empty() == o.journal.empty()) usage_error("qc needs exactly one of --labels or --journal");
  Attributes attrs;
  if (!o.attributes.empty()) load(attrs, o.attributes);
  char* doc = nullptr;
  if (!o.labels.empty()) {
    if (o.prediction.empty()) usage_error("--labels needs --prediction");
    Clustering pred;
    load(pred, o.prediction);
    check(ereval_qc_labels_json(o.labels.c_str(), pred.get(), attrs.get(), !o.no_token_rule, &doc));
  } else {
    if (o.session.empty()) usage_error("--journal needs --session");
    Store store;
    check(ereval_store_open(o.journal.c_str(), store.out()));
    check(ereval_session_qc_json(store.get(), o.session.c_str(), attrs.get(), &doc));
  }
  const std::string text = take(doc);
  emit(text, o.out, o.pretty, pretty_flags);
  if (json::parse(text).at("hard").get<bool>()) throw Failure{EREVAL_E_QC, "hard QC violations found"};
}

// --- serve -----------------------------------------------------------------

struct ServeOptions {
  std::string prediction, attributes, truth, match_probabilities, journal = "journal", static_dir, host = "127.0.0.1";
  int port = 8080;
  std::int64_t lease_seconds = 900;
};

void run_serve(const ServeOptions& o) {
  json config{{"prediction", o.prediction}, {"attributes", o.attributes}, {"truth", o.truth},
              {"match_probabilities", o.match_probabilities}, {"journal", o.journal}, {"static", o.static_dir},
              {"host", o.host}, {"port", o.port}, {"lease_seconds", o.lease_seconds}};
  check(ereval_serve(config.dump().c_str()));
}

// --- audit-report ----------------------------------------------------------

struct AuditOptions {
  std::string tags, journal, session, out;
  bool pretty = false;
};

void run_audit(const AuditOptions& o) {
  if (o.tags.empty() == o.journal.empty()) usage_error("audit-report needs exactly one of --tags or --journal");
  char* doc = nullptr;
  if (!o.tags.empty()) {
    check(ereval_audit_report_json(o.tags.c_str(), &doc));
  } else {
    if (o.session.empty()) usage_error("--journal needs --session");
    Store store;
    check(ereval_store_open(o.journal.c_str(), store.out()));
    check(ereval_session_audit_json(store.get(), o.session.c_str(), &doc));
  }
  emit(take(doc), o.out, o.pretty, pretty_audit);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entity-resolution evaluation: summary statistics, error metrics, estimators, simulation, labeling QC"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ereval_version()));

  StatsOptions stats;
  auto* s = app.add_subcommand("stats", "Summary statistics of a clustering (or estimates from a benchmark)");
  s->add_option("--membership", stats.membership, "Membership CSV (record_id,cluster_id)");
  s->add_option("--attributes", stats.attributes, "Attribute CSV (record_id,label,...) for homonymy and name variation");
  s->add_option("--series", stats.series, "Directory of membership CSVs, one per release");
  s->add_option("--truth-sample", stats.truth_sample, "Benchmark JSON lines; estimate statistics of the truth");
  s->add_option("--statistics", stats.statistics, "Statistics to estimate with --truth-sample")->capture_default_str();
  s->add_option("--hill-grid", stats.hill_grid, "Comma-separated Hill orders, 'inf' allowed");
  s->add_option("--out", stats.out, "Output file (default stdout)");
  s->add_flag("--pretty", stats.pretty, "Human-readable table");

  EstimateOptionsCli est;
  auto* e = app.add_subcommand("estimate", "Estimate performance metrics from a benchmark sample");
  e->add_option("--truth-sample", est.truth_sample, "Benchmark JSON lines");
  e->add_option("--prediction", est.prediction, "Predicted membership CSV");
  e->add_option("--error-table", est.error_table, "Precomputed error table CSV");
  e->add_option("--error-table-out", est.error_table_out, "Write the error table built from --truth-sample");
  e->add_option("--universe-size", est.universe_size, "Records in the prediction (with --error-table)");
  e->add_option("--pred-clusters", est.pred_clusters, "Predicted clusters (with --error-table)");
  e->add_option("--design", est.design, "Design label reported with --error-table")->capture_default_str();
  e->add_option("--metrics", est.metrics, "Comma-separated metrics or 'all'")->capture_default_str();
  e->add_option("--beta", est.beta, "F-score beta")->capture_default_str()->check(CLI::PositiveNumber);
  e->add_flag("--clamp", est.clamp, "Clamp point estimates into [0, 1]");
  e->add_option("--out", est.out, "Output file (default stdout)");
  e->add_flag("--pretty", est.pretty, "Human-readable table");

  SampleOptions smp;
  auto* sa = app.add_subcommand("sample", "Draw a cluster sample or create a labeling session");
  sa->add_option("--membership", smp.membership, "Membership CSV to sample from")->required();
  sa->add_option("--design", smp.design, "pps_record, uniform_cluster or expected_error")->capture_default_str();
  sa->add_option("--k", smp.k, "Number of draws")->required();
  sa->add_option("--seed", smp.seed, "Random seed (drawn and printed when absent)");
  sa->add_option("--match-probabilities", smp.match_probabilities, "record_a,record_b,p CSV for expected_error");
  sa->add_option("--journal", smp.journal, "Create a labeling session in this journal directory");
  sa->add_option("--session", smp.session, "Labeling session id");
  sa->add_option("--labeler", smp.labeler, "Creator recorded in the session");
  sa->add_option("--out", smp.out, "Output file (default stdout)");

  SimulateOptions sim;
  auto* si = app.add_subcommand("simulate", "Monte-Carlo study of estimator bias, RMSE and coverage");
  si->add_option("--truth", sim.truth, "True membership CSV");
  si->add_option("--prediction", sim.prediction, "Predicted membership CSV (default: all-but-one matcher)");
  si->add_flag("--generate", sim.generate, "Use a synthetic RLdata-like population");
  si->add_option("--rldata", sim.rldata, "RLdata-style CSV with entity ids");
  si->add_option("--pairs", sim.pairs, "Duplicate pairs in the synthetic population")->capture_default_str();
  si->add_option("--singletons", sim.singletons, "Singletons in the synthetic population")->capture_default_str();
  si->add_option("--corruption", sim.corruption, "Per-field corruption rate of duplicates");
  si->add_flag("--exact-matcher", sim.exact_matcher, "Compare all record pairs in the matcher");
  si->add_option("--designs", sim.designs, "Comma-separated designs")->capture_default_str();
  si->add_option("--sizes", sim.sizes, "Comma-separated sample sizes")->capture_default_str();
  si->add_option("--reps", sim.reps, "Replications per cell")->capture_default_str();
  si->add_option("--metrics", sim.metrics, "Comma-separated metrics or 'all'")->capture_default_str();
  si->add_option("--seed", sim.seed, "Random seed (drawn and printed when absent)");
  si->add_option("--beta", sim.beta, "F-score beta")->capture_default_str()->check(CLI::PositiveNumber);
  si->add_option("--threads", sim.threads, "Worker threads (default: all cores)");
  si->add_option("--checkpoint", sim.checkpoint, "Checkpoint file for resuming");
  si->add_option("--out", sim.out, "Report JSON")->capture_default_str();
  si->add_option("--csv", sim.csv, "Also write a tidy CSV report");
  si->add_flag("--pretty", sim.pretty, "Print a table of the results");

  QcOptionsCli qc;
  auto* q = app.add_subcommand("qc", "Quality control of labels");
  q->add_option("--labels", qc.labels, "Imported labels, JSON lines {seed_record, removed, added}");
  q->add_option("--prediction", qc.prediction, "Predicted membership CSV");
  q->add_option("--attributes", qc.attributes, "Attribute CSV for the soft checks");
  q->add_option("--journal", qc.journal, "Journal directory of a labeling session");
  q->add_option("--session", qc.session, "Labeling session id");
  q->add_flag("--no-token-rule", qc.no_token_rule, "Disable the shared-token soft check");
  q->add_option("--out", qc.out, "Output file (default stdout)");
  q->add_flag("--pretty", qc.pretty, "Human-readable table");

  ServeOptions srv;
  auto* sv = app.add_subcommand("serve", "Run the HTTP API (bearer token from EREVAL_API_TOKEN)");
  sv->add_option("--prediction", srv.prediction, "Predicted membership CSV")->required();
  sv->add_option("--attributes", srv.attributes, "Attribute CSV (search, QC, record details)");
  sv->add_option("--truth", srv.truth, "Known truth membership CSV");
  sv->add_option("--match-probabilities", srv.match_probabilities, "record_a,record_b,p CSV for expected_error");
  sv->add_option("--journal", srv.journal, "Journal directory")->capture_default_str();
  sv->add_option("--static", srv.static_dir, "UI assets to serve at /");
  sv->add_option("--host", srv.host, "Bind address")->capture_default_str();
  sv->add_option("--port", srv.port, "Port")->capture_default_str();
  sv->add_option("--lease-seconds", srv.lease_seconds, "Task lease duration")->capture_default_str();

  AuditOptions audit;
  auto* a = app.add_subcommand("audit-report", "Weighted frequencies of audit tags");
  a->add_option("--tags", audit.tags, "Audit tag CSV (cluster_id,direction,label,note,p_c)");
  a->add_option("--journal", audit.journal, "Journal directory of a labeling session");
  a->add_option("--session", audit.session, "Labeling session id");
  a->add_option("--out", audit.out, "Output file (default stdout)");
  a->add_flag("--pretty", audit.pretty, "Human-readable table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForVersion& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 1;
  }

  try {
    if (*s) run_stats(stats);
    else if (*e) run_estimate(est);
    else if (*sa) run_sample(smp);
    else if (*si) run_simulate(sim);
    else if (*q) run_qc(qc);
    else if (*sv) run_serve(srv);
    else if (*a) run_audit(audit);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return exit_code(f.status);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
