#include "ereval/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <array>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "json.hpp"

#include "ereval/csv.hpp"
#include "ereval/error.hpp"

namespace ereval {
namespace {

using json = nlohmann::ordered_json;

class ZipfPool {
 public:
  ZipfPool(std::vector<std::string> names, double exponent) : names_(std::move(names)) {
    double total = 0.0;
    for (std::size_t i = 0; i < names_.size(); ++i) {
      total += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
      cumulative_.push_back(total);
    }
  }

  const std::string& draw(Rng& rng) const {
    const double u = rng.unit() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return names_[static_cast<std::size_t>(it - cumulative_.begin())];
  }

 private:
  std::vector<std::string> names_;
  std::vector<double> cumulative_;
};

std::vector<std::string> make_name_pool(std::size_t size, Rng& rng) {
  static const std::vector<std::string> kSyllables{
      "an", "ber", "cla", "da", "el", "fre", "ga", "hen", "in", "jo", "ka", "lin", "ma", "nor", "o",  "pe",
      "ri", "sa", "to", "ul", "ve", "wil", "xa", "yo", "ze", "mar", "lo", "chri", "ste", "fan", "ru", "dol"};
  std::set<std::string> seen;
  std::vector<std::string> out;
  while (out.size() < size) {
    const std::size_t parts = 2 + rng.below(2);
    std::string name;
    for (std::size_t i = 0; i < parts; ++i) name += kSyllables[rng.below(kSyllables.size())];
    name[0] = static_cast<char>(name[0] - 'a' + 'A');
    if (seen.insert(name).second) out.push_back(name);
  }
  return out;
}

std::string typo(const std::string& s, Rng& rng) {
  static const std::string kLetters = "abcdefghijklmnopqrstuvwxyz";
  for (;;) {
    std::string out = s;
    const std::size_t op = rng.below(4);
    const std::size_t pos = rng.below(out.size());
    switch (op) {
      case 0: out[pos] = kLetters[rng.below(kLetters.size())]; break;
      case 1:
        if (out.size() > 2) out.erase(pos, 1);
        break;
      case 2: out.insert(pos, 1, kLetters[rng.below(kLetters.size())]); break;
      case 3:
        if (pos + 1 < out.size()) std::swap(out[pos], out[pos + 1]);
        break;
    }
    if (out != s) return out;
  }
}

int other_value(int value, int lo, int hi, Rng& rng) {
  for (;;) {
    const int v = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
    if (v != value) return v;
  }
}

struct Person {
  std::string first, last;
  int year, month, day;
};

std::string pad_id(char prefix, std::size_t i, std::size_t width) {
  std::ostringstream os;
  os << prefix << std::setw(static_cast<int>(width)) << std::setfill('0') << i;
  return os.str();
}

void validate_rate(double r, const char* name) {
  if (!(r >= 0.0 && r <= 1.0)) fail(ErrorKind::kInvalidInput, std::string("corruption rate out of [0,1]: ") + name);
}

// Disjoint-set forest over record indices.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent_[b] = a;
    else parent_[a] = b;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

Population generate_rldata_like(const PopulationConfig& config) {
  const auto& c = config.corruption;
  validate_rate(c.first_name, "first_name");
  validate_rate(c.last_name, "last_name");
  validate_rate(c.birth_year, "birth_year");
  validate_rate(c.birth_month, "birth_month");
  validate_rate(c.birth_day, "birth_day");
  if (config.first_name_pool == 0 || config.last_name_pool == 0)
    fail(ErrorKind::kInvalidInput, "name pools must be non-empty");
  if (config.birth_year_max < config.birth_year_min) fail(ErrorKind::kInvalidInput, "empty birth year range");
  if (config.n_pairs + config.n_singletons == 0) fail(ErrorKind::kInvalidInput, "empty population");

  Rng rng(config.seed);
  const ZipfPool first_names(make_name_pool(config.first_name_pool, rng), config.name_zipf_exponent);
  const ZipfPool last_names(make_name_pool(config.last_name_pool, rng), config.name_zipf_exponent);

  auto person = [&]() {
    return Person{first_names.draw(rng), last_names.draw(rng),
                  config.birth_year_min + static_cast<int>(rng.below(
                                              static_cast<std::uint64_t>(config.birth_year_max - config.birth_year_min + 1))),
                  1 + static_cast<int>(rng.below(12)), 1 + static_cast<int>(rng.below(28))};
  };
  auto corrupt = [&](Person p) {
    if (rng.bernoulli(c.first_name)) p.first = typo(p.first, rng);
    if (rng.bernoulli(c.last_name)) p.last = typo(p.last, rng);
    if (rng.bernoulli(c.birth_year)) {
      const int shift = 1 + static_cast<int>(rng.below(5));
      p.year += rng.bernoulli(0.5) ? shift : -shift;
    }
    if (rng.bernoulli(c.birth_month)) p.month = other_value(p.month, 1, 12, rng);
    if (rng.bernoulli(c.birth_day)) p.day = other_value(p.day, 1, 28, rng);
    return p;
  };

  const std::size_t n_entities = config.n_pairs + config.n_singletons;
  const std::size_t n_records = 2 * config.n_pairs + config.n_singletons;
  const std::size_t width = std::to_string(n_records).size();
  const std::size_t entity_width = std::to_string(n_entities).size();

  std::vector<std::pair<std::string, std::string>> membership;
  AttributeTable attrs(kPersonFields);
  std::size_t next_record = 0;
  auto emit = [&](const Person& p, const std::string& entity) {
    const std::string id = pad_id('r', next_record++, width);
    membership.emplace_back(id, entity);
    attrs.add(id, p.first + " " + p.last,
              {p.first, p.last, std::to_string(p.year), std::to_string(p.month), std::to_string(p.day)});
  };
  for (std::size_t e = 0; e < n_entities; ++e) {
    const std::string entity = pad_id('e', e, entity_width);
    const Person p = person();
    emit(p, entity);
    if (e < config.n_pairs) emit(corrupt(p), entity);
  }
  return {Clustering::from_pairs(membership), std::move(attrs)};
}

Population load_rldata(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);
  csv::Reader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) fail(ErrorKind::kInvalidInput, "empty RLdata file");

  auto column = [&](std::initializer_list<const char*> names) -> std::optional<std::size_t> {
    for (const char* n : names)
      for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == n) return i;
    return std::nullopt;
  };
  const auto first = column({"first_name", "fname_c1"});
  const auto last = column({"last_name", "lname_c1"});
  const auto year = column({"birth_year", "by"});
  const auto month = column({"birth_month", "bm"});
  const auto day = column({"birth_day", "bd"});
  const auto entity = column({"ent_id", "identity", "cluster_id"});
  const auto record = column({"record_id", "rec_id"});
  if (!first || !last || !year || !month || !day)
    fail(ErrorKind::kInvalidInput, "RLdata file lacks one of the five person fields");
  if (!entity) fail(ErrorKind::kInvalidInput, "RLdata file lacks an entity id column (ent_id/identity/cluster_id)");

  std::vector<std::pair<std::string, std::string>> membership;
  AttributeTable attrs(kPersonFields);
  std::vector<std::string> fields;
  std::size_t row = 0;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != header.size())
      fail(ErrorKind::kInvalidInput, "RLdata line " + std::to_string(reader.line()) + ": wrong field count");
    auto clean = [](std::string v) { return v == "NA" ? std::string() : v; };
    const std::string id = record ? fields[*record] : "r" + std::to_string(++row);
    membership.emplace_back(id, fields[*entity]);
    attrs.add(id, clean(fields[*first]) + " " + clean(fields[*last]),
              {clean(fields[*first]), clean(fields[*last]), clean(fields[*year]), clean(fields[*month]),
               clean(fields[*day])});
  }
  if (membership.empty()) fail(ErrorKind::kInvalidInput, "empty RLdata file");
  return {Clustering::from_pairs(membership), std::move(attrs)};
}

Clustering all_but_one_match(const AttributeTable& attrs, bool exact) {
  const auto& records = attrs.records();
  const std::size_t n = records.size();
  if (exact && n > 20000) fail(ErrorKind::kInvalidInput, "exact matching is limited to 20000 records");
  for (const auto& f : kPersonFields)
    if (std::find(attrs.attribute_names().begin(), attrs.attribute_names().end(), f) == attrs.attribute_names().end())
      fail(ErrorKind::kInvalidInput, "attribute table lacks field " + f);

  std::vector<std::array<std::string, 5>> values(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < 5; ++f) values[i][f] = attrs.attribute(records[i], kPersonFields[f]);

  auto agree = [&](std::size_t a, std::size_t b) {
    int same = 0;
    for (std::size_t f = 0; f < 5; ++f)
      if (!values[a][f].empty() && values[a][f] == values[b][f]) ++same;
    return same >= 4;
  };

  UnionFind uf(n);
  auto link_block = [&](const std::vector<std::size_t>& block) {
    for (std::size_t i = 0; i < block.size(); ++i)
      for (std::size_t j = i + 1; j < block.size(); ++j)
        if (agree(block[i], block[j])) uf.unite(block[i], block[j]);
  };

  if (exact) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    link_block(all);
  } else {
    std::map<std::string, std::vector<std::size_t>> by_initial, by_year;
    for (std::size_t i = 0; i < n; ++i) {
      if (!values[i][0].empty()) by_initial[values[i][0].substr(0, 1)].push_back(i);
      if (!values[i][2].empty()) by_year[values[i][2]].push_back(i);
    }
    for (const auto& [key, block] : by_initial) link_block(block);
    for (const auto& [key, block] : by_year) link_block(block);
  }

  std::vector<std::pair<std::string, std::string>> membership;
  membership.reserve(n);
  for (std::size_t i = 0; i < n; ++i) membership.emplace_back(records[i], "p-" + records[uf.find(i)]);
  return Clustering::from_pairs(membership);
}

const SimCell& SimReport::cell(Metric metric, Design design, std::size_t k) const {
  for (const auto& c : cells)
    if (c.metric == metric && c.design == design && c.k == k) return c;
  fail(ErrorKind::kNotFound, "no simulation cell for " + to_string(metric) + "/" + to_string(design) + "/" +
                                 std::to_string(k));
}

std::uint64_t replication_seed(std::uint64_t master, Design design, std::size_t k, std::size_t rep) {
  const std::uint64_t cell = splitmix64((static_cast<std::uint64_t>(design) << 32) | k);
  return splitmix64((master ^ cell) ^ static_cast<std::uint64_t>(rep));
}

namespace {

struct RepResult {
  double point = 0.0;
  double std = 0.0;
  bool ok = false;
};

// Results for one (design, k) cell: reps × metrics, row-major by rep.
struct CellResults {
  Design design;
  std::size_t k;
  std::vector<RepResult> values;
  std::vector<char> done;
};

std::string config_fingerprint(const SimConfig& config, const Clustering& truth, const Clustering& prediction) {
  json j;
  j["seed"] = config.seed;
  j["reps"] = config.reps;
  j["beta"] = config.beta;
  j["N"] = truth.universe_size();
  j["true_clusters"] = truth.num_clusters();
  j["predicted_clusters"] = prediction.num_clusters();
  json metrics = json::array();
  for (Metric m : config.metrics) metrics.push_back(to_string(m));
  j["metrics"] = metrics;
  return j.dump();
}

}  // namespace

SimReport run_simulation(const Clustering& truth, const Clustering& prediction, const SimConfig& config) {
  if (config.reps == 0) fail(ErrorKind::kInvalidInput, "reps must be positive");
  if (config.sizes.empty() || config.designs.empty() || config.metrics.empty())
    fail(ErrorKind::kInvalidInput, "simulation needs at least one design, size and metric");
  for (Design d : config.designs)
    if (d != Design::kPpsRecord && d != Design::kUniformCluster)
      fail(ErrorKind::kInvalidInput, "simulation supports the pps_record and uniform_cluster designs");
  for (std::size_t k : config.sizes)
    if (k < 1) fail(ErrorKind::kInvalidInput, "sample sizes must be positive");

  const OracleMetrics oracle = oracle_metrics(truth, prediction, config.beta);
  const ErrorTable population = census_error_table(truth, prediction, Design::kUniformCluster);
  const double n = static_cast<double>(truth.universe_size());

  EstimateOptions options;
  options.beta = config.beta;
  options.globals = PredictionGlobals{prediction.universe_size(), prediction.num_clusters()};
  std::vector<RatioTarget> targets;
  for (Metric m : config.metrics) targets.push_back(make_target(m, options));

  const std::size_t n_metrics = config.metrics.size();
  std::vector<CellResults> cells;
  for (Design d : config.designs)
    for (std::size_t k : config.sizes)
      cells.push_back({d, k, std::vector<RepResult>(config.reps * n_metrics), std::vector<char>(config.reps, 0)});

  // Resume from checkpoint.
  const std::string fingerprint = config_fingerprint(config, truth, prediction);
  if (!config.checkpoint_path.empty()) {
    std::ifstream in(config.checkpoint_path);
    std::string line;
    if (in && std::getline(in, line)) {
      if (json::parse(line).value("fingerprint", "") != fingerprint)
        fail(ErrorKind::kInvalidInput, "checkpoint " + config.checkpoint_path + " belongs to a different study");
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j;
        try {
          j = json::parse(line);
        } catch (const json::exception&) {
          break;  // torn final line from an interrupted write
        }
        const Design d = parse_design(j.at("design").get<std::string>());
        const std::size_t k = j.at("k").get<std::size_t>();
        const std::size_t rep = j.at("rep").get<std::size_t>();
        for (auto& cell : cells) {
          if (cell.design != d || cell.k != k || rep >= config.reps) continue;
          const auto& results = j.at("results");
          if (results.size() != n_metrics) fail(ErrorKind::kInvalidInput, "checkpoint metric count mismatch");
          for (std::size_t m = 0; m < n_metrics; ++m) {
            const auto& r = results[m];
            RepResult& out = cell.values[rep * n_metrics + m];
            out.ok = r.at("ok").get<bool>();
            out.point = r.at("point").is_null() ? 0.0 : r.at("point").get<double>();
            out.std = r.at("std").is_null() ? 0.0 : r.at("std").get<double>();
          }
          cell.done[rep] = 1;
        }
      }
    }
  }
  std::ofstream checkpoint;
  if (!config.checkpoint_path.empty()) {
    const bool fresh = !std::ifstream(config.checkpoint_path).good() ||
                       std::ifstream(config.checkpoint_path).peek() == std::ifstream::traits_type::eof();
    checkpoint.open(config.checkpoint_path, std::ios::app);
    if (!checkpoint) fail(ErrorKind::kIo, "cannot write checkpoint " + config.checkpoint_path);
    if (fresh) checkpoint << json{{"fingerprint", fingerprint}}.dump() << "\n" << std::flush;
  }

  auto run_rep = [&](CellResults& cell, std::size_t rep) {
    Rng rng(replication_seed(config.seed, cell.design, cell.k, rep));
    ErrorTable rows;
    rows.reserve(cell.k);
    for (std::size_t i = 0; i < cell.k; ++i) {
      ClusterIndex c;
      double p;
      if (cell.design == Design::kPpsRecord) {
        c = truth.cluster_of(static_cast<RecordIndex>(rng.below(truth.universe_size())));
        p = static_cast<double>(truth.cluster_size(c)) / n;
      } else {
        c = static_cast<ClusterIndex>(rng.below(truth.num_clusters()));
        p = 1.0;
      }
      rows.push_back(population[c]);
      rows.back().p_c = p;
    }
    for (std::size_t m = 0; m < n_metrics; ++m) {
      RepResult& out = cell.values[rep * n_metrics + m];
      try {
        const Estimate e = ratio_estimate(rows, targets[m]);
        out = {e.point, e.std, std::isfinite(e.point) && std::isfinite(e.std)};
      } catch (const Error&) {
        out = {0.0, 0.0, false};
      }
    }
    cell.done[rep] = 1;
  };

  const unsigned threads = std::max(1u, config.threads);
  constexpr std::size_t kBatch = 100;
  for (auto& cell : cells) {
    for (std::size_t start = 0; start < config.reps; start += kBatch) {
      const std::size_t end = std::min(config.reps, start + kBatch);
      std::vector<std::size_t> todo;
      for (std::size_t rep = start; rep < end; ++rep)
        if (!cell.done[rep]) todo.push_back(rep);
      if (todo.empty()) continue;
      if (threads == 1 || todo.size() < 2) {
        for (std::size_t rep : todo) run_rep(cell, rep);
      } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
          pool.emplace_back([&, t] {
            for (std::size_t i = t; i < todo.size(); i += threads) run_rep(cell, todo[i]);
          });
        for (auto& th : pool) th.join();
      }
      if (checkpoint.is_open()) {
        for (std::size_t rep : todo) {
          json line;
          line["design"] = to_string(cell.design);
          line["k"] = cell.k;
          line["rep"] = rep;
          json results = json::array();
          for (std::size_t m = 0; m < n_metrics; ++m) {
            const RepResult& r = cell.values[rep * n_metrics + m];
            results.push_back({{"ok", r.ok}, {"point", r.point}, {"std", r.std}});
          }
          line["results"] = results;
          checkpoint << line.dump() << "\n";
        }
        checkpoint.flush();
      }
    }
  }

  SimReport report;
  report.reps = config.reps;
  report.seed = config.seed;
  report.universe_size = truth.universe_size();
  report.true_clusters = truth.num_clusters();
  report.predicted_clusters = prediction.num_clusters();
  for (const auto& cell : cells) {
    for (std::size_t m = 0; m < n_metrics; ++m) {
      SimCell out;
      out.metric = config.metrics[m];
      out.design = cell.design;
      out.k = cell.k;
      out.truth = oracle.get(config.metrics[m]);
      out.reps = config.reps;
      double err_sum = 0.0, sq_sum = 0.0, std_sum = 0.0;
      std::size_t ok = 0, covered = 0;
      for (std::size_t rep = 0; rep < config.reps; ++rep) {
        const RepResult& r = cell.values[rep * n_metrics + m];
        if (!r.ok) continue;
        ++ok;
        const double err = r.point - out.truth;
        err_sum += err;
        sq_sum += err * err;
        std_sum += r.std;
        if (std::abs(err) <= 2.0 * r.std) ++covered;
      }
      out.failures = config.reps - ok;
      const double okd = static_cast<double>(ok);
      out.bias = ok ? err_sum / okd : std::nan("");
      out.rmse = ok ? std::sqrt(sq_sum / okd) : std::nan("");
      out.mean_std = ok ? std_sum / okd : std::nan("");
      out.coverage_2 = static_cast<double>(covered) / static_cast<double>(config.reps);
      report.cells.push_back(out);
    }
  }
  return report;
}

std::string sim_report_json(const SimReport& report) {
  json doc;
  doc["v"] = 1;
  doc["seed"] = report.seed;
  doc["reps"] = report.reps;
  doc["universe_size"] = report.universe_size;
  doc["true_clusters"] = report.true_clusters;
  doc["predicted_clusters"] = report.predicted_clusters;
  json cells = json::array();
  for (const auto& c : report.cells) {
    json j;
    j["metric"] = to_string(c.metric);
    j["design"] = to_string(c.design);
    j["k"] = c.k;
    j["truth"] = c.truth;
    j["bias"] = c.bias;
    j["rmse"] = c.rmse;
    j["coverage_2"] = c.coverage_2;
    j["mean_std"] = c.mean_std;
    j["reps"] = c.reps;
    j["failures"] = c.failures;
    cells.push_back(std::move(j));
  }
  doc["cells"] = std::move(cells);
  return doc.dump(2) + "\n";
}

std::string sim_report_csv(const SimReport& report) {
  std::ostringstream out;
  out << std::setprecision(17);
  csv::write_row(out, {"metric", "design", "k", "truth", "bias", "rmse", "coverage_2", "mean_std", "reps", "failures"});
  auto num = [](double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
  };
  for (const auto& c : report.cells)
    csv::write_row(out, {to_string(c.metric), to_string(c.design), std::to_string(c.k), num(c.truth), num(c.bias),
                         num(c.rmse), num(c.coverage_2), num(c.mean_std), std::to_string(c.reps),
                         std::to_string(c.failures)});
  return out.str();
}

}  // namespace ereval
