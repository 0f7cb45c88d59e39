#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ereval/core_model.hpp"
#include "ereval/estimators.hpp"
#include "ereval/sampling.hpp"

namespace ereval {

// The five person fields compared by the all-but-one matcher.
inline const std::vector<std::string> kPersonFields{"first_name", "last_name", "birth_year", "birth_month",
                                                    "birth_day"};

// Probability that a duplicate record's field differs from the original.
struct CorruptionRates {
  double first_name = 0.1;
  double last_name = 0.1;
  double birth_year = 0.1;
  double birth_month = 0.1;
  double birth_day = 0.1;

  static CorruptionRates uniform(double rate) { return {rate, rate, rate, rate, rate}; }
};

struct PopulationConfig {
  std::size_t n_pairs = 1000;
  std::size_t n_singletons = 8000;
  CorruptionRates corruption;
  // Names are drawn from finite Zipf-weighted pools, which creates homonyms.
  std::size_t first_name_pool = 2000;
  std::size_t last_name_pool = 4000;
  double name_zipf_exponent = 0.9;
  int birth_year_min = 1930;
  int birth_year_max = 2009;
  std::uint64_t seed = 1;
};

struct Population {
  Clustering truth;
  AttributeTable attrs;
};

// Synthetic population resembling RLdata10000: `n_pairs` clusters of two
// records (the second a corrupted copy) and `n_singletons` singletons.
Population generate_rldata_like(const PopulationConfig& config);

// Loads an RLdata-style CSV. Accepts either canonical field names or the
// RecordLinkage column names (fname_c1, lname_c1, by, bm, bd); entity ids
// come from an `ent_id`, `identity` or `cluster_id` column.
Population load_rldata(const std::string& path);

// Links records agreeing on at least 4 of the 5 person fields; predicted
// clusters are connected components. Candidate pairs come from the union of
// first-initial and birth-year blocks, which misses no qualifying pair (two
// records agreeing on 4 fields share a first name or a birth year). `exact`
// compares all pairs and is limited to N <= 20000.
Clustering all_but_one_match(const AttributeTable& attrs, bool exact = false);

struct SimConfig {
  std::vector<Design> designs{Design::kPpsRecord, Design::kUniformCluster};
  std::vector<std::size_t> sizes{200, 400, 800};
  std::size_t reps = 1000;
  std::vector<Metric> metrics{Metric::kPairwisePrecision, Metric::kPairwiseRecall};
  std::uint64_t seed = 0;
  double beta = 1.0;
  unsigned threads = 1;
  // JSON-lines file of finished replications; appended every 100 reps and
  // consulted on start so an interrupted study resumes where it stopped.
  std::string checkpoint_path;
};

struct SimCell {
  Metric metric;
  Design design;
  std::size_t k = 0;
  double truth = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double coverage_2 = 0.0;  // failed reps count as non-covering
  double mean_std = 0.0;
  std::size_t reps = 0;
  std::size_t failures = 0;
};

struct SimReport {
  std::vector<SimCell> cells;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::size_t universe_size = 0;
  std::size_t true_clusters = 0;
  std::size_t predicted_clusters = 0;

  const SimCell& cell(Metric metric, Design design, std::size_t k) const;
};

// Seed for replication `rep` of cell (design, k): the master seed is mixed
// with the cell key, then the rep index is XORed in before splitmix64.
std::uint64_t replication_seed(std::uint64_t master, Design design, std::size_t k, std::size_t rep);

// Monte-Carlo study of estimator bias, RMSE and ±2·std coverage against the
// oracle metric values. Deterministic for a given seed regardless of threads.
SimReport run_simulation(const Clustering& truth, const Clustering& prediction, const SimConfig& config);

std::string sim_report_json(const SimReport& report);
// Tidy CSV: one row per metric × design × size.
std::string sim_report_csv(const SimReport& report);

}  // namespace ereval
