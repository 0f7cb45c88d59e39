#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "ereval/core_model.hpp"

namespace ereval {

// Portable, seedable generator. mt19937_64 output is fully specified by the
// standard; bounded integers and unit reals are derived here rather than via
// <random> distributions, whose algorithms differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Stream for replication `index` of a study seeded with `master`:
  // splitmix64(master ^ index) seeds an independent engine.
  static Rng for_stream(std::uint64_t master, std::uint64_t index);

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, bound), unbiased (Lemire's multiply-and-reject).
  std::uint64_t below(std::uint64_t bound);
  // Uniform on [0, 1) with 53 random bits.
  double unit();
  bool bernoulli(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

enum class Design { kPpsRecord, kUniformCluster, kExpectedError, kExternal };

std::string to_string(Design design);
Design parse_design(const std::string& name);

struct Draw {
  std::string cluster_id;
  std::vector<std::string> members;
  double p_c = 0.0;
  std::optional<std::string> seed_record;
};

// Ordered with-replacement draws of ground-truth clusters.
struct ClusterSample {
  std::vector<Draw> draws;
  Design design = Design::kExternal;
  std::uint64_t rng_seed = 0;

  std::size_t size() const { return draws.size(); }
};

// k uniform record draws mapped to their clusters; p_c = |c| / N.
ClusterSample sample_pps(const Clustering& truth, std::size_t k, std::uint64_t rng_seed);
// k uniform cluster draws; p_c = 1.
ClusterSample sample_uniform(const Clustering& truth, std::size_t k, std::uint64_t rng_seed);
// k record draws with probability proportional to `weights` (records absent
// from the map weigh 0); p_c = sum of member weights / total weight.
ClusterSample sample_weighted(const Clustering& truth, const std::unordered_map<std::string, double>& weights,
                              std::size_t k, std::uint64_t rng_seed);

// Whole-clustering census: every cluster exactly once with the given weights.
ClusterSample census(const Clustering& truth, Design design);

struct MatchProbability {
  std::string a;
  std::string b;
  double p;
};

// Per-record E|A_r| + E|B_r| under pairwise match probabilities. Pairs
// missing from `probs` have p = 0.
std::unordered_map<std::string, double> expected_error_weights(const Clustering& prediction,
                                                               const std::vector<MatchProbability>& probs);

// Reads `record_a,record_b,p` CSV.
std::vector<MatchProbability> load_match_probabilities(const std::string& path);

}  // namespace ereval
