#include "ereval/sampling.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "ereval/csv.hpp"
#include "ereval/error.hpp"

namespace ereval {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng Rng::for_stream(std::uint64_t master, std::uint64_t index) { return Rng(splitmix64(master ^ index)); }

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) fail(ErrorKind::kInvalidInput, "Rng::below: zero bound");
  unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(engine_()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::string to_string(Design design) {
  switch (design) {
    case Design::kPpsRecord: return "pps_record";
    case Design::kUniformCluster: return "uniform_cluster";
    case Design::kExpectedError: return "expected_error";
    case Design::kExternal: return "external";
  }
  return "external";
}

Design parse_design(const std::string& name) {
  if (name == "pps_record" || name == "pps" || name == "cluster_size") return Design::kPpsRecord;
  if (name == "uniform_cluster" || name == "uniform") return Design::kUniformCluster;
  if (name == "expected_error") return Design::kExpectedError;
  if (name == "external" || name == "file") return Design::kExternal;
  fail(ErrorKind::kInvalidInput, "unknown design: " + name);
}

namespace {

void require_sampleable(const Clustering& truth, std::size_t k) {
  if (truth.empty()) fail(ErrorKind::kInvalidInput, "cannot sample from an empty clustering");
  if (k < 1) fail(ErrorKind::kInvalidInput, "sample size must be at least 1");
}

Draw make_draw(const Clustering& truth, ClusterIndex c, double p_c, std::optional<std::string> seed) {
  return Draw{truth.cluster_id(c), truth.member_ids(c), p_c, std::move(seed)};
}

}  // namespace

ClusterSample sample_pps(const Clustering& truth, std::size_t k, std::uint64_t rng_seed) {
  require_sampleable(truth, k);
  Rng rng(rng_seed);
  ClusterSample out{{}, Design::kPpsRecord, rng_seed};
  out.draws.reserve(k);
  const double n = static_cast<double>(truth.universe_size());
  for (std::size_t i = 0; i < k; ++i) {
    const auto r = static_cast<RecordIndex>(rng.below(truth.universe_size()));
    const ClusterIndex c = truth.cluster_of(r);
    out.draws.push_back(make_draw(truth, c, static_cast<double>(truth.cluster_size(c)) / n, truth.record_id(r)));
  }
  return out;
}

ClusterSample sample_uniform(const Clustering& truth, std::size_t k, std::uint64_t rng_seed) {
  require_sampleable(truth, k);
  Rng rng(rng_seed);
  ClusterSample out{{}, Design::kUniformCluster, rng_seed};
  out.draws.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto c = static_cast<ClusterIndex>(rng.below(truth.num_clusters()));
    out.draws.push_back(make_draw(truth, c, 1.0, std::nullopt));
  }
  return out;
}

ClusterSample sample_weighted(const Clustering& truth, const std::unordered_map<std::string, double>& weights,
                              std::size_t k, std::uint64_t rng_seed) {
  require_sampleable(truth, k);
  std::vector<double> cumulative(truth.universe_size());
  std::vector<double> record_weight(truth.universe_size());
  double total = 0.0;
  for (RecordIndex r = 0; r < truth.universe_size(); ++r) {
    auto it = weights.find(truth.record_id(r));
    const double w = it == weights.end() ? 0.0 : it->second;
    if (!(w >= 0.0)) fail(ErrorKind::kInvalidInput, "negative sampling weight for " + truth.record_id(r));
    record_weight[r] = w;
    total += w;
    cumulative[r] = total;
  }
  if (!(total > 0.0)) fail(ErrorKind::kInvalidInput, "sampling weights sum to zero");

  std::vector<double> cluster_weight(truth.num_clusters(), 0.0);
  for (ClusterIndex c = 0; c < truth.num_clusters(); ++c)
    for (RecordIndex r : truth.members(c)) cluster_weight[c] += record_weight[r];

  Rng rng(rng_seed);
  ClusterSample out{{}, Design::kExpectedError, rng_seed};
  out.draws.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double u = rng.unit() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    auto r = static_cast<RecordIndex>(it - cumulative.begin());
    const ClusterIndex c = truth.cluster_of(r);
    out.draws.push_back(make_draw(truth, c, cluster_weight[c] / total, truth.record_id(r)));
  }
  return out;
}

ClusterSample census(const Clustering& truth, Design design) {
  ClusterSample out{{}, design, 0};
  out.draws.reserve(truth.num_clusters());
  const double n = static_cast<double>(truth.universe_size());
  for (ClusterIndex c = 0; c < truth.num_clusters(); ++c) {
    double p = 1.0;
    if (design == Design::kPpsRecord) p = static_cast<double>(truth.cluster_size(c)) / n;
    else if (design != Design::kUniformCluster)
      fail(ErrorKind::kInvalidInput, "census weights are defined for pps_record and uniform_cluster only");
    out.draws.push_back(make_draw(truth, c, p, std::nullopt));
  }
  return out;
}

std::unordered_map<std::string, double> expected_error_weights(const Clustering& prediction,
                                                               const std::vector<MatchProbability>& probs) {
  const std::size_t n = prediction.universe_size();
  // E|A_r| starts at |ĉ(r)| - 1 (every co-member contributes 1 - p with p = 0
  // until a probability says otherwise); E|B_r| starts at 0.
  std::vector<double> overcluster(n), undercluster(n, 0.0);
  for (RecordIndex r = 0; r < n; ++r)
    overcluster[r] = static_cast<double>(prediction.cluster_size(prediction.cluster_of(r)) - 1);

  std::unordered_set<std::uint64_t> seen;
  for (const auto& mp : probs) {
    if (!(mp.p >= 0.0 && mp.p <= 1.0))
      fail(ErrorKind::kInvalidInput, "match probability outside [0,1] for pair " + mp.a + "," + mp.b);
    const RecordIndex a = prediction.record_index(mp.a);
    const RecordIndex b = prediction.record_index(mp.b);
    if (a == b) continue;
    const std::uint64_t key = (std::uint64_t{std::min(a, b)} << 32) | std::max(a, b);
    if (!seen.insert(key).second) continue;  // first occurrence of an unordered pair wins
    if (prediction.cluster_of(a) == prediction.cluster_of(b)) {
      overcluster[a] -= mp.p;
      overcluster[b] -= mp.p;
    } else {
      undercluster[a] += mp.p;
      undercluster[b] += mp.p;
    }
  }
  std::unordered_map<std::string, double> out;
  out.reserve(n);
  for (RecordIndex r = 0; r < n; ++r) out.emplace(prediction.record_id(r), overcluster[r] + undercluster[r]);
  return out;
}

std::vector<MatchProbability> load_match_probabilities(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields) || fields.size() != 3)
    fail(ErrorKind::kInvalidInput, "match probability header must be `record_a,record_b,p`");
  std::vector<MatchProbability> out;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != 3)
      fail(ErrorKind::kInvalidInput, "match probability line " + std::to_string(reader.line()) + ": expected 3 fields");
    double p = 0.0;
    try {
      p = std::stod(fields[2]);
    } catch (const std::exception&) {
      fail(ErrorKind::kInvalidInput, "bad probability on line " + std::to_string(reader.line()));
    }
    out.push_back({fields[0], fields[1], p});
  }
  return out;
}

}  // namespace ereval
