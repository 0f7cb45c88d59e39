#include <map>

#include "doctest.h"
#include "ereval/error.hpp"
#include "ereval/sampling.hpp"
#include "fixtures.hpp"

using namespace ereval;
using doctest::Approx;

namespace {

// Pearson statistic of observed cluster frequencies against expected p_c.
double chi_square(const ClusterSample& s, const std::map<std::string, double>& expected) {
  std::map<std::string, double> observed;
  for (const auto& d : s.draws) observed[d.cluster_id] += 1;
  const double k = static_cast<double>(s.size());
  double stat = 0;
  for (const auto& [id, p] : expected) {
    const double e = k * p;
    const double o = observed[id];
    stat += (o - e) * (o - e) / e;
  }
  return stat;
}

Clustering staircase() {
  std::vector<std::vector<std::string>> clusters;
  int next = 0;
  for (int size = 1; size <= 10; ++size) {
    std::vector<std::string> c;
    for (int i = 0; i < size; ++i) c.push_back("r" + std::to_string(next++));
    clusters.push_back(c);
  }
  return Clustering::from_clusters(clusters);
}

}  // namespace

TEST_CASE("Rng is deterministic and bounded") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng c(1);
  for (int i = 0; i < 1000; ++i) {
    CHECK(c.below(7) < 7);
    const double u = c.unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(Rng::for_stream(5, 1).next() != Rng::for_stream(5, 2).next());
  CHECK(Rng::for_stream(5, 1).next() == Rng::for_stream(5, 1).next());
}

TEST_CASE("single-cluster truth always yields that cluster") {
  const auto one = Clustering::from_clusters({{"a", "b", "c"}});
  const auto s = sample_pps(one, 25, 9);
  CHECK(s.size() == 25);
  for (const auto& d : s.draws) {
    CHECK(d.p_c == 1.0);
    CHECK(d.members.size() == 3);
  }
}

TEST_CASE("pps frequency of the large cluster tends to 3/5") {
  const auto s = sample_pps(fixtures::canonical_truth(), 100000, 11);
  double hits = 0;
  for (const auto& d : s.draws) hits += d.cluster_id == "t1";
  CHECK(hits / 100000.0 == Approx(0.6).epsilon(0.01 / 0.6));
  CHECK(s.draws[0].seed_record.has_value());
}

TEST_CASE("designs pass a chi-square goodness-of-fit test") {
  const auto truth = staircase();
  std::map<std::string, double> pps, uniform;
  for (ClusterIndex c = 0; c < truth.num_clusters(); ++c) {
    pps[truth.cluster_id(c)] = static_cast<double>(truth.cluster_size(c)) / static_cast<double>(truth.universe_size());
    uniform[truth.cluster_id(c)] = 1.0 / static_cast<double>(truth.num_clusters());
  }
  // Critical value of chi-square with 9 degrees of freedom at 1e-3.
  constexpr double kCritical = 27.877;
  CHECK(chi_square(sample_pps(truth, 100000, 1), pps) < kCritical);
  CHECK(chi_square(sample_uniform(truth, 100000, 2), uniform) < kCritical);
  std::unordered_map<std::string, double> w;
  for (RecordIndex r = 0; r < truth.universe_size(); ++r) w[truth.record_id(r)] = r % 2 ? 1.0 : 3.0;
  const auto weighted = sample_weighted(truth, w, 100000, 3);
  std::map<std::string, double> expected;
  for (const auto& d : weighted.draws) expected[d.cluster_id] = d.p_c;
  double total = 0;
  for (const auto& [id, p] : expected) total += p;
  CHECK(total == Approx(1.0));
  CHECK(chi_square(weighted, expected) < kCritical);
}

TEST_CASE("samples are reproducible from the seed") {
  const auto truth = staircase();
  const auto a = sample_pps(truth, 500, 77);
  const auto b = sample_pps(truth, 500, 77);
  const auto c = sample_pps(truth, 500, 78);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.draws[i].cluster_id == b.draws[i].cluster_id);
    differs |= a.draws[i].cluster_id != c.draws[i].cluster_id;
  }
  CHECK(differs);
  for (const auto& d : sample_uniform(truth, 10, 1).draws) CHECK(d.p_c == 1.0);
  CHECK_THROWS_AS(sample_pps(Clustering{}, 3, 1), Error);
  CHECK_THROWS_AS(sample_pps(truth, 0, 1), Error);
}

TEST_CASE("expected error weights") {
  const auto pred = Clustering::from_clusters({{"a", "b", "c"}, {"d"}, {"e"}});
  const auto w = expected_error_weights(pred, {{"a", "b", 0.9}, {"a", "c", 0.2}, {"d", "e", 0.4}});
  CHECK(w.at("a") == Approx(0.9));
  CHECK(w.at("d") == Approx(0.4));
  CHECK(w.at("e") == Approx(0.4));
  const auto confident = expected_error_weights(Clustering::from_clusters({{"a", "b"}, {"c"}}), {{"a", "b", 1.0}});
  for (const auto& [r, x] : confident) CHECK(x == 0.0);
  CHECK_THROWS_AS(expected_error_weights(pred, {{"a", "b", 1.5}}), Error);
}

TEST_CASE("census covers every cluster once") {
  const auto s = census(fixtures::canonical_truth(), Design::kPpsRecord);
  REQUIRE(s.size() == 2);
  CHECK(s.draws[0].p_c == Approx(0.6));
  CHECK(s.draws[1].p_c == Approx(0.4));
  CHECK(census(fixtures::canonical_truth(), Design::kUniformCluster).draws[1].p_c == 1.0);
}
