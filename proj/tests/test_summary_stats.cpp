#include <cmath>
#include <random>

#include "doctest.h"
#include "ereval/error.hpp"
#include "ereval/summary_stats.hpp"
#include "fixtures.hpp"
#include "json.hpp"
#include "oracle.hpp"

using namespace ereval;
using doctest::Approx;

namespace {

Clustering sizes_1_1_2() { return Clustering::from_clusters({{"a"}, {"b"}, {"c", "d"}}); }

NameIndex labels(const std::vector<std::pair<std::string, std::string>>& rows) {
  AttributeTable attrs;
  for (const auto& [r, l] : rows) attrs.add(r, l);
  return name_index(attrs);
}

}  // namespace

TEST_CASE("average cluster size and matching rate") {
  CHECK(avg_cluster_size(fixtures::canonical_truth()) == 2.5);
  CHECK(matching_rate(fixtures::canonical_truth()) == 1.0);
  CHECK(matching_rate(sizes_1_1_2()) == 0.5);
  std::vector<std::vector<std::string>> singletons;
  for (int i = 0; i < 8000; ++i) singletons.push_back({"s" + std::to_string(i)});
  const auto all = Clustering::from_clusters(singletons);
  CHECK(avg_cluster_size(all) == 1.0);
  CHECK(matching_rate(all) == 0.0);
  CHECK_THROWS_AS(avg_cluster_size(Clustering{}), Error);
  CHECK_THROWS_AS(matching_rate(Clustering{}), Error);
}

TEST_CASE("Hill numbers on sizes {1,1,2}") {
  const auto c = sizes_1_1_2();
  CHECK(hill_number(c, 0.0) == Approx(2.0));
  CHECK(hill_number(c, 1.0) == Approx(std::exp(-(2.0 / 3) * std::log(2.0 / 3) - (1.0 / 3) * std::log(1.0 / 3))));
  CHECK(hill_number(c, 1.0) == Approx(1.8899).epsilon(1e-4));
  CHECK(hill_number(c, 2.0) == Approx(1.8));
  CHECK(hill_number(c, kHillInfinity) == Approx(1.5));
  CHECK_THROWS_AS(hill_number(c, -1.0), Error);
}

TEST_CASE("Hill numbers are continuous at one and non-increasing in q") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = oracle::random_instance(rng);
    const auto c = oracle::to_clustering(inst.truth, "t");
    const double h1 = hill_number(c, 1.0);
    CHECK(hill_number(c, 1.0 + 1e-6) == Approx(h1).epsilon(1e-4));
    CHECK(hill_number(c, 1.0 - 1e-6) == Approx(h1).epsilon(1e-4));
    double prev = hill_number(c, 0.0);
    for (double q : default_hill_grid()) {
      const double h = hill_number(c, q);
      CHECK(h <= prev * (1 + 1e-12));
      prev = h;
    }
    std::size_t singletons = 0;
    for (ClusterIndex k = 0; k < c.num_clusters(); ++k) singletons += c.cluster_size(k) == 1;
    CHECK(matching_rate(c) == Approx(1.0 - static_cast<double>(singletons) / static_cast<double>(c.universe_size())));
  }
}

TEST_CASE("default Hill grid") {
  const auto grid = default_hill_grid();
  REQUIRE(grid.size() == 10);
  CHECK(grid.front() == 0.0);
  CHECK(grid[8] == 2.0);
  CHECK(std::isinf(grid.back()));
}

TEST_CASE("homonymy rate") {
  const auto a = Clustering::from_clusters({{"r1", "r2"}, {"r3"}});
  CHECK(homonymy_rate(a, labels({{"r1", "A"}, {"r2", "A"}, {"r3", "A"}})) == 1.0);
  CHECK(homonymy_rate(a, labels({{"r1", "A"}, {"r2", "B"}, {"r3", "C"}})) == 0.0);
  const auto b = Clustering::from_clusters({{"r1", "r2"}, {"r3"}, {"r4"}});
  CHECK(homonymy_rate(b, labels({{"r1", "A"}, {"r2", "A"}, {"r3", "A"}, {"r4", "B"}})) == Approx(2.0 / 3.0));
  CHECK_THROWS_AS(homonymy_rate(b, labels({{"r1", "A"}})), Error);
}

TEST_CASE("name variation rate") {
  const auto a = Clustering::from_clusters({{"r1", "r2"}});
  CHECK(name_variation_rate(a, labels({{"r1", "A"}, {"r2", "B"}})) == 1.0);
  CHECK(name_variation_rate(a, labels({{"r1", "A"}, {"r2", "A"}})) == 0.0);
  const auto b = Clustering::from_clusters({{"r1", "r2"}, {"r3", "r4"}});
  CHECK(name_variation_rate(b, labels({{"r1", "A"}, {"r2", "A"}, {"r3", "A"}, {"r4", "B"}})) == Approx(0.5));
}

TEST_CASE("label partitions that refine or coarsen the clustering") {
  const auto c = Clustering::from_clusters({{"r1", "r2", "r3"}, {"r4"}});
  // Names refine clusters: no homonymy.
  CHECK(homonymy_rate(c, labels({{"r1", "A"}, {"r2", "A"}, {"r3", "B"}, {"r4", "C"}})) == 0.0);
  // Clusters refine names: no name variation.
  CHECK(name_variation_rate(c, labels({{"r1", "A"}, {"r2", "A"}, {"r3", "A"}, {"r4", "A"}})) == 0.0);
}

TEST_CASE("summary estimates from samples") {
  const auto truth = fixtures::canonical_truth();
  const ClusterSample pps = census(truth, Design::kPpsRecord);
  double f = 0, g = 0;
  for (const auto& d : pps.draws) {
    // Expectation over one draw: each cluster weighted by its draw probability.
    f += d.p_c * (static_cast<double>(d.members.size()) / d.p_c);
    g += d.p_c * (1.0 / d.p_c);
  }
  CHECK(f / g == Approx(2.5));
  const Estimate e = estimate_summary(pps, SummaryStatistic::kAvgSize);
  std::vector<double> fs, gs;
  for (const auto& d : pps.draws) {
    fs.push_back(static_cast<double>(d.members.size()) / d.p_c);
    gs.push_back(1.0 / d.p_c);
  }
  CHECK(e.point == Approx(oracle::ratio(fs, gs).point));
  const Estimate u = estimate_summary(census(truth, Design::kUniformCluster), SummaryStatistic::kAvgSize);
  CHECK(u.point == Approx(2.5));

  ClusterSample one;
  one.design = Design::kPpsRecord;
  one.draws.push_back({"t2", {"r4", "r5"}, 0.4, std::nullopt});
  const Estimate m = estimate_summary(one, SummaryStatistic::kMatchingRate);
  CHECK(m.point == 1.0);
  CHECK(std::isnan(m.std));
  CHECK(std::find(m.flags.begin(), m.flags.end(), "single_draw") != m.flags.end());

  CHECK_THROWS_AS(estimate_summary(ClusterSample{}, SummaryStatistic::kAvgSize), Error);
  CHECK_THROWS_AS(estimate_summary(pps, SummaryStatistic::kHomonymyRate, nullptr), Error);
  const NameIndex names = labels({{"r1", "A"}, {"r2", "A"}, {"r3", "B"}, {"r4", "B"}, {"r5", "C"}});
  const Estimate h = estimate_summary(census(truth, Design::kUniformCluster), SummaryStatistic::kHomonymyRate, &names);
  CHECK(h.point == Approx(homonymy_rate(truth, names)));
}

TEST_CASE("summary report JSON") {
  AttributeTable attrs;
  for (const char* r : {"r1", "r2", "r3", "r4", "r5"}) attrs.add(r, "x");
  const NameIndex names = name_index(attrs);
  const auto report = summarize(fixtures::canonical_truth(), &names, default_hill_grid());
  const auto doc = nlohmann::json::parse(summary_report_json(report));
  CHECK(doc["v"] == 1);
  CHECK(doc["universe_size"] == 5);
  CHECK(doc["avg_cluster_size"] == 2.5);
  CHECK(doc["homonymy_rate"] == 1.0);
  CHECK(doc["hill"].size() == 10);
  CHECK(doc["hill"].back()["q"] == "inf");
  const auto bare = nlohmann::json::parse(summary_report_json(summarize(fixtures::canonical_truth(), nullptr, {1.0})));
  CHECK(bare["homonymy_rate"].is_null());
}
