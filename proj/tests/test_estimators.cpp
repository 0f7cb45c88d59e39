#include <cmath>
#include <random>

#include "doctest.h"
#include "ereval/error.hpp"
#include "ereval/estimators.hpp"
#include "fixtures.hpp"
#include "json.hpp"
#include "oracle.hpp"

using namespace ereval;
using doctest::Approx;

namespace {

// Σf / Σg over a table, with the complement applied (homogeneity).
double census_ratio(const ErrorTable& rows, const RatioTarget& t) {
  double f = 0, g = 0;
  for (const auto& r : rows) {
    f += t.f(r);
    g += t.g(r);
  }
  return t.complement ? 1.0 - f / g : f / g;
}

ErrorTable canonical_census() {
  return census_error_table(fixtures::canonical_truth(), fixtures::canonical_prediction(), Design::kUniformCluster);
}

const PredictionGlobals kCanonicalGlobals{5, 2};

}  // namespace

TEST_CASE("ratio estimator hand case") {
  const std::vector<double> f{2, 4}, g{4, 4};
  const Estimate e = ratio_estimate(f, g);
  CHECK(e.point == 0.75);
  CHECK(e.std * e.std == 1.0 / 16.0);
  CHECK(e.k == 2);
  const auto o = oracle::ratio(f, g);
  CHECK(o.point == Approx(e.point));
  CHECK(o.variance == Approx(e.std * e.std));
}

TEST_CASE("ratio estimator trivial cases") {
  const std::vector<double> same{3, 5, 7};
  const Estimate e = ratio_estimate(same, same);
  CHECK(e.point == Approx(1.0));
  CHECK(e.std == Approx(0.0));
  const std::vector<double> f2{1, 1}, g2{2, 2};
  const Estimate d = ratio_estimate(f2, g2);
  CHECK(d.point == Approx(0.5));
  CHECK(d.std == Approx(0.0));
}

TEST_CASE("ratio estimator errors and zero numerator") {
  const std::vector<double> one{1};
  try {
    ratio_estimate(one, one);
    FAIL("k = 1 accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerate);
    CHECK(std::string(e.what()).find("insufficient sample") != std::string::npos);
  }
  const std::vector<double> zeros{0, 0}, ones{1, 1};
  CHECK_THROWS_AS(ratio_estimate(ones, zeros), Error);
  const Estimate z = ratio_estimate(zeros, ones);
  CHECK(z.point == 0.0);
  CHECK(z.std == 0.0);
  REQUIRE(z.flags.size() == 1);
  CHECK(z.flags[0] == "zero_numerator");
}

TEST_CASE("ratio estimator matches the independent evaluation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + trial % 30;
    std::vector<double> f(k), g(k);
    for (std::size_t i = 0; i < k; ++i) {
      g[i] = u(rng);
      f[i] = g[i] * u(rng) / 5.0;
    }
    const Estimate e = ratio_estimate(f, g);
    const auto o = oracle::ratio(f, g);
    CHECK(e.point == Approx(o.point).epsilon(1e-12));
    CHECK(e.std * e.std == Approx(o.variance).epsilon(1e-12));
  }
}

TEST_CASE("canonical census values") {
  const ErrorTable rows = canonical_census();
  CHECK(census_ratio(rows, pairwise_precision_target()) == Approx(0.5));
  CHECK(census_ratio(rows, pairwise_recall_target()) == Approx(0.5));
  CHECK(census_ratio(rows, pairwise_f_target(1.0)) == Approx(0.5));
  CHECK(census_ratio(rows, cluster_precision_target(kCanonicalGlobals)) == 0.0);
  CHECK(census_ratio(rows, cluster_recall_target()) == 0.0);
  CHECK(census_ratio(rows, bcubed_precision_target()) == Approx(13.0 / 18.0));
  CHECK(census_ratio(rows, bcubed_recall_target()) == Approx(7.0 / 9.0));
  CHECK(census_ratio(rows, homogeneity_target(5)) == Approx(0.4325).epsilon(1e-4));

  // Unweighted pair sums: Σf = 4, Σg = 8.
  const auto t = pairwise_precision_target();
  CHECK(t.f(rows[0]) + t.f(rows[1]) == Approx(4.0));
  CHECK(t.g(rows[0]) + t.g(rows[1]) == Approx(8.0));

  // With p_c = |c|/N the ratio of per-draw expectations is the same target.
  const ErrorTable pps =
      census_error_table(fixtures::canonical_truth(), fixtures::canonical_prediction(), Design::kPpsRecord);
  for (const auto& target : {pairwise_precision_target(), pairwise_recall_target()}) {
    double ef = 0, eg = 0;
    for (const auto& r : pps) {
      ef += r.p_c * target.f(r);
      eg += r.p_c * target.g(r);
    }
    CHECK(ef / eg == Approx(0.5));
  }
}

TEST_CASE("library oracle agrees on the canonical example") {
  const OracleMetrics m = oracle_metrics(fixtures::canonical_truth(), fixtures::canonical_prediction());
  CHECK(m.pairwise_precision == Approx(0.5));
  CHECK(m.pairwise_recall == Approx(0.5));
  CHECK(m.pairwise_f == Approx(0.5));
  CHECK(m.cluster_precision == 0.0);
  CHECK(m.cluster_recall == 0.0);
  CHECK(m.bcubed_precision == Approx(13.0 / 18.0));
  CHECK(m.bcubed_recall == Approx(7.0 / 9.0));
  CHECK(m.homogeneity == Approx(0.43253).epsilon(1e-4));
}

TEST_CASE("perfect prediction scores one everywhere") {
  const auto truth = fixtures::canonical_truth();
  const ErrorTable rows = census_error_table(truth, truth, Design::kUniformCluster);
  const PredictionGlobals globals{5, 2};
  for (Metric m : all_metrics()) {
    EstimateOptions o;
    o.globals = globals;
    CHECK(census_ratio(rows, make_target(m, o)) == Approx(1.0));
  }
  const OracleMetrics om = oracle_metrics(truth, truth);
  for (Metric m : all_metrics()) CHECK(om.get(m) == Approx(1.0));
}

TEST_CASE("extra predicted singleton keeps cluster precision and recall at one") {
  const auto truth = Clustering::from_clusters({{"r1", "r2"}, {"r3"}, {"r4"}});
  const auto pred = Clustering::from_clusters({{"r1", "r2"}, {"r3"}, {"r4"}});
  const ErrorTable rows = census_error_table(truth, pred, Design::kUniformCluster);
  CHECK(census_ratio(rows, cluster_precision_target({4, 3})) == Approx(1.0));
  CHECK(census_ratio(rows, cluster_recall_target()) == Approx(1.0));
}

TEST_CASE("all-merged prediction has zero homogeneity") {
  const auto truth = fixtures::canonical_truth();
  const auto merged = Clustering::from_clusters({{"r1", "r2", "r3", "r4", "r5"}});
  const ErrorTable rows = census_error_table(truth, merged, Design::kUniformCluster);
  CHECK(census_ratio(rows, homogeneity_target(5)) == Approx(0.0));
  CHECK(oracle_metrics(truth, merged).homogeneity == Approx(0.0));
}

TEST_CASE("homogeneity undefined when one true cluster spans the universe") {
  const auto truth = Clustering::from_clusters({{"r1", "r2", "r3"}});
  const auto pred = Clustering::from_clusters({{"r1"}, {"r2", "r3"}});
  ErrorTable rows = census_error_table(truth, pred, Design::kUniformCluster);
  rows.push_back(rows[0]);
  try {
    homogeneity(rows, 3);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerate);
    CHECK(std::string(e.what()).find("homogeneity undefined") != std::string::npos);
  }
}

TEST_CASE("pairwise F tends to precision as beta goes to zero") {
  const ErrorTable rows = canonical_census();
  const auto tiny = pairwise_f_target(1e-9);
  const auto p = pairwise_precision_target();
  for (const auto& r : rows) CHECK(tiny.g(r) == Approx(p.g(r)).epsilon(1e-6));
}

TEST_CASE("subgroup estimates") {
  ErrorTable rows = canonical_census();
  rows.push_back(rows[0]);
  rows.push_back(rows[1]);
  const auto all = subgroup_estimate(rows, [](const ClusterErrors&) { return true; }, bcubed_recall_target());
  const auto plain = ratio_estimate(rows, bcubed_recall_target());
  CHECK(all.point == plain.point);
  CHECK(all.std == plain.std);
  const auto only_small =
      subgroup_estimate(rows, [](const ClusterErrors& c) { return c.size == 2; }, bcubed_recall_target());
  CHECK(only_small.point == Approx(1.0));
  CHECK(only_small.k == 2);
  CHECK_THROWS_AS(subgroup_estimate(rows, [](const ClusterErrors&) { return false; }, bcubed_recall_target()), Error);
  CHECK_THROWS_AS(subgroup_estimate(canonical_census(), [](const ClusterErrors& c) { return c.size == 2; },
                                    bcubed_recall_target()),
                  Error);
}

TEST_CASE("census ratios match the brute-force oracle on random instances") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = oracle::random_instance(rng);
    const auto truth = oracle::to_clustering(inst.truth, "t");
    const auto pred = oracle::to_clustering(inst.pred, "p");
    const ErrorTable rows = census_error_table(truth, pred, Design::kUniformCluster);
    const PredictionGlobals g{pred.universe_size(), pred.num_clusters()};
    for (double beta : {1.0, 2.0}) {
      const auto bf = oracle::brute_force(inst, beta);
      const OracleMetrics lib = oracle_metrics(truth, pred, beta);
      auto check = [&](double expected, double census, double library) {
        if (std::isnan(expected)) return;
        CHECK(census == Approx(expected).epsilon(1e-10));
        CHECK(library == Approx(expected).epsilon(1e-10));
      };
      check(bf.pairwise_f, census_ratio(rows, pairwise_f_target(beta)), lib.pairwise_f);
      check(bf.cluster_f, census_ratio(rows, cluster_f_target(beta, g)), lib.cluster_f);
      if (beta != 1.0) continue;
      check(bf.pairwise_precision, census_ratio(rows, pairwise_precision_target()), lib.pairwise_precision);
      check(bf.pairwise_recall, census_ratio(rows, pairwise_recall_target()), lib.pairwise_recall);
      check(bf.cluster_precision, census_ratio(rows, cluster_precision_target(g)), lib.cluster_precision);
      check(bf.cluster_recall, census_ratio(rows, cluster_recall_target()), lib.cluster_recall);
      check(bf.bcubed_precision, census_ratio(rows, bcubed_precision_target()), lib.bcubed_precision);
      check(bf.bcubed_recall, census_ratio(rows, bcubed_recall_target()), lib.bcubed_recall);
      if (truth.num_clusters() > 1)
        check(bf.homogeneity, census_ratio(rows, homogeneity_target(truth.universe_size())), lib.homogeneity);
    }
  }
}

TEST_CASE("metric names, clamping and JSON") {
  CHECK(parse_metric_list("all").size() == 9);
  CHECK(parse_metric_list("pairwise_recall,homogeneity").size() == 2);
  CHECK_THROWS_AS(parse_metric("precision"), Error);
  CHECK_THROWS_AS(parse_metric_list(""), Error);

  ErrorTable rows = canonical_census();
  EstimateOptions o;
  o.globals = kCanonicalGlobals;
  o.design = "uniform_cluster";
  const auto plain = estimate_metric(rows, Metric::kPairwisePrecision, o);
  CHECK(plain.design == "uniform_cluster");
  EstimateOptions no_globals;
  CHECK_THROWS_AS(estimate_metric(rows, Metric::kClusterPrecision, no_globals), Error);

  Estimate over;
  over.metric = "x";
  over.point = 1.2;
  over.std = 0.1;
  over.k = 4;
  const auto doc = nlohmann::json::parse(estimates_to_json({over}));
  CHECK(doc["v"] == 1);
  CHECK(doc["estimates"][0]["lower"].get<double>() == Approx(1.0));
  CHECK(doc["estimates"][0]["upper"].get<double>() == Approx(1.4));
}
