// Test-only reference implementations. Everything here is computed from
// first principles (pair enumeration, per-record loops) and shares no code
// with the library's estimators or error metrics.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ereval/core_model.hpp"

namespace oracle {

// Record i belongs to cluster label[i]; records are "r0", "r1", ...
struct Labels {
  std::vector<int> truth;
  std::vector<int> pred;
};

inline std::string rid(std::size_t i) { return "r" + std::to_string(i); }

inline ereval::Clustering to_clustering(const std::vector<int>& label, const std::string& prefix) {
  std::vector<std::pair<std::string, std::string>> rows;
  for (std::size_t i = 0; i < label.size(); ++i) rows.push_back({rid(i), prefix + std::to_string(label[i])});
  return ereval::Clustering::from_pairs(rows);
}

struct Metrics {
  double pairwise_precision, pairwise_recall, pairwise_f;
  double cluster_precision, cluster_recall, cluster_f;
  double bcubed_precision, bcubed_recall, homogeneity;
  double true_pairs, predicted_pairs, common_pairs;  // unordered pair counts
};

inline double f_beta(double p, double r, double beta) {
  const double b2 = beta * beta;
  if (p == 0.0 && r == 0.0) return 0.0;
  return (1.0 + b2) * p * r / (b2 * p + r);
}

// Brute force: O(N^2) over record pairs for everything.
inline Metrics brute_force(const Labels& l, double beta = 1.0) {
  const std::size_t n = l.truth.size();
  double tp = 0, t = 0, p = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool st = l.truth[i] == l.truth[j];
      const bool sp = l.pred[i] == l.pred[j];
      t += st;
      p += sp;
      tp += st && sp;
    }
  Metrics m{};
  m.true_pairs = t;
  m.predicted_pairs = p;
  m.common_pairs = tp;
  m.pairwise_precision = p > 0 ? tp / p : NAN;
  m.pairwise_recall = t > 0 ? tp / t : NAN;
  m.pairwise_f = f_beta(m.pairwise_precision, m.pairwise_recall, beta);

  // Member sets per label.
  std::map<int, std::vector<std::size_t>> tc, pc;
  for (std::size_t i = 0; i < n; ++i) {
    tc[l.truth[i]].push_back(i);
    pc[l.pred[i]].push_back(i);
  }
  double exact = 0;
  for (const auto& [a, members] : tc)
    for (const auto& [b, pm] : pc)
      if (members == pm) exact += 1;
  m.cluster_precision = exact / static_cast<double>(pc.size());
  m.cluster_recall = exact / static_cast<double>(tc.size());
  m.cluster_f = f_beta(m.cluster_precision, m.cluster_recall, beta);

  // B-cubed, each true cluster weighted equally.
  double bp = 0, br = 0;
  for (const auto& [a, members] : tc) {
    double cp = 0, cr = 0;
    for (std::size_t i : members) {
      double inter = 0, pred_size = 0, true_size = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const bool st = l.truth[j] == l.truth[i];
        const bool sp = l.pred[j] == l.pred[i];
        inter += st && sp;
        pred_size += sp;
        true_size += st;
      }
      cp += inter / pred_size;
      cr += inter / true_size;
    }
    bp += cp / static_cast<double>(members.size());
    br += cr / static_cast<double>(members.size());
  }
  m.bcubed_precision = bp / static_cast<double>(tc.size());
  m.bcubed_recall = br / static_cast<double>(tc.size());

  // Homogeneity 1 - H(C|Ĉ)/H(C) by a per-record sum.
  double h_cond = 0, h_c = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double inter = 0, pred_size = 0, true_size = 0;
    for (std::size_t j = 0; j < n; ++j) {
      inter += l.truth[j] == l.truth[i] && l.pred[j] == l.pred[i];
      pred_size += l.pred[j] == l.pred[i];
      true_size += l.truth[j] == l.truth[i];
    }
    h_cond -= std::log(inter / pred_size) / static_cast<double>(n);
    h_c -= std::log(true_size / static_cast<double>(n)) / static_cast<double>(n);
  }
  m.homogeneity = h_c > 0 ? 1.0 - h_cond / h_c : NAN;
  return m;
}

// Bias-adjusted ratio estimator and variance written out term by term.
struct Ratio {
  double point;
  double variance;
};

inline Ratio ratio(const std::vector<double>& f, const std::vector<double>& g) {
  const double k = static_cast<double>(f.size());
  double fs = 0, gs = 0;
  for (double x : f) fs += x;
  for (double x : g) gs += x;
  const double fb = fs / k, gb = gs / k;
  double adj = 0, var = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    adj += (g[i] / gb) * (f[i] / fb - g[i] / gb);
    var += (g[i] / gb - f[i] / fb) * (g[i] / gb - f[i] / fb);
  }
  const double r = fb / gb;
  return {r * (1.0 + adj / (k * (k - 1.0))), r * r * var / (k * (k - 1.0))};
}

// Random instance: N records in at most max_clusters true clusters, and a
// prediction derived by random moves, merges and splits.
inline Labels random_instance(std::mt19937_64& rng, std::size_t max_n = 200, int max_clusters = 50) {
  std::uniform_int_distribution<std::size_t> n_dist(2, max_n);
  const std::size_t n = n_dist(rng);
  std::uniform_int_distribution<int> c_dist(1, std::min<int>(max_clusters, static_cast<int>(n)));
  const int clusters = c_dist(rng);
  Labels l;
  l.truth.resize(n);
  // Heavy-ish tail: skew labels toward small indices.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) l.truth[i] = static_cast<int>(std::pow(u(rng), 2.0) * clusters);
  l.pred = l.truth;
  int next = clusters;
  std::uniform_int_distribution<std::size_t> rec(0, n - 1);
  const int edits = static_cast<int>(u(rng) * 10);
  for (int e = 0; e < edits; ++e) {
    const double kind = u(rng);
    if (kind < 0.4) {
      l.pred[rec(rng)] = l.pred[rec(rng)];  // move a record into another cluster
    } else if (kind < 0.6) {
      const int a = l.pred[rec(rng)], b = l.pred[rec(rng)];
      for (int& x : l.pred)
        if (x == b) x = a;  // merge
    } else if (kind < 0.8) {
      const int a = l.pred[rec(rng)];
      for (int& x : l.pred)
        if (x == a && u(rng) < 0.5) x = next;  // split
      ++next;
    } else {
      l.pred[rec(rng)] = next++;  // detach a singleton
    }
  }
  return l;
}

}  // namespace oracle
