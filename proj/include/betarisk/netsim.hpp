// Directed trust networks: construction, seeded generation and batch
// assessment of every edge.

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "betarisk/beta_fusion.hpp"
#include "betarisk/trust_table.hpp"

namespace betarisk {

using NodeId = std::size_t;

/// Trust relation from `from` towards `to`. (i, j) and (j, i) are
/// independent edges.
struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  TrustValue required;
  TrustEstimate direct;
  TrustEstimate indirect;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Network {
  std::size_t node_count = 0;
  std::vector<std::string> labels;       // one per node
  std::vector<Edge> edges;               // sorted by (from, to)
  std::vector<RiskAppetite> appetite;    // one per node

  friend bool operator==(const Network&, const Network&) = default;
};

/// Labels "1".."n", matching the 1-based numbering used in reports.
inline std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i + 1));
  return labels;
}

/// Throws std::invalid_argument on the first broken invariant.
inline void validate(const Network& net) {
  auto fail = [](const std::string& why) {
    throw std::invalid_argument("invalid network: " + why);
  };
  if (net.node_count == 0) fail("no nodes");
  if (net.labels.size() != net.node_count) fail("label count != node count");
  if (net.appetite.size() != net.node_count) {
    fail("appetite count != node count");
  }
  for (std::size_t k = 0; k < net.edges.size(); ++k) {
    const Edge& e = net.edges[k];
    if (e.from >= net.node_count || e.to >= net.node_count) {
      fail("edge " + std::to_string(k) + " endpoint out of range");
    }
    if (e.from == e.to) {
      fail("self-edge at node " + net.labels[e.from]);
    }
    if (k > 0) {
      const Edge& prev = net.edges[k - 1];
      if (std::pair(prev.from, prev.to) >= std::pair(e.from, e.to)) {
        fail("edges unsorted or duplicated at " + net.labels[e.from] + "->" +
             net.labels[e.to]);
      }
    }
  }
}

/// Dense row-major square matrix.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0)
      : n_(n), data_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * n_ + j];
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct EdgeAssessment {
  NodeId from = 0;
  NodeId to = 0;
  TrustRecord record;

  friend bool operator==(const EdgeAssessment&,
                         const EdgeAssessment&) = default;
};

/// An edge whose fusion failed; its C and R entries stay 0.
struct EdgeFailure {
  NodeId from = 0;
  NodeId to = 0;
  FusionErrorKind kind = FusionErrorKind::InvalidVariance;
  std::string message;

  friend bool operator==(const EdgeFailure&, const EdgeFailure&) = default;
};

/// Five matrices laid out like the trust tables: diagonal T = R = 0 and
/// A = B = C = 1; entries without an edge are 0 everywhere.
struct AssessmentResult {
  std::size_t node_count = 0;
  Matrix t, a, b, c, r;
  std::vector<EdgeAssessment> assessments;  // in edge order
  std::vector<EdgeFailure> failures;

  const TrustRecord* find(NodeId from, NodeId to) const {
    for (const auto& ea : assessments) {
      if (ea.from == from && ea.to == to) return &ea.record;
    }
    return nullptr;
  }

  friend bool operator==(const AssessmentResult&,
                         const AssessmentResult&) = default;
};

template <TrustCombiner Combiner = BetaCombiner>
AssessmentResult run_assessment(const Network& net,
                                const Combiner& combine = {}) {
  validate(net);
  const std::size_t n = net.node_count;
  AssessmentResult res;
  res.node_count = n;
  res.t = Matrix(n);
  res.a = Matrix(n);
  res.b = Matrix(n);
  res.c = Matrix(n);
  res.r = Matrix(n);
  for (std::size_t i = 0; i < n; ++i) {
    res.a(i, i) = res.b(i, i) = res.c(i, i) = 1.0;
  }

  for (const Edge& e : net.edges) {
    res.t(e.from, e.to) = e.required.value();
    res.a(e.from, e.to) = e.direct.mean.value();
    res.b(e.from, e.to) = e.indirect.mean.value();
    try {
      TrustRecord rec = evaluate_request(e.required, e.direct, e.indirect,
                                         net.appetite[e.from], combine);
      res.c(e.from, e.to) = rec.combined_or_zero();
      res.r(e.from, e.to) = rec.risk;
      res.assessments.push_back({e.from, e.to, std::move(rec)});
    } catch (const FusionError& err) {
      res.failures.push_back({e.from, e.to, err.kind(), err.what()});
    }
  }
  return res;
}

/// Peer risks of one node in peer order, the node itself excluded.
inline std::vector<std::pair<NodeId, double>> risk_series(
    const AssessmentResult& res, NodeId node) {
  if (node >= res.node_count) {
    throw std::domain_error("risk_series: node " + std::to_string(node) +
                            " out of range");
  }
  std::vector<std::pair<NodeId, double>> series;
  series.reserve(res.node_count - 1);
  for (NodeId peer = 0; peer < res.node_count; ++peer) {
    if (peer != node) series.emplace_back(peer, res.r(node, peer));
  }
  return series;
}

struct ScenarioConfig {
  std::uint64_t seed = 0;
  std::size_t node_count = 15;
  double edge_probability = 0.3;
  double variance_direct = kDefaultVariance;
  double variance_indirect = kDefaultVariance;
  double max_acceptable_risk = 0.0;

  friend bool operator==(const ScenarioConfig&,
                         const ScenarioConfig&) = default;
};

/// The committed fifteen-node experiment.
inline constexpr ScenarioConfig kFifteenNodeScenario{
    .seed = 20100415,
    .node_count = 15,
    .edge_probability = 0.3,
    .variance_direct = kDefaultVariance,
    .variance_indirect = kDefaultVariance,
    .max_acceptable_risk = 0.0,
};

/// Uniform doubles from std::mt19937_64, whose output sequence is fixed by
/// the standard. The top 53 bits give (k + 0.5) / 2^53, strictly inside
/// (0, 1), without relying on implementation-defined distributions.
class ScenarioRng {
 public:
  explicit ScenarioRng(std::uint64_t seed) : engine_(seed) {}

  double next_open_unit() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

/// Draw order is row-major over ordered pairs (i, j), i != j. Every pair
/// consumes four draws (existence, T, A, B) whether or not the edge exists,
/// so an edge's values do not depend on edge_probability.
inline Network generate_network(const ScenarioConfig& cfg) {
  if (cfg.node_count < 2) {
    throw std::invalid_argument("scenario needs at least 2 nodes, got " +
                                std::to_string(cfg.node_count));
  }
  if (!(cfg.edge_probability >= 0.0 && cfg.edge_probability <= 1.0)) {
    throw std::invalid_argument("edge_probability outside [0, 1]");
  }
  if (!(cfg.variance_direct > 0.0) || !(cfg.variance_indirect > 0.0)) {
    throw std::invalid_argument("scenario variances must be positive");
  }

  Network net;
  net.node_count = cfg.node_count;
  net.labels = default_labels(cfg.node_count);
  net.appetite.assign(cfg.node_count, RiskAppetite(cfg.max_acceptable_risk));

  ScenarioRng rng(cfg.seed);
  for (NodeId i = 0; i < cfg.node_count; ++i) {
    for (NodeId j = 0; j < cfg.node_count; ++j) {
      if (i == j) continue;
      const double exists = rng.next_open_unit();
      const double t = rng.next_open_unit();
      const double a = rng.next_open_unit();
      const double b = rng.next_open_unit();
      if (exists < cfg.edge_probability) {
        net.edges.push_back({i, j, TrustValue(t),
                             TrustEstimate(a, cfg.variance_direct),
                             TrustEstimate(b, cfg.variance_indirect)});
      }
    }
  }
  return net;
}

/// The three-node network of the reference trust table, with every ordered
/// pair connected and default variances.
inline Network fixture_three_node(double variance = kDefaultVariance) {
  constexpr double kT[3][3] = {{0.0, 0.4546, 0.7148},
                               {0.7688, 0.0, 0.5383},
                               {0.5846, 0.2413, 0.0}};
  constexpr double kA[3][3] = {{1.0, 0.5133, 0.6844},
                               {0.5141, 1.0, 0.1610},
                               {0.4685, 0.7003, 1.0}};
  constexpr double kB[3][3] = {{1.0, 0.7578, 0.0445},
                               {0.8596, 1.0, 0.5953},
                               {0.4558, 0.0777, 1.0}};
  Network net;
  net.node_count = 3;
  net.labels = default_labels(3);
  net.appetite.assign(3, RiskAppetite{});
  for (NodeId i = 0; i < 3; ++i) {
    for (NodeId j = 0; j < 3; ++j) {
      if (i == j) continue;
      net.edges.push_back({i, j, TrustValue(kT[i][j]),
                           TrustEstimate(kA[i][j], variance),
                           TrustEstimate(kB[i][j], variance)});
    }
  }
  return net;
}

}  // namespace betarisk
