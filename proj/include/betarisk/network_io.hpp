// File formats.
//
// Network document (JSON):
//
//   {
//     "schema_version": 1,
//     "nodes": ["1", "2", {"id": "3", "max_acceptable_risk": 0.2}],
//     "defaults": {"variance": 0.01, "max_acceptable_risk": 0.0},
//     "edges": [{"from": "1", "to": "2", "required": 0.45,
//                "direct_mean": 0.51, "direct_variance": 0.01,
//                "indirect_mean": 0.75}]
//   }
//
// Node ids may be strings or integers. Omitted variances fall back to
// defaults.variance, then to the caller's fallback (0.01 unless overridden).
//
// Matrix document: five comma-separated sections T, A, B, C, R, each opened
// by a "[name]" line and a header row of node labels, values with 4 decimals.
// Lines starting with '#' are comments.

#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "betarisk/netsim.hpp"
#include "json.hpp"

namespace betarisk {

inline constexpr int kNetworkSchemaVersion = 1;

/// Parse, schema or range problem in an input document. The message names
/// the line or field at fault.
class DocumentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string node_id_string(const nlohmann::json& j,
                                  const std::string& where) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw DocumentError(where + ": node id must be a string or integer");
}

inline double number_field(const nlohmann::json& obj, const char* key,
                           const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw DocumentError(where + "." + key + ": missing");
  }
  if (!it->is_number()) {
    throw DocumentError(where + "." + key + ": not a number");
  }
  return it->get<double>();
}

inline double unit_field(const nlohmann::json& obj, const char* key,
                         const std::string& where) {
  const double v = number_field(obj, key, where);
  if (!(v >= 0.0 && v <= 1.0)) {
    std::ostringstream msg;
    msg << where << "." << key << ": value " << v << " outside [0, 1]";
    throw DocumentError(msg.str());
  }
  return v;
}

inline double optional_unit_field(const nlohmann::json& obj, const char* key,
                                  const std::string& where, double fallback) {
  return obj.contains(key) ? unit_field(obj, key, where) : fallback;
}

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  // -0.0000 would break byte comparisons
  if (std::string(buf).find_first_not_of("-0.") == std::string::npos) {
    std::snprintf(buf, sizeof buf, "%.*f", decimals, 0.0);
  }
  return buf;
}

}  // namespace detail

/// Builds a Network from a parsed document. `fallback_variance` applies when
/// the document has no defaults.variance.
inline Network network_from_json(const nlohmann::json& doc,
                                 double fallback_variance = kDefaultVariance) {
  if (!doc.is_object()) throw DocumentError("document: not a JSON object");
  const auto version = doc.find("schema_version");
  if (version == doc.end() || !version->is_number_integer()) {
    throw DocumentError("schema_version: missing or not an integer");
  }
  if (version->get<int>() != kNetworkSchemaVersion) {
    throw DocumentError("schema_version: unsupported version " +
                        std::to_string(version->get<int>()));
  }

  double variance = fallback_variance;
  double appetite = 0.0;
  if (auto d = doc.find("defaults"); d != doc.end()) {
    if (!d->is_object()) throw DocumentError("defaults: not an object");
    variance = detail::optional_unit_field(*d, "variance", "defaults",
                                           fallback_variance);
    appetite = detail::optional_unit_field(*d, "max_acceptable_risk",
                                           "defaults", 0.0);
  }

  const auto nodes = doc.find("nodes");
  if (nodes == doc.end() || !nodes->is_array() || nodes->empty()) {
    throw DocumentError("nodes: missing, not an array, or empty");
  }
  Network net;
  std::map<std::string, NodeId> index;
  for (std::size_t k = 0; k < nodes->size(); ++k) {
    const auto& node = (*nodes)[k];
    const std::string where = "nodes[" + std::to_string(k) + "]";
    std::string id;
    double node_appetite = appetite;
    if (node.is_object()) {
      if (!node.contains("id")) throw DocumentError(where + ".id: missing");
      id = detail::node_id_string(node["id"], where + ".id");
      node_appetite = detail::optional_unit_field(node, "max_acceptable_risk",
                                                  where, appetite);
    } else {
      id = detail::node_id_string(node, where);
    }
    if (!index.emplace(id, k).second) {
      throw DocumentError(where + ": duplicate node id '" + id + "'");
    }
    net.labels.push_back(id);
    net.appetite.emplace_back(node_appetite);
  }
  net.node_count = net.labels.size();

  const auto edges = doc.find("edges");
  if (edges != doc.end() && !edges->is_array()) {
    throw DocumentError("edges: not an array");
  }
  if (edges != doc.end()) {
    for (std::size_t k = 0; k < edges->size(); ++k) {
      const auto& e = (*edges)[k];
      std::string where = "edges[" + std::to_string(k) + "]";
      if (!e.is_object()) throw DocumentError(where + ": not an object");
      auto endpoint = [&](const char* key) {
        if (!e.contains(key)) {
          throw DocumentError(where + "." + key + ": missing");
        }
        const std::string id = detail::node_id_string(e[key], where + "." + key);
        auto it = index.find(id);
        if (it == index.end()) {
          throw DocumentError(where + "." + key + ": unknown node '" + id + "'");
        }
        return it->second;
      };
      const NodeId from = endpoint("from");
      const NodeId to = endpoint("to");
      where += " (" + net.labels[from] + "->" + net.labels[to] + ")";
      if (from == to) throw DocumentError(where + ": self-edge");
      net.edges.push_back(
          {from, to, TrustValue(detail::unit_field(e, "required", where)),
           TrustEstimate(detail::unit_field(e, "direct_mean", where),
                         detail::optional_unit_field(e, "direct_variance",
                                                     where, variance)),
           TrustEstimate(detail::unit_field(e, "indirect_mean", where),
                         detail::optional_unit_field(e, "indirect_variance",
                                                     where, variance))});
    }
  }
  std::sort(net.edges.begin(), net.edges.end(),
            [](const Edge& x, const Edge& y) {
              return std::pair(x.from, x.to) < std::pair(y.from, y.to);
            });
  for (std::size_t k = 1; k < net.edges.size(); ++k) {
    if (net.edges[k - 1].from == net.edges[k].from &&
        net.edges[k - 1].to == net.edges[k].to) {
      throw DocumentError("edges: duplicate edge " +
                          net.labels[net.edges[k].from] + "->" +
                          net.labels[net.edges[k].to]);
    }
  }
  return net;
}

inline Network parse_network(const std::string& text,
                             double fallback_variance = kDefaultVariance) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    // nlohmann reports "at line L, column C"
    throw DocumentError(std::string("parse error: ") + err.what());
  }
  return network_from_json(doc, fallback_variance);
}

inline Network load_network(const std::string& path,
                            double fallback_variance = kDefaultVariance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DocumentError(path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_network(buf.str(), fallback_variance);
  } catch (const DocumentError& err) {
    throw DocumentError(path + ": " + err.what());
  }
}

/// Every variance and per-node appetite is written explicitly, so the
/// document reloads to an equal Network whatever the reader's defaults.
inline nlohmann::json network_to_json(const Network& net) {
  validate(net);
  nlohmann::json doc;
  doc["schema_version"] = kNetworkSchemaVersion;
  doc["defaults"] = {{"variance", kDefaultVariance},
                     {"max_acceptable_risk", 0.0}};
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < net.node_count; ++i) {
    if (net.appetite[i].max_acceptable_risk() == 0.0) {
      nodes.push_back(net.labels[i]);
    } else {
      nodes.push_back({{"id", net.labels[i]},
                       {"max_acceptable_risk",
                        net.appetite[i].max_acceptable_risk()}});
    }
  }
  doc["nodes"] = std::move(nodes);
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : net.edges) {
    edges.push_back({{"from", net.labels[e.from]},
                     {"to", net.labels[e.to]},
                     {"required", e.required.value()},
                     {"direct_mean", e.direct.mean.value()},
                     {"direct_variance", e.direct.variance},
                     {"indirect_mean", e.indirect.mean.value()},
                     {"indirect_variance", e.indirect.variance}});
  }
  doc["edges"] = std::move(edges);
  return doc;
}

inline void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << network_to_json(net).dump(2) << '\n';
  if (!out) throw std::runtime_error(path + ": write failed");
}

// --- matrix documents -----------------------------------------------------

inline constexpr const char* kMatrixSectionNames[5] = {"T", "A", "B", "C", "R"};

struct MatrixDocument {
  std::vector<std::string> labels;
  Matrix t, a, b, c, r;

  const Matrix& section(std::size_t k) const {
    const Matrix* all[5] = {&t, &a, &b, &c, &r};
    return *all[k];
  }
  Matrix& section(std::size_t k) {
    Matrix* all[5] = {&t, &a, &b, &c, &r};
    return *all[k];
  }
};

inline MatrixDocument to_matrix_document(const AssessmentResult& res,
                                         const std::vector<std::string>& labels) {
  if (labels.size() != res.node_count) {
    throw std::invalid_argument("label count does not match result size");
  }
  return {labels, res.t, res.a, res.b, res.c, res.r};
}

inline void write_matrix_section(std::ostream& out, const char* name,
                                 const std::vector<std::string>& labels,
                                 const Matrix& m) {
  out << '[' << name << "]\n";
  out << "node";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << labels[i];
    for (std::size_t j = 0; j < m.size(); ++j) {
      out << ',' << detail::format_fixed(m(i, j), 4);
    }
    out << '\n';
  }
}

inline void write_matrix_document(std::ostream& out, const MatrixDocument& doc) {
  for (std::size_t k = 0; k < 5; ++k) {
    if (k > 0) out << '\n';
    write_matrix_section(out, kMatrixSectionNames[k], doc.labels,
                         doc.section(k));
  }
}

inline std::string render_matrix_document(const MatrixDocument& doc) {
  std::ostringstream out;
  write_matrix_document(out, doc);
  return out.str();
}

inline MatrixDocument parse_matrix_document(const std::string& text) {
  MatrixDocument doc;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  int section = -1;
  std::size_t row = 0;
  bool seen[5] = {};

  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  auto fail = [&](const std::string& why) {
    throw DocumentError("line " + std::to_string(line_no) + ": " + why);
  };

  bool expect_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (section >= 0 && row != doc.labels.size()) {
        fail("section truncated");
      }
      const std::string name = line.substr(1, line.find(']') - 1);
      auto it = std::find_if(std::begin(kMatrixSectionNames),
                             std::end(kMatrixSectionNames),
                             [&](const char* n) { return name == n; });
      if (it == std::end(kMatrixSectionNames) || line.back() != ']') {
        fail("unknown section '" + line + "'");
      }
      section = static_cast<int>(it - std::begin(kMatrixSectionNames));
      if (seen[section]) fail("duplicate section " + name);
      seen[section] = true;
      expect_header = true;
      row = 0;
      continue;
    }
    if (section < 0) fail("data before first section");
    auto cells = split(line);
    if (expect_header) {
      if (cells.empty() || cells[0] != "node") fail("expected header row");
      std::vector<std::string> labels(cells.begin() + 1, cells.end());
      if (doc.labels.empty()) {
        doc.labels = labels;
      } else if (labels != doc.labels) {
        fail("labels differ from first section");
      }
      doc.section(section) = Matrix(doc.labels.size());
      expect_header = false;
      continue;
    }
    const std::size_t n = doc.labels.size();
    if (row >= n) fail("too many rows");
    if (cells.size() != n + 1) fail("expected " + std::to_string(n + 1) + " cells");
    if (cells[0] != doc.labels[row]) fail("row label mismatch");
    for (std::size_t j = 0; j < n; ++j) {
      try {
        std::size_t used = 0;
        doc.section(section)(row, j) = std::stod(cells[j + 1], &used);
        if (used != cells[j + 1].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        fail("bad number '" + cells[j + 1] + "'");
      }
    }
    ++row;
  }
  if (section >= 0 && row != doc.labels.size()) fail("section truncated");
  for (std::size_t k = 0; k < 5; ++k) {
    if (!seen[k]) {
      throw DocumentError(std::string("missing section ") +
                          kMatrixSectionNames[k]);
    }
  }
  return doc;
}

/// One row per node, one column per node label; the node's own cell is empty.
inline void write_risk_series_table(std::ostream& out,
                                    const AssessmentResult& res,
                                    const std::vector<std::string>& labels) {
  out << "node";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (NodeId i = 0; i < res.node_count; ++i) {
    out << labels[i];
    std::size_t next_peer = 0;
    const auto series = risk_series(res, i);
    for (NodeId j = 0; j < res.node_count; ++j) {
      out << ',';
      if (j == i) continue;
      out << detail::format_fixed(series[next_peer++].second, 4);
    }
    out << '\n';
  }
}

}  // namespace betarisk
