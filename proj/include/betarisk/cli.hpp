// Command-line front end: fuse, decide, simulate, reproduce-table1.
//
// Exit codes: 0 accepted / success, 1 usage or math error, 2 declined.
// BETARISK_DEFAULT_VARIANCE overrides the default variance (0.01) used
// wherever no variance flag or document default is given.

#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "betarisk/beta_fusion.hpp"
#include "betarisk/netsim.hpp"
#include "betarisk/network_io.hpp"
#include "betarisk/trust_table.hpp"

namespace betarisk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitDecline = 2;

inline constexpr const char* kVarianceEnv = "BETARISK_DEFAULT_VARIANCE";

enum class Method { Beta, Average };

struct VarianceFlags {
  std::optional<double> both;
  std::optional<double> direct;
  std::optional<double> indirect;

  double resolve_direct(double fallback) const {
    return direct.value_or(both.value_or(fallback));
  }
  double resolve_indirect(double fallback) const {
    return indirect.value_or(both.value_or(fallback));
  }
};

struct FuseOptions {
  double a = 0.0;
  double b = 0.0;
  VarianceFlags var;
  bool indirect_as_prior = false;
};

struct DecideOptions {
  double t = 0.0;
  double a = 0.0;
  double b = 0.0;
  VarianceFlags var;
  double appetite = 0.0;
  Method method = Method::Beta;
  bool indirect_as_prior = false;
};

struct SimulateOptions {
  std::optional<std::size_t> nodes;
  std::uint64_t seed = kFifteenNodeScenario.seed;
  double edge_probability = kFifteenNodeScenario.edge_probability;
  std::optional<double> var;
  std::optional<double> appetite;  // overrides every node's appetite
  Method method = Method::Beta;
  bool table1 = false;
  std::string network_path;
  std::string out_dir;
};

struct Table1Options {
  Method method = Method::Beta;
  std::optional<double> var;
};

/// Default variance from the environment, else 0.01.
inline double environment_variance() {
  const char* raw = std::getenv(kVarianceEnv);
  if (raw == nullptr || *raw == '\0') return kDefaultVariance;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(raw, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || raw[used] != '\0' || !(v > 0.0 && v < 0.25)) {
    throw std::invalid_argument(std::string(kVarianceEnv) + "='" + raw +
                                "' is not a variance in (0, 0.25)");
  }
  return v;
}

namespace detail {

inline std::string fixed6(double v) {
  return betarisk::detail::format_fixed(v, 6);
}

template <class F>
decltype(auto) with_combiner(Method method, bool indirect_as_prior, F&& f) {
  if (method == Method::Average) return f(AverageCombiner{});
  return f(BetaCombiner{indirect_as_prior});
}

inline const char* method_name(Method m) {
  return m == Method::Beta ? "beta" : "average";
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace detail

inline int cmd_fuse(const FuseOptions& opt, std::ostream& out,
                    std::ostream& err) {
  const double fallback = environment_variance();
  const TrustEstimate direct(opt.a, opt.var.resolve_direct(fallback));
  const TrustEstimate indirect(opt.b, opt.var.resolve_indirect(fallback));
  try {
    const FusionBreakdown f =
        opt.indirect_as_prior ? fuse(indirect, direct, "indirect", "direct")
                              : fuse(direct, indirect, "direct", "indirect");
    const BetaParams& pa = opt.indirect_as_prior ? f.likelihood : f.prior;
    const BetaParams& pb = opt.indirect_as_prior ? f.prior : f.likelihood;
    const double w_a = opt.indirect_as_prior ? f.weights.w_b : f.weights.w_a;
    const double w_b = opt.indirect_as_prior ? f.weights.w_a : f.weights.w_b;
    out << "prior    " << (opt.indirect_as_prior ? "indirect" : "direct")
        << '\n'
        << "alpha_A  " << detail::fixed6(pa.alpha()) << '\n'
        << "beta_A   " << detail::fixed6(pa.beta()) << '\n'
        << "alpha_B  " << detail::fixed6(pb.alpha()) << '\n'
        << "beta_B   " << detail::fixed6(pb.beta()) << '\n'
        << "K        " << detail::fixed6(f.weights.k) << '\n'
        << "W_A      " << detail::fixed6(w_a) << '\n'
        << "W_B      " << detail::fixed6(w_b) << '\n'
        << "C        " << detail::fixed6(f.combined.value()) << '\n';
  } catch (const FusionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}

inline int cmd_decide(const DecideOptions& opt, std::ostream& out,
                      std::ostream& err) {
  const double fallback = environment_variance();
  const TrustEstimate direct(opt.a, opt.var.resolve_direct(fallback));
  const TrustEstimate indirect(opt.b, opt.var.resolve_indirect(fallback));
  try {
    const TrustRecord rec = detail::with_combiner(
        opt.method, opt.indirect_as_prior, [&](const auto& combine) {
          return evaluate_request(TrustValue(opt.t), direct, indirect,
                                  RiskAppetite(opt.appetite), combine);
        });
    out << "decision " << to_string(rec.decision.kind) << '\n'
        << "C        "
        << (rec.combined ? detail::fixed6(rec.combined->value()) : "-") << '\n'
        << "R        " << detail::fixed6(rec.risk) << '\n';
    return rec.decision.accepted() ? kExitOk : kExitDecline;
  } catch (const FusionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

inline void write_summary(std::ostream& out, const Network& net,
                          const AssessmentResult& res, Method method) {
  std::size_t tally[5] = {};
  for (const auto& ea : res.assessments) {
    ++tally[static_cast<int>(ea.record.decision.kind)];
  }
  out << "method          " << detail::method_name(method) << '\n'
      << "nodes           " << net.node_count << '\n'
      << "edges           " << net.edges.size() << '\n';
  for (Decision d : {Decision::AcceptDirect, Decision::AcceptIndirect,
                     Decision::AcceptCombined, Decision::AcceptWithRisk,
                     Decision::Decline}) {
    std::string name(to_string(d));
    name.resize(16, ' ');
    out << name << tally[static_cast<int>(d)] << '\n';
  }
  out << "failed          " << res.failures.size() << '\n';
}

/// Writes matrices.csv, risk_series.csv and network.json into opt.out_dir.
inline int cmd_simulate(const SimulateOptions& opt, std::ostream& out,
                        std::ostream& err) {
  const double fallback = environment_variance();
  const double variance = opt.var.value_or(fallback);

  Network net;
  if (opt.table1) {
    if (opt.nodes && *opt.nodes != 3) {
      err << "error: --table1 describes 3 nodes, got --nodes " << *opt.nodes
          << '\n';
      return kExitError;
    }
    net = fixture_three_node(variance);
  } else if (!opt.network_path.empty()) {
    net = load_network(opt.network_path, variance);
  } else {
    ScenarioConfig cfg;
    cfg.seed = opt.seed;
    cfg.node_count = opt.nodes.value_or(kFifteenNodeScenario.node_count);
    cfg.edge_probability = opt.edge_probability;
    cfg.variance_direct = variance;
    cfg.variance_indirect = variance;
    net = generate_network(cfg);
  }
  if (opt.appetite) {
    net.appetite.assign(net.node_count, RiskAppetite(*opt.appetite));
  }

  const AssessmentResult res = detail::with_combiner(
      opt.method, false,
      [&](const auto& combine) { return run_assessment(net, combine); });

  for (const auto& f : res.failures) {
    err << "warning: edge " << net.labels[f.from] << "->" << net.labels[f.to]
        << ": " << f.message << '\n';
  }

  const std::filesystem::path dir(opt.out_dir);
  std::filesystem::create_directories(dir);

  std::ostringstream matrices;
  matrices << "# method: " << detail::method_name(opt.method) << '\n';
  write_matrix_document(matrices, to_matrix_document(res, net.labels));
  detail::write_text_file(dir / "matrices.csv", matrices.str());

  std::ostringstream series;
  write_risk_series_table(series, res, net.labels);
  detail::write_text_file(dir / "risk_series.csv", series.str());

  detail::write_text_file(dir / "network.json",
                          network_to_json(net).dump(2) + "\n");

  write_summary(out, net, res, opt.method);
  return kExitOk;
}

inline int cmd_reproduce_table1(const Table1Options& opt, std::ostream& out,
                                std::ostream& err) {
  const double variance = opt.var.value_or(environment_variance());
  const Network net = fixture_three_node(variance);
  const AssessmentResult res = detail::with_combiner(
      opt.method, false,
      [&](const auto& combine) { return run_assessment(net, combine); });
  for (const auto& f : res.failures) {
    err << "warning: edge " << net.labels[f.from] << "->" << net.labels[f.to]
        << ": " << f.message << '\n';
  }
  out << "# method: " << detail::method_name(opt.method) << '\n';
  if (opt.method == Method::Beta) {
    out << "# variance: direct=" << betarisk::detail::format_fixed(variance, 4)
        << " indirect=" << betarisk::detail::format_fixed(variance, 4) << '\n';
  }
  write_matrix_document(out, to_matrix_document(res, net.labels));
  return res.failures.empty() ? kExitOk : kExitError;
}

namespace detail {

inline void add_variance_flags(CLI::App* cmd, VarianceFlags& var) {
  const auto in_range = CLI::Range(0.0, 1.0);
  cmd->add_option("--var", var.both, "Variance of both estimates")
      ->check(in_range);
  cmd->add_option("--var-a", var.direct, "Variance of the direct estimate")
      ->check(in_range);
  cmd->add_option("--var-b", var.indirect, "Variance of the indirect estimate")
      ->check(in_range);
}

inline std::map<std::string, Method> method_map() {
  return {{"beta", Method::Beta}, {"average", Method::Average}};
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Trust fusion and risk assessment for node networks",
               "betarisk"};
  app.require_subcommand(1);
  const auto unit = CLI::Range(0.0, 1.0);

  FuseOptions fuse_opt;
  std::string prior = "direct";
  auto* fuse_cmd =
      app.add_subcommand("fuse", "Fuse a direct and an indirect estimate");
  fuse_cmd->add_option("--a", fuse_opt.a, "Direct trust mean")
      ->required()
      ->check(unit);
  fuse_cmd->add_option("--b", fuse_opt.b, "Indirect trust mean")
      ->required()
      ->check(unit);
  detail::add_variance_flags(fuse_cmd, fuse_opt.var);
  fuse_cmd->add_option("--prior", prior, "Estimate used as the prior")
      ->check(CLI::IsMember({"direct", "indirect"}));

  DecideOptions decide_opt;
  auto* decide_cmd =
      app.add_subcommand("decide", "Decide whether to accept one job");
  decide_cmd->add_option("--t", decide_opt.t, "Required trust")
      ->required()
      ->check(unit);
  decide_cmd->add_option("--a", decide_opt.a, "Direct trust mean")
      ->required()
      ->check(unit);
  decide_cmd->add_option("--b", decide_opt.b, "Indirect trust mean")
      ->required()
      ->check(unit);
  detail::add_variance_flags(decide_cmd, decide_opt.var);
  decide_cmd->add_option("--appetite", decide_opt.appetite,
                         "Largest acceptable risk")
      ->check(unit);
  decide_cmd->add_option("--method", decide_opt.method, "beta or average")
      ->transform(CLI::CheckedTransformer(detail::method_map()));
  decide_cmd->add_option("--prior", prior, "Estimate used as the prior")
      ->check(CLI::IsMember({"direct", "indirect"}));

  SimulateOptions sim_opt;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Assess every edge of a generated or loaded network");
  sim_cmd->add_option("--nodes", sim_opt.nodes, "Node count");
  sim_cmd->add_option("--seed", sim_opt.seed, "Scenario seed");
  sim_cmd->add_option("--edge-prob", sim_opt.edge_probability,
                      "Probability of each directed edge")
      ->check(unit);
  sim_cmd->add_option("--var", sim_opt.var, "Variance of every estimate")
      ->check(unit);
  sim_cmd->add_option("--appetite", sim_opt.appetite,
                      "Largest acceptable risk for every node")
      ->check(unit);
  sim_cmd->add_option("--method", sim_opt.method, "beta or average")
      ->transform(CLI::CheckedTransformer(detail::method_map()));
  auto* table1_flag = sim_cmd->add_flag(
      "--table1", sim_opt.table1, "Use the three-node reference network");
  sim_cmd->add_option("--network", sim_opt.network_path,
                      "Load the network from a JSON document")
      ->check(CLI::ExistingFile)
      ->excludes(table1_flag);
  sim_cmd->add_option("--out", sim_opt.out_dir, "Output directory")
      ->required();

  Table1Options t1_opt;
  auto* t1_cmd = app.add_subcommand(
      "reproduce-table1", "Print the five matrices of the three-node network");
  t1_cmd->add_option("--method", t1_opt.method, "beta or average")
      ->transform(CLI::CheckedTransformer(detail::method_map()));
  t1_cmd->add_option("--var", t1_opt.var, "Variance of every estimate")
      ->check(unit);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (*fuse_cmd) {
      fuse_opt.indirect_as_prior = prior == "indirect";
      return cmd_fuse(fuse_opt, out, err);
    }
    if (*decide_cmd) {
      decide_opt.indirect_as_prior = prior == "indirect";
      return cmd_decide(decide_opt, out, err);
    }
    if (*sim_cmd) return cmd_simulate(sim_opt, out, err);
    if (*t1_cmd) return cmd_reproduce_table1(t1_opt, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("betarisk");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace betarisk::cli
