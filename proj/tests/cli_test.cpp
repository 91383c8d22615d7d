#include "betarisk/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace betarisk {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string line_value(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + " ", 0) == 0) {
      const auto pos = line.find_first_not_of(' ', key.size());
      return line.substr(pos);
    }
  }
  return "<missing " + key + ">";
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    unsetenv(cli::kVarianceEnv);
    dir_ = fs::temp_directory_path() /
           ("betarisk_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override {
    unsetenv(cli::kVarianceEnv);
    fs::remove_all(dir_);
  }
  fs::path dir_;
};

TEST_F(CliTest, FuseSymmetricBeta22) {
  const CliRun r = run({"fuse", "--a", "0.5", "--b", "0.5", "--var", "0.05"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(line_value(r.out, "alpha_A"), "2.000000");
  EXPECT_EQ(line_value(r.out, "beta_B"), "2.000000");
  EXPECT_EQ(line_value(r.out, "K"), "6.000000");
  EXPECT_EQ(line_value(r.out, "W_A"), "0.666667");
  EXPECT_EQ(line_value(r.out, "W_B"), "0.333333");
  EXPECT_EQ(line_value(r.out, "C"), "0.500000");
}

TEST_F(CliTest, FuseReferenceEdge) {
  const CliRun r = run({"fuse", "--a", "0.6844", "--b", "0.0445", "--var", "0.01"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(line_value(r.out, "alpha_A"), "14.098410");
  EXPECT_EQ(line_value(r.out, "alpha_B"), "0.144713");
  EXPECT_EQ(line_value(r.out, "K"), "21.851639");
  EXPECT_EQ(line_value(r.out, "W_B"), "-0.879565");
  EXPECT_EQ(line_value(r.out, "C"), "0.606047");
}

TEST_F(CliTest, FuseIndirectAsPriorKeepsLabels) {
  const CliRun fwd = run({"fuse", "--a", "0.6844", "--b", "0.0445"});
  const CliRun rev =
      run({"fuse", "--a", "0.6844", "--b", "0.0445", "--prior", "indirect"});
  EXPECT_EQ(rev.code, 0);
  EXPECT_EQ(line_value(rev.out, "prior"), "indirect");
  EXPECT_EQ(line_value(rev.out, "alpha_A"), line_value(fwd.out, "alpha_A"));
  EXPECT_EQ(line_value(rev.out, "K"), line_value(fwd.out, "K"));
  // posterior is symmetric in its inputs; only the weights move (oracle values)
  EXPECT_EQ(line_value(rev.out, "C"), line_value(fwd.out, "C"));
  EXPECT_EQ(line_value(rev.out, "W_A"), "0.875840");
  EXPECT_EQ(line_value(rev.out, "W_B"), "0.148821");
}

TEST_F(CliTest, FuseInvalidVariance) {
  const CliRun r = run({"fuse", "--a", "0.5", "--b", "0.5", "--var", "0.3"});
  EXPECT_EQ(r.code, cli::kExitError);
  EXPECT_NE(r.err.find("InvalidVariance"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("method-of-moments"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("direct"), std::string::npos) << r.err;
}

TEST_F(CliTest, FuseDegeneratePosterior) {
  const CliRun r = run({"fuse", "--a", "0.05", "--b", "0.05", "--var", "0.04"});
  EXPECT_EQ(r.code, cli::kExitError);
  EXPECT_NE(r.err.find("DegeneratePosterior"), std::string::npos) << r.err;
}

TEST_F(CliTest, DecideDirect) {
  const CliRun r = run({"decide", "--t", "0.4546", "--a", "0.5133", "--b", "0.7578"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(line_value(r.out, "decision"), "AcceptDirect");
  EXPECT_EQ(line_value(r.out, "C"), "-");
  EXPECT_EQ(line_value(r.out, "R"), "0.000000");
}

TEST_F(CliTest, DecideIndirect) {
  const CliRun r = run({"decide", "--t", "0.5383", "--a", "0.1610", "--b", "0.5953"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(line_value(r.out, "decision"), "AcceptIndirect");
  EXPECT_EQ(line_value(r.out, "R"), "0.000000");
}

TEST_F(CliTest, DecideDecline) {
  const CliRun r = run({"decide", "--t", "0.9", "--a", "0.1", "--b", "0.1", "--var",
                     "0.01", "--appetite", "0"});
  EXPECT_EQ(r.code, cli::kExitDecline);
  EXPECT_EQ(line_value(r.out, "decision"), "Decline");
  EXPECT_EQ(line_value(r.out, "C"), "0.042857");
  EXPECT_EQ(line_value(r.out, "R"), "0.857143");
}

TEST_F(CliTest, DecideAcceptWithRisk) {
  const CliRun r = run({"decide", "--t", "0.7148", "--a", "0.6844", "--b", "0.0445",
                     "--appetite", "0.2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(line_value(r.out, "decision"), "AcceptWithRisk");
  EXPECT_EQ(line_value(r.out, "R"), "0.108753");
}

TEST_F(CliTest, DecideAverageMethod) {
  const CliRun r = run({"decide", "--t", "0.7148", "--a", "0.6844", "--b", "0.0445",
                     "--method", "average"});
  EXPECT_EQ(r.code, cli::kExitDecline);
  EXPECT_EQ(line_value(r.out, "C"), "0.364450");
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kExitError);
  EXPECT_EQ(run({"fuse", "--a", "0.5"}).code, cli::kExitError);
  EXPECT_EQ(run({"decide", "--t", "1.5", "--a", "0.1", "--b", "0.1"}).code,
            cli::kExitError);
  EXPECT_EQ(run({"decide", "--t", "0.5", "--a", "0.1", "--b", "0.1", "--method",
                 "traditional"})
                .code,
            cli::kExitError);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, EnvironmentOverridesDefaultVariance) {
  setenv(cli::kVarianceEnv, "0.05", 1);
  const CliRun r = run({"fuse", "--a", "0.5", "--b", "0.5"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(line_value(r.out, "alpha_A"), "2.000000");
  // explicit flag still wins
  const CliRun flag = run({"fuse", "--a", "0.5", "--b", "0.5", "--var", "1"});
  EXPECT_EQ(flag.code, cli::kExitError);

  setenv(cli::kVarianceEnv, "lots", 1);
  const CliRun bad = run({"fuse", "--a", "0.5", "--b", "0.5"});
  EXPECT_EQ(bad.code, cli::kExitError);
  EXPECT_NE(bad.err.find(cli::kVarianceEnv), std::string::npos);
}

TEST_F(CliTest, SimulateIsDeterministic) {
  const std::vector<std::string> base = {"simulate", "--nodes", "15", "--seed",
                                         "42", "--edge-prob", "0.3", "--out"};
  auto a_args = base, b_args = base;
  a_args.push_back((dir_ / "a").string());
  b_args.push_back((dir_ / "b").string());
  const CliRun a = run(a_args);
  const CliRun b = run(b_args);
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.err, b.err);
  for (const char* f : {"matrices.csv", "risk_series.csv", "network.json"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / f)) << f;
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  EXPECT_EQ(line_value(a.out, "nodes"), "15");

  // the written network reloads and reproduces the same matrices
  const CliRun again = run({"simulate", "--network",
                         (dir_ / "a" / "network.json").string(), "--out",
                         (dir_ / "c").string()});
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(slurp(dir_ / "a" / "matrices.csv"),
            slurp(dir_ / "c" / "matrices.csv"));
}

TEST_F(CliTest, SimulateRejectsSingleNode) {
  const CliRun r = run({"simulate", "--nodes", "1", "--out", dir_.string()});
  EXPECT_EQ(r.code, cli::kExitError);
  EXPECT_NE(r.err.find("at least 2 nodes"), std::string::npos) << r.err;
}

TEST_F(CliTest, SimulateTable1) {
  const CliRun r = run({"simulate", "--nodes", "3", "--table1", "--out",
                     dir_.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const MatrixDocument doc = parse_matrix_document(slurp(dir_ / "matrices.csv"));
  const AssessmentResult ref = run_assessment(fixture_three_node());
  EXPECT_EQ(doc.t, ref.t);
  EXPECT_EQ(doc.a, ref.a);
  EXPECT_EQ(doc.b, ref.b);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const bool nonzero = (i == 0 && j == 2) || (i == 2 && j == 0);
      EXPECT_EQ(doc.r(i, j) != 0.0, nonzero) << i << "," << j;
    }
  }
  EXPECT_EQ(run({"simulate", "--nodes", "4", "--table1", "--out",
                 dir_.string()})
                .code,
            cli::kExitError);
}

TEST_F(CliTest, SimulateReportsFailedEdgesWithoutAborting) {
  fs::create_directories(dir_);
  const auto net_path = dir_ / "net.json";
  std::ofstream(net_path) << R"({"schema_version": 1, "nodes": ["x", "y", "z"],
    "edges": [
      {"from": "x", "to": "y", "required": 0.9, "direct_mean": 0.5,
       "direct_variance": 0.3, "indirect_mean": 0.5},
      {"from": "y", "to": "z", "required": 0.9, "direct_mean": 0.5,
       "indirect_mean": 0.5}]})";
  const CliRun r = run({"simulate", "--network", net_path.string(), "--appetite",
                     "0.5", "--out", (dir_ / "out").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("edge x->y"), std::string::npos) << r.err;
  EXPECT_EQ(line_value(r.out, "failed"), "1");
  EXPECT_EQ(line_value(r.out, "AcceptWithRisk"), "1");
}

TEST_F(CliTest, ReproduceTable1BothMethods) {
  const CliRun beta = run({"reproduce-table1", "--method", "beta"});
  const CliRun avg = run({"reproduce-table1", "--method", "average"});
  ASSERT_EQ(beta.code, 0) << beta.err;
  ASSERT_EQ(avg.code, 0) << avg.err;
  EXPECT_NE(beta.out.find("# variance: direct=0.0100 indirect=0.0100"),
            std::string::npos);
  EXPECT_EQ(avg.out.find("# variance"), std::string::npos);

  const MatrixDocument b = parse_matrix_document(beta.out);
  const MatrixDocument a = parse_matrix_document(avg.out);
  EXPECT_NEAR(a.c(0, 2), 0.36445, 5e-5);
  EXPECT_NEAR(a.c(2, 0), 0.46215, 5e-5);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(a.c(i, j) == 0, b.c(i, j) == 0);
      EXPECT_EQ(a.r(i, j) == 0, b.r(i, j) == 0);
      if (i != j && b.c(i, j) != 0) {
        EXPECT_NEAR(b.r(i, j), std::max(0.0, b.t(i, j) - b.c(i, j)), 1e-4);
      }
    }
  }

  // T, A and B sections are byte-identical across methods and to the
  // fixture rendering.
  auto sections_tab = [](const std::string& text) {
    return text.substr(text.find("[T]"), text.find("[C]") - text.find("[T]"));
  };
  EXPECT_EQ(sections_tab(beta.out), sections_tab(avg.out));
  const AssessmentResult ref = run_assessment(fixture_three_node());
  EXPECT_EQ(sections_tab(beta.out),
            sections_tab(render_matrix_document(
                to_matrix_document(ref, default_labels(3)))));
}

TEST_F(CliTest, ReproduceTable1MatchesGolden) {
  const CliRun r = run({"reproduce-table1"});
  EXPECT_EQ(r.out, slurp(std::string(BETARISK_GOLDEN_DIR) + "/table1_beta.txt"));
}

TEST_F(CliTest, IdenticalArgumentsIdenticalOutput) {
  const std::vector<std::string> args = {"decide", "--t", "0.8", "--a", "0.3",
                                         "--b", "0.4", "--appetite", "0.5"};
  EXPECT_EQ(run(args).out, run(args).out);
}

}  // namespace
}  // namespace betarisk
