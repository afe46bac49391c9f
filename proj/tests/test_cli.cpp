#include "json.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

Outcome cli(const std::string& args, const std::string& env = "") {
  std::string cmd = env + " " + MODSMT_CLI_PATH + " " + args + " 2>/dev/null";
  Outcome r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string sample(const std::string& name) { return std::string(MODSMT_SAMPLES_DIR) + "/" + name; }

}  // namespace

TEST(Cli, SolveVerdictsAndExitCodes) {
  Outcome sat = cli("solve --input " + sample("quadratic_sat.smt2"));
  EXPECT_EQ(sat.code, 0);
  EXPECT_EQ(sat.out.rfind("sat\n(model (define-fun x () (_ BitVec 3) (_ bv", 0), 0u) << sat.out;

  Outcome unsat = cli("solve --input " + sample("quadratic_unsat.smt2"));
  EXPECT_EQ(unsat.code, 0);
  EXPECT_EQ(unsat.out, "unsat\n");

  Outcome bad = cli("solve --input " + sample("bad_operator.smt2"));
  EXPECT_EQ(bad.code, 2);

  EXPECT_EQ(cli("solve --input /nonexistent.smt2").code, 2);
  EXPECT_EQ(cli("solve --bogus").code, 2);
}

TEST(Cli, BudgetGivesUnknown) {
  fs::path dir = fs::temp_directory_path() / "modsmt_cli_budget";
  fs::create_directories(dir);
  std::ofstream(dir / "hard.smt2") << "(declare-const x (_ BitVec 16))(declare-const y (_ BitVec 16))\n"
                                      "(assert (= (bvadd (bvmul x x y) (bvmul y y)) (_ bv12345 16)))\n";
  const std::string f = (dir / "hard.smt2").string();
  Outcome r = cli("solve --input " + f + " --budget 1");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.out, "unknown\n");
  EXPECT_EQ(cli("solve --input " + f, "MODSMT_BUDGET=1").code, 1);
  EXPECT_EQ(cli("solve --input " + f).code, 0);
}

TEST(Cli, JsonAndBatch) {
  Outcome r = cli("solve --json --input " + sample("linear_unsat.smt2"));
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["status"], "unsat");
  EXPECT_EQ(j["width"], 8);

  Outcome e = cli("solve --json --input " + sample("bad_operator.smt2"));
  auto je = nlohmann::json::parse(e.out);
  EXPECT_EQ(je["status"], "error");
  EXPECT_EQ(je["diagnostic"]["code"], "E_UNSUPPORTED");
  EXPECT_EQ(je["diagnostic"]["line"], 3);

  Outcome b = cli("solve --json --jobs 3 --dir " + std::string(MODSMT_SAMPLES_DIR));
  EXPECT_EQ(b.code, 2);
  auto all = nlohmann::json::parse(b.out);
  ASSERT_EQ(all.size(), 5u);
  EXPECT_EQ(all[0]["file"], "bad_operator.smt2");
  EXPECT_EQ(all[1]["status"], "unsat");
  EXPECT_EQ(all[2]["status"], "sat");
  EXPECT_EQ(all[3]["status"], "sat");
  EXPECT_EQ(all[4]["status"], "unsat");

  Outcome o = cli("solve --order lex --input " + sample("mixed_sat.smt2"));
  EXPECT_EQ(o.code, 0);
  EXPECT_EQ(o.out.rfind("sat\n", 0), 0u);
}

TEST(Cli, Groebner) {
  Outcome r = cli("gb --input " + sample("ideal.gb") + " --order grevlex");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "x^2 - 2\n2*x*y\n4*y\n");
  EXPECT_EQ(cli("gb --input " + sample("ideal.gb") + " --order lex").code, 0);
}

TEST(Cli, Invgen) {
  fs::path dir = fs::temp_directory_path() / "modsmt_cli_queries";
  fs::remove_all(dir);
  Outcome r = cli("invgen --input " + sample("example1.loop") + " --degree 1 --emit-queries " + dir.string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("invariant mu=1: x - y + 8 = 0\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("verdict: unknown\n"), std::string::npos);
  ASSERT_TRUE(fs::exists(dir / "verification.smt2"));
  std::ifstream q(dir / "verification.smt2");
  std::stringstream ss;
  ss << q.rdbuf();
  EXPECT_NE(ss.str().find("(check-sat)"), std::string::npos);

  Outcome v = cli("invgen --input " + sample("equational.loop") + " --degree 1");
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("verdict: verified\n"), std::string::npos) << v.out;

  Outcome m = cli("invgen --json --input " + sample("relaxed.loop") + " --degree 1 --mu 1");
  auto j = nlohmann::json::parse(m.out);
  EXPECT_EQ(j["verdict"], "unknown");
  ASSERT_EQ(j["invariants"].size(), 1u);
  EXPECT_EQ(j["invariants"][0]["form"], "initial_value");
  EXPECT_EQ(j["invariants"][0]["poly"], "x - y - x_0 + y_0");

  EXPECT_EQ(cli("invgen --input " + sample("example1.loop") + " --degree 0").code, 2);
}

TEST(Cli, InverseBench) {
  Outcome r = cli("inverse-bench --d 64 --a-max 15 --algo all");
  EXPECT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "a,d,algo,arith_ops,bin_ops,micros");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
  }
  EXPECT_EQ(rows, 7 * 3);
}
