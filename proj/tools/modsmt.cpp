// modsmt: batch front end for the solver, the Groebner basis engine and the
// invariant generator.

#include "modsmt/frontend.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace modsmt;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

OrderKind order_of(const std::string& s) { return s == "lex" ? OrderKind::lex : OrderKind::grevlex_graded; }

struct Outcome {
  int code = 2;
  std::string out, err;
  nlohmann::json json;
};

Outcome solve_file(const std::string& path, const SolveOptions& opt) {
  Outcome o;
  std::string text;
  try {
    text = slurp(path);
  } catch (const std::exception& e) {
    o.err = std::string("error: ") + e.what();
    o.json = {{"status", "error"}, {"message", e.what()}};
    return o;
  }
  try {
    Problem p = parse_smt2(text);
    Verdict v = solve(p, opt);
    o.code = exit_code(v.status);
    o.out = print_verdict(v, p);
    if (v.status == Status::unknown) o.err = "reason: " + v.reason;
    o.json = verdict_json(v, p);
  } catch (const FrontendError& e) {
    o.err = path + ":" + e.diagnostic().str();
    o.json = error_json(e.diagnostic());
  } catch (const std::exception& e) {
    o.err = std::string("error: ") + e.what();
    o.json = {{"status", "error"}, {"message", e.what()}};
  }
  return o;
}

int run_solve(const std::string& input, const std::string& dir, const SolveOptions& opt, bool json, unsigned jobs) {
  if (dir.empty()) {
    Outcome o = solve_file(input, opt);
    if (json)
      std::cout << o.json.dump() << "\n";
    else if (!o.out.empty())
      std::cout << o.out << "\n";
    if (!o.err.empty()) std::cerr << o.err << "\n";
    return o.code;
  }

  std::vector<std::string> files;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec))
    if (e.is_regular_file() && e.path().extension() == ".smt2") files.push_back(e.path().string());
  if (ec) {
    std::cerr << "error: cannot list " << dir << ": " << ec.message() << "\n";
    return 2;
  }
  std::sort(files.begin(), files.end());

  std::vector<Outcome> results(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < files.size();) results[i] = solve_file(files[i], opt);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::max(1u, jobs); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int code = 0;
  nlohmann::json all = nlohmann::json::array();
  for (std::size_t i = 0; i < files.size(); ++i) {
    const Outcome& o = results[i];
    code = std::max(code, o.code);
    const std::string name = fs::path(files[i]).filename().string();
    if (json) {
      nlohmann::json j = o.json;
      j["file"] = name;
      all.push_back(j);
    } else {
      std::cout << "; " << name << "\n";
      if (!o.out.empty()) std::cout << o.out << "\n";
    }
    if (!o.err.empty()) std::cerr << name << ": " << o.err << "\n";
  }
  if (json) std::cout << all.dump() << "\n";
  return code;
}

int run_gb(const std::string& input, const std::string& order) {
  GbInput in = parse_gb_input(slurp(input), order_of(order));
  GroebnerBasis G = strong_groebner(in.polys);
  for (const auto& g : G.gens) std::cout << to_string(g) << "\n";
  return 0;
}

int run_invgen_cmd(const std::string& input, unsigned degree, const std::vector<int>& mus, const std::string& emit, bool json) {
  LoopProblem L = parse_loop(slurp(input));
  InvgenOptions opt;
  opt.mus = mus;
  InvariantResult r = run_invgen(L, degree, opt);

  std::vector<std::string> paths;
  if (!emit.empty()) {
    fs::create_directories(emit);
    for (const auto& q : r.queries) {
      fs::path p = fs::path(emit) / (q.name + ".smt2");
      std::ofstream(p) << q.text;
      paths.push_back(p.string());
    }
  }
  if (json) {
    nlohmann::json j;
    j["verdict"] = to_string(r.verdict);
    j["invariants"] = nlohmann::json::array();
    for (const auto& inv : r.invariants)
      j["invariants"].push_back({{"mu", inv.mu},
                                 {"poly", to_string(inv.poly)},
                                 {"form", inv.form == InvariantForm::concrete ? "concrete" : "initial_value"},
                                 {"initiation_proved", inv.initiation_proved}});
    j["queries"] = nlohmann::json::array();
    for (std::size_t i = 0; i < r.queries.size(); ++i) {
      const auto& q = r.queries[i];
      nlohmann::json e = {{"name", q.name}, {"equational", q.equational}};
      e["result"] = q.result ? nlohmann::json(to_string(*q.result)) : nlohmann::json(nullptr);
      if (i < paths.size()) e["path"] = paths[i];
      j["queries"].push_back(e);
    }
    std::cout << j.dump() << "\n";
  } else {
    std::cout << print_invgen(r, L);
    for (std::size_t i = 0; i < r.queries.size(); ++i) {
      std::cout << "query " << r.queries[i].name << ": ";
      std::cout << (r.queries[i].result ? to_string(*r.queries[i].result) : "external");
      if (i < paths.size()) std::cout << " " << paths[i];
      std::cout << "\n";
    }
  }
  return r.verdict == InvVerdict::unknown ? 1 : 0;
}

int run_inverse_bench(unsigned d, std::uint64_t a_max, const std::string& algo) {
  std::vector<std::string> algos;
  if (algo == "all")
    algos = {"euclid", "hensel", "small"};
  else
    algos = {algo};
  std::cout << "a,d,algo,arith_ops,bin_ops,micros\n";
  for (std::uint64_t a = 3; a <= a_max; a += 2) {
    ResidueInt x(BigInt(a), d);
    for (const auto& name : algos) {
      OpCounter c;
      auto t0 = std::chrono::steady_clock::now();
      ResidueInt r = name == "euclid" ? inv_euclid(x, &c) : name == "hensel" ? inv_hensel(x, &c) : inv_small(x, c);
      auto us = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - t0).count();
      if (!(r * x).is_one()) throw std::logic_error("inverse check failed");
      std::cout << a << "," << d << "," << name << "," << c.arith_ops << "," << c.bin_ops << "," << us << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"modsmt: bit-vector equations via strong Groebner bases over Z/2^d"};
  app.require_subcommand(1);

  std::string input, dir, order = "grevlex", emit, algo = "all", mu_list = "-1,0,1";
  std::size_t budget = SearchOptions{}.node_budget;
  unsigned degree = 1, jobs = std::max(1u, std::thread::hardware_concurrency()), width = 64;
  std::uint64_t a_max = 255;
  bool json = false;

  if (const char* env = std::getenv("MODSMT_BUDGET")) {
    try {
      budget = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "error: MODSMT_BUDGET is not a number\n";
      return 2;
    }
  }

  auto* solve_cmd = app.add_subcommand("solve", "decide an SMT-LIB2 QF_BV script");
  auto* in_opt = solve_cmd->add_option("--input", input, "input .smt2 file");
  auto* dir_opt = solve_cmd->add_option("--dir", dir, "solve every .smt2 file in a directory");
  in_opt->excludes(dir_opt);
  solve_cmd->add_option("--budget", budget, "search node budget");
  solve_cmd->add_option("--order", order)->check(CLI::IsMember({"lex", "grevlex"}));
  solve_cmd->add_option("--jobs", jobs, "worker threads for --dir")->check(CLI::PositiveNumber);
  solve_cmd->add_flag("--json", json);

  auto* gb_cmd = app.add_subcommand("gb", "strong Groebner basis of a polynomial list");
  gb_cmd->add_option("--input", input)->required();
  gb_cmd->add_option("--order", order)->check(CLI::IsMember({"lex", "grevlex"}));

  auto* inv_cmd = app.add_subcommand("invgen", "polynomial invariants of a loop");
  inv_cmd->add_option("--input", input)->required();
  inv_cmd->add_option("--degree", degree)->required()->check(CLI::PositiveNumber);
  inv_cmd->add_option("--mu", mu_list, "comma separated multipliers");
  inv_cmd->add_option("--emit-queries", emit, "directory for SMT-LIB2 queries");
  inv_cmd->add_flag("--json", json);

  auto* bench_cmd = app.add_subcommand("inverse-bench", "operation counts of the inverse algorithms");
  bench_cmd->add_option("--d", width)->required()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--a-max", a_max)->required();
  bench_cmd->add_option("--algo", algo)->check(CLI::IsMember({"euclid", "hensel", "small", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*solve_cmd) {
      if (input.empty() && dir.empty()) {
        std::cerr << "error: solve needs --input or --dir\n";
        return 2;
      }
      SolveOptions opt;
      opt.order = order_of(order);
      opt.search.node_budget = budget;
      return run_solve(input, dir, opt, json, jobs);
    }
    if (*gb_cmd) return run_gb(input, order);
    if (*inv_cmd) {
      std::vector<int> mus;
      std::stringstream ss(mu_list);
      for (std::string tok; std::getline(ss, tok, ',');) mus.push_back(std::stoi(tok));
      return run_invgen_cmd(input, degree, mus, emit, json);
    }
    if (*bench_cmd) return run_inverse_bench(width, a_max, algo);
  } catch (const FrontendError& e) {
    if (json)
      std::cout << error_json(e.diagnostic()).dump() << "\n";
    std::cerr << input << ":" << e.diagnostic().str() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
