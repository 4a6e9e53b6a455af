#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ergoloop/dynamics.hpp"
#include "ergoloop/run.hpp"

using namespace ergoloop;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "ergoloop_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Exit status of the installed binary, output discarded.
int cli(const std::string& args) {
  const std::string cmd = std::string(ERGOLOOP_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("flags parse into the config") {
  const ParseOutcome p = parse_config({"demo", "furstenberg", "--beta", "sqrt2m1", "--N", "1000"});
  REQUIRE(p.config);
  CHECK(p.config->command == Command::kDemo);
  CHECK(p.config->N == 1000);
  CHECK(p.config->beta == doctest::Approx(kSqrt2m1));
  const ParseOutcome r = parse_config({"construct", "--r", "2/6", "--alpha", "1/8"});
  REQUIRE(r.config);
  CHECK(r.config->r == Rational(1, 3));
  CHECK(r.config->alpha == 0.125);

  for (const std::vector<std::string>& bad :
       {std::vector<std::string>{"demo", "--bogus", "1"}, {"demo", "--N", "0"}, {}, {"shorten", "--Ns", "10,x"},
        {"cover", "--verify-only"}, {"demo", "moon"}, {"demo", "--alpha", "pi"}}) {
    const ParseOutcome o = parse_config(bad);
    CHECK_FALSE(o.config);
    CHECK(o.exit_code == 1);
  }
}

TEST_CASE("help documents the CSV columns") {
  const ParseOutcome h = parse_config({"--help"});
  CHECK_FALSE(h.config);
  CHECK(h.exit_code == 0);
  for (const char* col : {"ell_N", "oracle_bound", "m_i", "lemma31A_bound", "count", "required", "J_abs", "deviation"})
    CHECK(h.message.find(col) != std::string::npos);
}

TEST_CASE("config file values yield to flags") {
  const fs::path cfg = scratch() / "run.conf";
  std::ofstream(cfg) << "eps = 0.05\nr = 1/4\nN = 77\n";
  const ParseOutcome p = parse_config({"construct", "--config", cfg.string(), "--N", "12"});
  REQUIRE(p.config);
  CHECK(p.config->eps == 0.05);
  CHECK(p.config->r == Rational(1, 4));
  CHECK(p.config->N == 12);

  const fs::path bad = scratch() / "bad.conf";
  std::ofstream(bad) << "epsilon = 0.05\n";
  const ParseOutcome q = parse_config({"construct", "--config", bad.string()});
  CHECK_FALSE(q.config);
  CHECK(q.exit_code == 1);
}

TEST_CASE("runs are deterministic under a seed") {
  auto metrics = [](std::uint64_t seed) {
    ExperimentConfig c = *parse_config({"average", "--res-y1", "8", "--res-y2", "8", "--fields", "2"}).config;
    c.seed = seed;
    c.report_path = (scratch() / "avg.json").string();
    return run(c).json["metrics"].dump();
  };
  CHECK(metrics(3) == metrics(3));
  CHECK(metrics(3) != metrics(4));
}

TEST_CASE("shorten writes a CSV within the oracle") {
  const fs::path csv = scratch() / "shorten.csv";
  ExperimentConfig c = *parse_config({"shorten", "--res-t", "16", "--res-y1", "16", "--res-y2", "16", "--Ns", "1,10,100",
                                      "--csv", csv.string(), "--report", (scratch() / "s.json").string()})
                            .config;
  const RunReport rep = run(c);
  CHECK(rep.exit_code == 0);
  const auto rows = read_csv(csv);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"N", "ell_N", "oracle_bound"});
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][1]) <= std::stod(rows[i][2]) + 1e-9);
}

TEST_CASE("every command writes its CSV header") {
  const std::vector<std::pair<std::vector<std::string>, std::string>> cases{
      {{"average", "--res-y1", "8", "--res-y2", "8"}, "i,m_i,lemma31A_bound,field"},
      {{"cover", "--res-y1", "8", "--res-y2", "8", "--a-size", "5"}, "cell,count,required"},
      {{"construct", "--res-t", "8", "--res-y1", "8", "--res-y2", "8"}, "i,J_abs,J_bound"},
      {{"diagnose", "--res-t", "16", "--res-y1", "8", "--res-y2", "8", "--r", "1/4", "--budget", "20000"}, "N,deviation"}};
  for (const auto& [args, header] : cases) {
    std::vector<std::string> a = args;
    const fs::path csv = scratch() / (a.front() + ".csv");
    a.insert(a.end(), {"--csv", csv.string(), "--report", (scratch() / "r.json").string()});
    const RunReport rep = run(*parse_config(a).config);
    INFO(a.front() << " " << rep.json["verdicts"].dump());
    CHECK(rep.exit_code == 0);
    CHECK(slurp(csv).rfind(header + "\n", 0) == 0);
  }
}

TEST_CASE("binary exit codes") {
  const fs::path fam = scratch() / "family.json", out = scratch() / "out.json";
  CHECK(cli("--help") == 0);
  CHECK(cli("demo --bogus") == 1);
  CHECK(cli("demo furstenberg --res-t 8 --res-y1 8 --res-y2 8 --N 100 --report " + out.string()) == 0);
  CHECK(cli("cover --res-y1 8 --res-y2 8 --a-size 6 --emit-family " + fam.string() + " --report " + out.string()) == 0);
  CHECK(cli("cover --verify-only --family " + fam.string() + " --report " + out.string()) == 0);
  CHECK(nlohmann::json::parse(slurp(out))["all_pass"] == true);

  // Dropping every member but one breaks the covering inequality.
  nlohmann::json j = nlohmann::json::parse(slurp(fam));
  j["members"] = nlohmann::json::array({j["members"][0]});
  j["weights"] = nlohmann::json::array({1});
  const fs::path broken = scratch() / "broken.json";
  std::ofstream(broken) << j.dump();
  CHECK(cli("cover --verify-only --family " + broken.string() + " --report " + out.string()) == 2);
  CHECK(nlohmann::json::parse(slurp(out))["all_pass"] == false);
  CHECK(cli("cover --verify-only --family " + (scratch() / "missing.json").string()) == 1);
}
