#include "ergoloop/config.hpp"

#include <CLI11.hpp>

#include <sstream>

#include "ergoloop/dynamics.hpp"

namespace ergoloop {

namespace {

const char* kFooter = R"(CSV output (--csv FILE, header row always written):
  shorten:   N, ell_N, oracle_bound
             N = iterate count; ell_N = length(F_N)/N on the grid;
             oracle_bound = closed-form geometric-sum value (empty if none)
  average:   i, m_i, lemma31A_bound, field
             i = flattening step; m_i = max of the averaged field;
             lemma31A_bound = m_{i-1}(1 - m_{i-1}/c), the contraction bound
             for m_i (m_0 on row 0); field = index of the random field
  cover:     cell, count, required
             count = nu(y) of the family; required = N|A|/(c1|A| + c2|Y|)
  construct: i, J_abs, J_bound
             sup_y |J_i| for q_i = i/M and the bound eps/(3M)
  diagnose:  N, deviation
             running uniform Birkhoff deviation of cos(2 pi y2)

Config file: flat "key = value" lines using the long flag names
(e.g. "eps = 0.05", "r = 1/3", "alpha = golden"). Flags override the file.
Constants: golden, sqrt2m1, p/q or decimals.
Exit codes: 0 all verdicts pass, 2 a verdict failed, 1 usage or runtime error.)";

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw CLI::ValidationError("Ns", "not an integer list: " + text);
    }
    if (used != item.size() && item.find_first_not_of(" ", used) != std::string::npos)
      throw CLI::ValidationError("Ns", "not an integer list: " + text);
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("Ns", "empty list");
  return out;
}

}  // namespace

std::string command_name(Command c) {
  switch (c) {
    case Command::kDemo: return "demo";
    case Command::kShorten: return "shorten";
    case Command::kAverage: return "average";
    case Command::kCover: return "cover";
    case Command::kConstruct: return "construct";
    case Command::kDiagnose: return "diagnose";
  }
  return "?";
}

double parse_constant(const std::string& text) {
  if (text == "golden") return kGolden;
  if (text == "sqrt2m1") return kSqrt2m1;
  if (text.find('/') != std::string::npos) return Rational::parse(text).value();
  std::size_t used = 0;
  const double v = std::stod(text, &used);
  if (used != text.size()) throw PreconditionError("not a constant: " + text);
  return v;
}

ParseOutcome parse_config(int argc, const char* const* argv) {
  ExperimentConfig cfg;
  CLI::App app{"ergoloop: skew products, loop shortening, averaging and covering experiments"};
  app.footer(kFooter);
  app.set_config("--config", "", "flat key = value file");
  app.allow_config_extras(false);
  app.require_subcommand(1, 1);

  std::string Ns_text = "10,100,1000", r_text = "1/3";
  app.add_option("--res-t", cfg.res_t, "time resolution")->capture_default_str();
  app.add_option("--res-y1", cfg.res_y1, "fiber resolution along y1")->capture_default_str();
  app.add_option("--res-y2", cfg.res_y2, "fiber resolution along y2")->capture_default_str();
  app.add_option("--alpha", cfg.alpha_name, "base rotation (golden, sqrt2m1, p/q, decimal)")->capture_default_str();
  app.add_option("--beta", cfg.beta_name, "fiber translation of the Furstenberg loop")->capture_default_str();
  app.add_option("--N", cfg.N, "iterate count")->capture_default_str();
  app.add_option("--Ns", Ns_text, "comma separated iterate counts (shorten)")->capture_default_str();
  app.add_option("--eps", cfg.eps, "accuracy for construct and diagnose")->capture_default_str();
  app.add_option("--target", cfg.target, "flattening target (average)")->capture_default_str();
  app.add_option("--max-iter", cfg.max_iter, "iteration budget")->capture_default_str();
  app.add_option("--budget", cfg.budget, "search or step budget")->capture_default_str();
  app.add_option("--fields", cfg.fields, "number of random fields (average)")->capture_default_str();
  app.add_option("--a-size", cfg.a_size, "cells in the random set A (cover)")->capture_default_str();
  app.add_option("--charts", cfg.charts, "number of strip charts r (cover)")->capture_default_str();
  app.add_option("--r", r_text, "rational period of the constructed loop")->capture_default_str();
  app.add_option("--seed", cfg.seed, "seed for every random choice")->capture_default_str();
  app.add_option("--report", cfg.report_path, "JSON report path (stdout when empty)");
  app.add_option("--csv", cfg.csv_path, "CSV series path");

  auto* demo = app.add_subcommand("demo", "normalized length of F_N for one N");
  demo->add_option("system", cfg.system, "furstenberg or identity")->check(CLI::IsMember({"furstenberg", "identity"}));
  auto* shorten = app.add_subcommand("shorten", "ell_N series against the geometric-sum oracle");
  auto* average = app.add_subcommand("average", "flattening of random zero-mean fields");
  auto* cover = app.add_subcommand("cover", "covering family for a random set A on the torus lattice");
  cover->add_flag("--verify-only", cfg.verify_only, "only verify the family fixture given by --family");
  cover->add_option("--family", cfg.family_path, "JSON family fixture");
  cover->add_option("--emit-family", cfg.emit_family_path, "write the built family as a JSON fixture");
  auto* construct = app.add_subcommand("construct", "periodic loop with small time integrals");
  auto* diagnose = app.add_subcommand("diagnose", "minimality and unique ergodicity certificates");
  for (auto* s : {demo, shorten, average, cover, construct, diagnose}) s->fallthrough();

  try {
    app.parse(argc, argv);
    if (demo->parsed()) cfg.command = Command::kDemo;
    if (shorten->parsed()) cfg.command = Command::kShorten;
    if (average->parsed()) cfg.command = Command::kAverage;
    if (cover->parsed()) cfg.command = Command::kCover;
    if (construct->parsed()) cfg.command = Command::kConstruct;
    if (diagnose->parsed()) cfg.command = Command::kDiagnose;

    cfg.Ns = parse_int_list(Ns_text);
    try {
      cfg.r = Rational::parse(r_text);
      cfg.alpha = parse_constant(cfg.alpha_name);
      cfg.beta = parse_constant(cfg.beta_name);
    } catch (const std::exception& e) {
      throw CLI::ValidationError("constant", e.what());
    }
    auto positive = [](bool ok, const std::string& name) {
      if (!ok) throw CLI::ValidationError(name, "must be positive");
    };
    positive(cfg.res_t >= 2 && cfg.res_y1 >= 2 && cfg.res_y2 >= 2, "resolutions (>= 2)");
    positive(cfg.N >= 1, "N");
    for (int v : cfg.Ns) positive(v >= 1, "Ns");
    positive(cfg.eps > 0, "eps");
    positive(cfg.target > 0, "target");
    positive(cfg.max_iter >= 1, "max-iter");
    positive(cfg.budget >= 1, "budget");
    positive(cfg.fields >= 1, "fields");
    positive(cfg.a_size >= 1, "a-size");
    positive(cfg.charts >= 1, "charts");
    positive(cfg.r.den >= 1, "r");
    if (cfg.verify_only && cfg.family_path.empty()) throw CLI::ValidationError("--verify-only", "needs --family");
  } catch (const CLI::Error& e) {
    std::ostringstream out, err;
    const int code = app.exit(e, out, err);
    ParseOutcome res;
    res.exit_code = code == 0 ? 0 : 1;
    res.message = out.str() + err.str();
    if (code != 0) res.message += "\n" + app.help();
    return res;
  }
  return {cfg, 0, ""};
}

ParseOutcome parse_config(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"ergoloop"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return parse_config(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ergoloop
