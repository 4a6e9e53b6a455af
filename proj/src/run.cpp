#include "ergoloop/run.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ergoloop/construct.hpp"
#include "ergoloop/shortening.hpp"

namespace ergoloop {

using nlohmann::ordered_json;

namespace {

class Csv {
 public:
  Csv(const std::string& path, const std::vector<std::string>& header) {
    if (path.empty()) return;
    out_.open(path);
    if (!out_) throw Error("cannot open " + path);
    out_ << std::setprecision(17);
    row_strings(header);
  }
  template <typename... Ts>
  void row(const Ts&... values) {
    if (!out_.is_open()) return;
    bool first = true;
    ((out_ << (first ? "" : ",") << values, first = false), ...);
    out_ << '\n';
  }

 private:
  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  std::ofstream out_;
};

struct Verdicts {
  ordered_json list = ordered_json::array();
  bool all = true;

  void add(const std::string& name, const std::string& source, bool pass, double lhs, double rhs) {
    list.push_back({{"name", name}, {"source", source}, {"pass", pass}, {"lhs", lhs}, {"rhs", rhs}});
    all = all && pass;
  }
  void fail(const std::string& name, const std::string& what) {
    list.push_back({{"name", name}, {"source", "construction"}, {"pass", false}, {"error", what}});
    all = false;
  }
};

ordered_json config_echo(const ExperimentConfig& c) {
  return {{"command", command_name(c.command)},
          {"system", c.system},
          {"res_t", c.res_t},
          {"res_y1", c.res_y1},
          {"res_y2", c.res_y2},
          {"alpha", c.alpha_name},
          {"beta", c.beta_name},
          {"N", c.N},
          {"Ns", c.Ns},
          {"eps", c.eps},
          {"target", c.target},
          {"max_iter", c.max_iter},
          {"budget", c.budget},
          {"fields", c.fields},
          {"a_size", c.a_size},
          {"charts", c.charts},
          {"r", c.r.str()},
          {"seed", c.seed},
          {"verify_only", c.verify_only},
          {"family", c.family_path}};
}

SkewProduct system_of(const ExperimentConfig& c) {
  return c.system == "identity" ? identity_system(c.alpha) : furstenberg_system(c.alpha, c.beta);
}

NormalizedHamiltonian cos_y2() { return NormalizedHamiltonian::from_monomial(TrigMonomial{1.0, 0, 0, 1, 0.0}); }

void run_demo(const ExperimentConfig& c, ordered_json& metrics, Verdicts& v) {
  const TorusGrid grid(c.res_t, c.res_y1, c.res_y2);
  const SkewProduct T = system_of(c);
  const NormalizedHamiltonian H = cos_y2();
  const double ell = loop_length(birkhoff_hamiltonian(H, T, c.N), grid) / c.N;
  const double len = loop_length(H, grid);
  metrics["N"] = c.N;
  metrics["ell_N"] = ell;
  metrics["length_H"] = len;
  if (const auto b = geometric_sum_oracle(H, T, c.N)) {
    metrics["oracle_bound"] = *b;
    v.add("ell_N <= geometric-sum value", "shortening mechanism", ell <= *b + 1e-9, ell, *b);
  }
  v.add("ell_N <= length(H)", "triangle inequality", ell <= len + 1e-9, ell, len);
}

void run_shorten(const ExperimentConfig& c, ordered_json& metrics, Verdicts& v) {
  const TorusGrid grid(c.res_t, c.res_y1, c.res_y2);
  const SkewProduct T = system_of(c);
  const ShorteningTrace tr = normalized_length_sequence(cos_y2(), T, c.Ns, grid);
  Csv csv(c.csv_path, {"N", "ell_N", "oracle_bound"});
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < tr.Ns.size(); ++i) {
    ordered_json row{{"N", tr.Ns[i]}, {"ell_N", tr.lengths[i]}};
    if (tr.oracle_bounds) {
      const double b = (*tr.oracle_bounds)[i];
      row["oracle_bound"] = b;
      csv.row(tr.Ns[i], tr.lengths[i], b);
      v.add("ell_N <= oracle_bound + 1e-9 at N=" + std::to_string(tr.Ns[i]), "shortening mechanism",
            tr.lengths[i] <= b + 1e-9, tr.lengths[i], b);
    } else {
      csv.row(tr.Ns[i], tr.lengths[i], "");
    }
    rows.push_back(row);
  }
  metrics["series"] = rows;
}

void run_average(const ExperimentConfig& c, ordered_json& metrics, Verdicts& v) {
  std::mt19937_64 rng(c.seed);
  const CoveringOracle oracle = torus_covering_oracle(c.res_y1, c.res_y2);
  Csv csv(c.csv_path, {"i", "m_i", "lemma31A_bound", "field"});
  ordered_json runs = ordered_json::array();
  for (int f = 0; f < c.fields; ++f) {
    const Eigen::ArrayXd H = random_zero_mean_field(c.res_y1, c.res_y2, rng);
    ordered_json run{{"field", f}};
    try {
      const FlattenResult res = flatten_max(H, oracle, c.target, c.max_iter);
      const FlattenTrace& tr = res.trace;
      bool contraction = true;
      double worst_gap = -1e300;
      for (std::size_t i = 0; i < tr.m.size(); ++i) {
        const double b = i == 0 ? tr.m[0] : tr.bound[i - 1];
        csv.row(i, tr.m[i], b, f);
        if (i > 0) {
          worst_gap = std::max(worst_gap, tr.m[i] - b);
          contraction = contraction && tr.m[i] <= b + 1e-10;
        }
      }
      run["c1"] = tr.c1;
      run["c2"] = tr.c2;
      run["c"] = tr.c;
      run["steps"] = tr.m.size() - 1;
      run["m"] = tr.m;
      v.add("m_{i+1} <= m_i(1 - m_i/c) + 1e-10, field " + std::to_string(f), "contraction lemma", contraction,
            tr.m.size() > 1 ? worst_gap : 0.0, 0.0);
      v.add("max below target, field " + std::to_string(f), "contraction lemma", tr.m.back() < c.target, tr.m.back(),
            c.target);
    } catch (const CertificateError& e) {
      v.fail("flattening step bounds, field " + std::to_string(f), e.what());
    } catch (const BudgetError& e) {
      v.fail("flattening budget, field " + std::to_string(f), e.what());
    }
    runs.push_back(run);
  }
  metrics["runs"] = runs;
}

/// nu(y) from explicit member maps, without the window shortcut.
std::vector<std::int64_t> recount(const CoveringFamily& fam) {
  std::vector<std::int64_t> nu(static_cast<std::size_t>(fam.cells), 0);
  for (std::int64_t j = 0; j < fam.maps.member_count(); ++j) {
    const CellPermutation g = fam.maps.member(j);
    for (int a : fam.source) nu[g(a)] += fam.maps.weight(j);
  }
  for (std::size_t m = 0; m < fam.images.size(); ++m)
    for (int y : fam.images[m]) nu[y] += m < fam.image_weights.size() ? fam.image_weights[m] : 1;
  return nu;
}

void report_covering(const ExperimentConfig& c, const CoveringVerdict& cv, const std::vector<std::int64_t>& independent,
                     std::int64_t A_size, double c1, double c2, ordered_json& metrics, Verdicts& v) {
  const double Y = static_cast<double>(cv.counts.size());
  metrics["N"] = cv.N;
  metrics["A_size"] = A_size;
  metrics["c1"] = c1;
  metrics["c2"] = c2;
  metrics["worst_cell"] = cv.worst_cell;
  metrics["worst_count"] = cv.worst_count;
  metrics["worst_ratio"] = cv.worst_ratio;
  metrics["bound"] = cv.bound;
  Csv csv(c.csv_path, {"cell", "count", "required"});
  const double required = static_cast<double>(cv.N) * A_size / (c1 * A_size + c2 * Y);
  for (std::size_t y = 0; y < cv.counts.size(); ++y) csv.row(y, cv.counts[y], required);
  v.add("nu(y) (c1|A| + c2|Y|) >= N|A| at every cell", "covering property", cv.pass, cv.worst_ratio, cv.bound);
  v.add("independent recount agrees", "covering property", independent == cv.counts, 0.0, 0.0);
}

void run_cover(const ExperimentConfig& c, ordered_json& metrics, Verdicts& v) {
  if (c.verify_only) {
    std::ifstream in(c.family_path);
    if (!in) throw Error("cannot open " + c.family_path);
    const nlohmann::json j = nlohmann::json::parse(in);
    std::vector<int> A;
    double c1 = 0, c2 = 0;
    const CoveringFamily fam = family_from_json(j, A, c1, c2);
    const CoveringVerdict cv = verify_covering(fam, static_cast<std::int64_t>(A.size()), c1, c2);
    report_covering(c, cv, recount_from_json(j), static_cast<std::int64_t>(A.size()), c1, c2, metrics, v);
    return;
  }
  const Lattice lattice{c.res_y1, c.res_y2, true};
  if (c.a_size > lattice.size()) throw PreconditionError("a-size exceeds the lattice");
  std::mt19937_64 rng(c.seed);
  std::vector<int> cells(static_cast<std::size_t>(lattice.size()));
  std::iota(cells.begin(), cells.end(), 0);
  for (int i = 0; i < c.a_size; ++i) {
    std::uniform_int_distribution<int> pick(i, lattice.size() - 1);
    std::swap(cells[i], cells[pick(rng)]);
  }
  std::vector<int> A(cells.begin(), cells.begin() + c.a_size);
  std::sort(A.begin(), A.end());
  const GlobalCovering g = covering_global(lattice, strip_charts(lattice, c.charts), A);
  metrics["A"] = A;
  metrics["r"] = g.r;
  metrics["refinement"] = g.refinement;
  const CoveringVerdict cv = verify_covering(g.family, static_cast<std::int64_t>(g.family.source.size()), g.c1, g.c2);
  report_covering(c, cv, recount(g.family), static_cast<std::int64_t>(g.family.source.size()), g.c1, g.c2, metrics, v);
  if (!c.emit_family_path.empty()) {
    std::ofstream out(c.emit_family_path);
    if (!out) throw Error("cannot open " + c.emit_family_path);
    out << family_to_json(g.family, g.c1, g.c2).dump(1) << '\n';
  }
}

void run_construct(const ExperimentConfig& c, ordered_json& metrics, Verdicts& v) {
  const TorusGrid grid(c.res_t, c.res_y1, c.res_y2);
  const ScalarField F = fiberwise_center(
      sample([](double t, const Eigen::Vector2d& y) { return std::cos(kTwoPi * (t + y(1))); }, grid, Domain::kProduct));
  try {
    const Property21A res = loop_for_property_21A(F, c.eps, c.r);
    const Property21AReport& rep = res.report;
    metrics["N"] = rep.N;
    metrics["lipschitz"] = rep.lipschitz;
    metrics["M"] = rep.M;
    metrics["res_t"] = rep.res_t;
    metrics["stages"] = rep.stage_count;
    metrics["quadrature_max"] = rep.quadrature_max;
    metrics["error_bar"] = rep.error_bar;
    metrics["recheck_max"] = rep.recheck_max;
    metrics["recheck_method"] = rep.recheck_method;
    metrics["J_sum"] = rep.J_sum;
    Csv csv(c.csv_path, {"i", "J_abs", "J_bound"});
    double J_max = 0;
    for (std::size_t i = 0; i < rep.J_abs.size(); ++i) {
      csv.row(i, rep.J_abs[i], rep.J_bound);
      J_max = std::max(J_max, rep.J_abs[i]);
    }
    double p_max = 0;
    for (double p : rep.p_norms) p_max = std::max(p_max, p);
    v.add("||S F(p_i)|| < eps/9 for all i", "continuity step", p_max < c.eps / 9, p_max, c.eps / 9);
    v.add("|J_i| < eps/(3M) for all i", "change of variables", J_max < rep.J_bound, J_max, rep.J_bound);
    v.add("quadrature + error bar < eps", "loop integral", rep.quadrature_max + rep.error_bar < c.eps,
          rep.quadrature_max + rep.error_bar, c.eps);
    v.add("independent |I(y)| < eps", "loop integral", rep.recheck_max < c.eps, rep.recheck_max, c.eps);
    v.add("g(t + r) = g(t) at all sampled t", "period", rep.period_exact, static_cast<double>(rep.sampled_t), 0.0);
  } catch (const CertificateError& e) {
    v.fail("loop construction", e.what());
  } catch (const BudgetError& e) {
    v.fail("loop construction", e.what());
  }
}

void run_diagnose(const ExperimentConfig& c, ordered_json& metrics, Verdicts& v) {
  const TorusGrid grid(c.res_t, c.res_y1, c.res_y2);
  const int n1 = c.res_y1, n2 = c.res_y2;
  try {
    std::vector<int> delta, V;
    for (int k = 0; k < std::max(1, c.res_t / 4); ++k) delta.push_back(k);
    for (int i = 0; i < std::max(1, n1 / 2); ++i)
      for (int j = 0; j < std::max(1, n2 / 2); ++j) V.push_back(grid.cell_index(i, j));
    const MinimalityConjugator mc = conjugator_for_minimality(grid, delta, V, c.r);
    const MinimalityCertificate cert =
        minimality_certificate(mc, c.alpha, static_cast<int>(std::min<std::int64_t>(c.budget, 1 << 30)));
    metrics["minimality"] = {{"translations", mc.translations.size()},
                             {"lift", mc.lift},
                             {"covered", cert.coverage.covered},
                             {"step", cert.coverage.step},
                             {"reached", cert.coverage.reached}};
    v.add("phi(U) meets every circle", "minimality case", mc.meets_every_circle, 0.0, 0.0);
    v.add("phi commutes with S_r", "minimality case", mc.commutes, 0.0, 0.0);
    v.add("conjugated shift covers every cell", "minimality case", cert.coverage.covered, cert.coverage.step,
          static_cast<double>(c.budget));
    v.add("conjugation identity cellwise", "minimality case", cert.conjugation_identity, cert.checked_steps, 0.0);
  } catch (const Error& e) {
    v.fail("minimality conjugator", e.what());
  }

  try {
    const ScalarField F = sample(cos_y2().value, grid, Domain::kProduct);
    const UniqueErgodicityConjugator uc = conjugator_for_unique_ergodicity(F, c.eps, c.r, translation_averager(n1, n2));
    const ErgodicSumCertificate es = ergodic_sum_certificate(uc, F, c.alpha, c.eps,
                                                             static_cast<int>(std::min<std::int64_t>(c.budget, 100000)));
    metrics["unique_ergodicity"] = {{"integral_max", uc.integral_max}, {"N", es.N}, {"sup_G_N", es.sup}};
    v.add("sup_y |I(y)| < eps/2", "unique ergodicity case", uc.integral_max < c.eps / 2, uc.integral_max, c.eps / 2);
    v.add("||G_N|| < eps for some N", "unique ergodicity case", es.reached, es.sup, c.eps);
  } catch (const Error& e) {
    v.fail("unique ergodicity conjugator", e.what());
  }

  const SkewProduct T = system_of(c);
  Csv csv(c.csv_path, {"N", "deviation"});
  ordered_json series = ordered_json::array();
  for (int N : c.Ns) {
    const double d = birkhoff_uniform_deviation(T, cos_y2().value, N, grid);
    csv.row(N, d);
    series.push_back({{"N", N}, {"deviation", d}});
  }
  metrics["birkhoff_deviation"] = series;
}

}  // namespace

Eigen::ArrayXd random_zero_mean_field(int n1, int n2, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> freq(-4, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<TrigMonomial> terms;
  while (terms.size() < 6) {
    TrigMonomial m{unit(rng), 0, freq(rng), freq(rng), kTwoPi * unit(rng)};
    if (m.k1 != 0 || m.k2 != 0) terms.push_back(m);
  }
  Eigen::ArrayXd H(n1 * n2);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const Eigen::Vector2d y(static_cast<double>(i) / n1, static_cast<double>(j) / n2);
      double s = 0;
      for (const auto& m : terms) s += m(0.0, y);
      H(i * n2 + j) = s;
    }
  H -= H.mean();
  const double sup = H.abs().maxCoeff();
  if (sup > 0) H /= sup;
  H -= H.mean();
  return H;
}

ordered_json family_to_json(const CoveringFamily& family, double c1, double c2) {
  ordered_json members = ordered_json::array();
  std::vector<std::int64_t> weights;
  for (std::int64_t j = 0; j < family.maps.member_count(); ++j) {
    std::vector<int> img = family.maps.member_image(j, family.source);
    std::sort(img.begin(), img.end());
    members.push_back(img);
    weights.push_back(family.maps.weight(j));
  }
  for (std::size_t m = 0; m < family.images.size(); ++m) {
    members.push_back(family.images[m]);
    weights.push_back(m < family.image_weights.size() ? family.image_weights[m] : 1);
  }
  return {{"cells", family.cells}, {"A", family.source}, {"c1", c1}, {"c2", c2}, {"members", members},
          {"weights", weights}};
}

CoveringFamily family_from_json(const nlohmann::json& j, std::vector<int>& A, double& c1, double& c2) {
  CoveringFamily fam;
  fam.cells = j.at("cells").get<int>();
  fam.maps = PermutationFamily(fam.cells);
  A = j.at("A").get<std::vector<int>>();
  fam.source = A;
  c1 = j.at("c1").get<double>();
  c2 = j.at("c2").get<double>();
  fam.images = j.at("members").get<std::vector<std::vector<int>>>();
  if (j.contains("weights"))
    fam.image_weights = j.at("weights").get<std::vector<std::int64_t>>();
  else
    fam.image_weights.assign(fam.images.size(), 1);
  if (fam.image_weights.size() != fam.images.size()) throw PreconditionError("fixture weights do not match members");
  for (const auto& m : fam.images)
    for (int y : m)
      if (y < 0 || y >= fam.cells) throw PreconditionError("fixture member cell outside the lattice");
  return fam;
}

std::vector<std::int64_t> recount_from_json(const nlohmann::json& j) {
  const int cells = j.at("cells").get<int>();
  std::vector<std::int64_t> nu(static_cast<std::size_t>(cells), 0);
  const auto& members = j.at("members");
  for (std::size_t m = 0; m < members.size(); ++m) {
    const std::int64_t w = j.contains("weights") ? j.at("weights")[m].get<std::int64_t>() : 1;
    for (const auto& y : members[m]) nu[y.get<int>()] += w;
  }
  return nu;
}

RunReport run(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunReport rep;
  rep.json["command"] = command_name(config.command);
  rep.json["config"] = config_echo(config);
  ordered_json metrics = ordered_json::object();
  Verdicts v;
  switch (config.command) {
    case Command::kDemo: run_demo(config, metrics, v); break;
    case Command::kShorten: run_shorten(config, metrics, v); break;
    case Command::kAverage: run_average(config, metrics, v); break;
    case Command::kCover: run_cover(config, metrics, v); break;
    case Command::kConstruct: run_construct(config, metrics, v); break;
    case Command::kDiagnose: run_diagnose(config, metrics, v); break;
  }
  rep.json["metrics"] = metrics;
  rep.json["verdicts"] = v.list;
  rep.json["all_pass"] = v.all;
  rep.json["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.exit_code = v.all ? 0 : 2;

  const std::string text = rep.json.dump(2);
  if (config.report_path.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream out(config.report_path);
    if (!out) throw Error("cannot open " + config.report_path);
    out << text << '\n';
  }
  return rep;
}

}  // namespace ergoloop
