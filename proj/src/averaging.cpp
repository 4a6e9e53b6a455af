#include "ergoloop/averaging.hpp"

#include <algorithm>

namespace ergoloop {

std::vector<int> WindowRing::window(std::int64_t j) const {
  const std::int64_t L = static_cast<std::int64_t>(ring.size());
  std::vector<int> w(source.size());
  for (std::size_t k = 0; k < source.size(); ++k) w[k] = ring[static_cast<std::size_t>((j + static_cast<std::int64_t>(k)) % L)];
  return w;
}

void PermutationFamily::add(CellPermutation g, std::int64_t weight) {
  if (g.size() != cells_) throw PreconditionError("family member has the wrong cell count");
  if (weight < 1) throw PreconditionError("weights must be positive");
  blocks_.push_back({std::move(g), weight});
}

void PermutationFamily::add_ring(WindowRing ring, std::int64_t weight) {
  if (ring.source.empty() || ring.source.size() > ring.ring.size())
    throw PreconditionError("ring needs 1 <= |source| <= |ring|");
  if (ring.pre && ring.pre->size() != cells_) throw PreconditionError("ring pre-map has the wrong cell count");
  if (weight < 1) throw PreconditionError("weights must be positive");
  blocks_.push_back({std::move(ring), weight});
}

void PermutationFamily::append(const PermutationFamily& other, std::int64_t weight) {
  if (other.cells_ != cells_) throw PreconditionError("families over different cell counts");
  for (const Block& b : other.blocks_) blocks_.push_back({b.members, b.weight * weight});
}

std::int64_t PermutationFamily::block_members(const Block& b) {
  if (const auto* r = std::get_if<WindowRing>(&b.members)) return static_cast<std::int64_t>(r->ring.size());
  return 1;
}

std::int64_t PermutationFamily::size() const {
  std::int64_t n = 0;
  for (const Block& b : blocks_) n += block_members(b) * b.weight;
  return n;
}

std::int64_t PermutationFamily::member_count() const {
  std::int64_t n = 0;
  for (const Block& b : blocks_) n += block_members(b);
  return n;
}

std::pair<const PermutationFamily::Block*, std::int64_t> PermutationFamily::locate(std::int64_t j) const {
  for (const Block& b : blocks_) {
    const std::int64_t m = block_members(b);
    if (j < m) return {&b, j};
    j -= m;
  }
  throw PreconditionError("family member index out of range");
}

CellPermutation PermutationFamily::member(std::int64_t j) const {
  const auto [b, local] = locate(j);
  if (const auto* g = std::get_if<CellPermutation>(&b->members)) return *g;
  const auto& r = std::get<WindowRing>(b->members);
  const CellPermutation e = CellPermutation::exchange(cells_, r.source, r.window(local));
  return r.pre ? e.after(*r.pre) : e;
}

std::int64_t PermutationFamily::weight(std::int64_t j) const { return locate(j).first->weight; }

std::vector<int> PermutationFamily::member_image(std::int64_t j, const std::vector<int>& A) const {
  const auto [b, local] = locate(j);
  if (const auto* r = std::get_if<WindowRing>(&b->members)) {
    if (!r->pre && A == r->source) return r->window(local);
    if (!r->pre && A.size() == r->source.size()) {
      std::vector<int> a = A, s = r->source;
      std::sort(a.begin(), a.end());
      std::sort(s.begin(), s.end());
      if (a == s) return r->window(local);
    }
  }
  const CellPermutation g = member(j);
  std::vector<int> out(A.size());
  for (std::size_t k = 0; k < A.size(); ++k) out[k] = g(A[k]);
  return out;
}

Eigen::ArrayXd PermutationFamily::average(const Eigen::ArrayXd& H) const {
  if (H.size() != cells_) throw PreconditionError("field size does not match family");
  const std::int64_t N = size();
  if (N == 0) throw PreconditionError("empty family");
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(cells_);
  std::vector<char> in_window(static_cast<std::size_t>(cells_), 0), in_source(static_cast<std::size_t>(cells_), 0);
  std::vector<int> displaced, vacated;
  for (const Block& b : blocks_) {
    const double w = static_cast<double>(b.weight);
    if (const auto* g = std::get_if<CellPermutation>(&b.members)) {
      acc += w * g->pullback(H);
      continue;
    }
    const WindowRing& r = std::get<WindowRing>(b.members);
    const std::int64_t L = static_cast<std::int64_t>(r.ring.size());
    if (r.pre) {
      for (std::int64_t j = 0; j < L; ++j) {
        const CellPermutation e = CellPermutation::exchange(cells_, r.source, r.window(j)).after(*r.pre);
        acc += w * e.pullback(H);
      }
      continue;
    }
    // sum_j H o E_j^{-1} = L H + corrections on the window and vacated cells.
    Eigen::ArrayXd delta = Eigen::ArrayXd::Zero(cells_);
    for (int c : r.source) in_source[c] = 1;
    const bool ring_sorted = std::is_sorted(r.ring.begin(), r.ring.end());
    std::vector<int> sorted_source = r.source;
    std::sort(sorted_source.begin(), sorted_source.end());
    const std::int64_t a = static_cast<std::int64_t>(r.source.size());
    for (std::int64_t j = 0; j < L; ++j) {
      const std::vector<int> W = r.window(j);
      for (int c : W) in_window[c] = 1;
      displaced.clear();
      vacated.clear();
      if (ring_sorted) {
        // A wrapped window in index order: its tail from the ring start, then its head.
        const std::int64_t wrap = std::max<std::int64_t>(0, j + a - L);
        for (std::int64_t k = a - wrap; k < a; ++k)
          if (!in_source[W[k]]) displaced.push_back(W[k]);
        for (std::int64_t k = 0; k < a - wrap; ++k)
          if (!in_source[W[k]]) displaced.push_back(W[k]);
        for (int c : sorted_source)
          if (!in_window[c]) vacated.push_back(c);
      } else {
        for (int c : W)
          if (!in_source[c]) displaced.push_back(c);
        for (int c : r.source)
          if (!in_window[c]) vacated.push_back(c);
        std::sort(displaced.begin(), displaced.end());
        std::sort(vacated.begin(), vacated.end());
      }
      for (std::size_t k = 0; k < W.size(); ++k) delta(W[k]) += H(r.source[k]) - H(W[k]);
      for (std::size_t k = 0; k < vacated.size(); ++k) delta(vacated[k]) += H(displaced[k]) - H(vacated[k]);
      for (int c : W) in_window[c] = 0;
    }
    for (int c : r.source) in_source[c] = 0;
    acc += w * (static_cast<double>(L) * H + delta);
  }
  return acc / static_cast<double>(N);
}

// --------------------------------------------------------------------------

AveragingOperator::AveragingOperator(std::shared_ptr<const PermutationFamily> stage) : cells_(stage->cells()) {
  stages_.push_back(std::move(stage));
}

AveragingOperator AveragingOperator::from_maps(const std::vector<CellPermutation>& maps) {
  if (maps.empty()) throw PreconditionError("an averaging operator needs at least one map");
  auto fam = std::make_shared<PermutationFamily>(maps.front().size());
  for (const auto& g : maps) fam->add(g);
  return AveragingOperator(std::move(fam));
}

long double AveragingOperator::size() const {
  long double n = 1.0L;
  for (const auto& s : stages_) n *= static_cast<long double>(s->size());
  return n;
}

Eigen::ArrayXd AveragingOperator::apply(const Eigen::ArrayXd& H) const {
  if (H.size() != cells_) throw PreconditionError("field size does not match operator");
  Eigen::ArrayXd out = H;
  for (const auto& s : stages_) out = s->average(out);
  return out;
}

ScalarField AveragingOperator::apply(const ScalarField& H) const {
  if (H.domain() != Domain::kFiber) throw PreconditionError("averaging acts on fiber fields");
  return ScalarField(H.grid(), Domain::kFiber, apply(H.samples()));
}

std::vector<std::pair<CellPermutation, std::int64_t>> AveragingOperator::flatten(std::int64_t cap) const {
  std::vector<std::pair<CellPermutation, std::int64_t>> maps{{CellPermutation::identity(cells_), 1}};
  for (const auto& s : stages_) {
    if (static_cast<long double>(maps.size()) * s->member_count() > cap)
      throw BudgetError("operator too large to flatten");
    std::vector<std::pair<CellPermutation, std::int64_t>> next;
    for (std::int64_t j = 0; j < s->member_count(); ++j) {
      const CellPermutation g = s->member(j);
      const std::int64_t w = s->weight(j);
      for (const auto& [G, wG] : maps) next.push_back({g.after(G), w * wG});
    }
    maps.swap(next);
  }
  return maps;
}

AveragingOperator compose_averaging(const AveragingOperator& S2, const AveragingOperator& S1) {
  if (S2.cells_ != S1.cells_) throw PreconditionError("operators over different grids");
  AveragingOperator out(S1.cells_);
  out.stages_ = S1.stages_;
  out.stages_.insert(out.stages_.end(), S2.stages_.begin(), S2.stages_.end());
  return out;
}

// --------------------------------------------------------------------------

std::vector<int> sublevel_set(const Eigen::ArrayXd& H) {
  const double half = H.maxCoeff() / 2;
  std::vector<int> A;
  for (Eigen::Index c = 0; c < H.size(); ++c)
    if (H(c) < half) A.push_back(static_cast<int>(c));
  return A;
}

Section32Report section32_bounds_check(const Eigen::ArrayXd& H, const std::vector<int>& A,
                                       const CoveringResponse& response) {
  Section32Report rep;
  rep.m = H.maxCoeff();
  if (rep.m <= 0.0) {
    rep.skipped = true;
    return rep;
  }
  const int n = static_cast<int>(H.size());
  rep.mu_A = static_cast<double>(A.size()) / n;
  rep.mu_A_bound = rep.m / (rep.m + 2);
  Eigen::ArrayXd chi = Eigen::ArrayXd::Zero(n);
  for (int c : A) chi(c) = 1.0;
  rep.min_ratio = response.family->average(chi).minCoeff();
  rep.ratio_bound = rep.m / (3 * response.c2 + response.c1);
  if (rep.mu_A < rep.mu_A_bound * (1 - 1e-12)) {
    rep.ok = false;
    throw CertificateError("sublevel measure bound mu(A) >= m/(m+2) fails");
  }
  if (rep.min_ratio < rep.ratio_bound * (1 - 1e-12)) {
    rep.ok = false;
    throw CertificateError("covering ratio bound N'/N >= m/(3c2+c1) fails");
  }
  return rep;
}

FlattenResult flatten_max(const Eigen::ArrayXd& H0, const CoveringOracle& oracle, double target, int max_iter) {
  if (!(target > 0)) throw PreconditionError("target must be positive");
  const int n = static_cast<int>(H0.size());
  if (n == 0) throw PreconditionError("empty field");
  const double sup = H0.abs().maxCoeff();
  if (sup > 1.0 + 1e-12) throw PreconditionError("flattening needs ||H|| <= 1");
  if (std::abs(H0.mean()) > 1e-12 * std::max(sup, 1e-3)) throw PreconditionError("field is not zero-mean");

  FlattenResult res{AveragingOperator(n), {}};
  Eigen::ArrayXd H = H0;
  double m = H.maxCoeff();
  res.trace.m.push_back(m);
  int iter = 0;
  while (m >= target) {
    if (iter >= max_iter) throw FlattenBudgetError("flattening budget exhausted", res.trace);
    const std::vector<int> A = sublevel_set(H);
    if (A.empty()) throw PreconditionError("sublevel set is empty");
    const CoveringResponse resp = oracle(A, n);
    if (!resp.family || resp.family->cells() != n) throw PreconditionError("oracle returned a family on another grid");
    if (iter == 0) {
      res.trace.c1 = resp.c1;
      res.trace.c2 = resp.c2;
      res.trace.c = contraction_constant(resp.c1, resp.c2);
    }
    const double c = contraction_constant(resp.c1, resp.c2);
    res.trace.reports.push_back(section32_bounds_check(H, A, resp));
    H = resp.family->average(H);
    res.op = compose_averaging(AveragingOperator(resp.family), res.op);
    res.trace.bound.push_back(m * (1 - m / c));
    m = H.maxCoeff();
    res.trace.m.push_back(m);
    ++iter;
  }
  return res;
}

AveragingOperator flatten_sup(const Eigen::ArrayXd& H, const CoveringOracle& oracle, double eps, int max_iter) {
  const FlattenResult plus = flatten_max(H, oracle, eps, max_iter);
  const Eigen::ArrayXd Hp = plus.op.apply(H);
  const FlattenResult minus = flatten_max(-Hp, oracle, eps, max_iter);
  return compose_averaging(minus.op, plus.op);
}

}  // namespace ergoloop
