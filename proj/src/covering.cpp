#include "ergoloop/covering.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <random>
#include <set>

namespace ergoloop {

namespace {

int axis_distance(int a, int b, int n, bool periodic) {
  int d = std::abs(a - b);
  return periodic ? std::min(d, n - d) : d;
}

std::vector<char> mask_of(int n, const std::vector<int>& cells) {
  std::vector<char> m(static_cast<std::size_t>(n), 0);
  for (int c : cells) {
    if (c < 0 || c >= n) throw PreconditionError("cell index outside lattice");
    m[c] = 1;
  }
  return m;
}

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Shortest 4-neighbour path from a to b through cells with open[c] set.
std::vector<int> bfs_path(const Lattice& L, int a, int b, const std::vector<char>& open) {
  const int n = L.size();
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  std::deque<int> queue{a};
  parent[a] = a;
  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    if (c == b) break;
    for (int k = 0; k < 4; ++k) {
      int i = L.row(c) + di[k], j = L.col(c) + dj[k];
      if (L.periodic) {
        i = (i + L.n1) % L.n1;
        j = (j + L.n2) % L.n2;
      } else if (i < 0 || i >= L.n1 || j < 0 || j >= L.n2) {
        continue;
      }
      const int d = L.index(i, j);
      if (parent[d] != -1 || !open[d]) continue;
      parent[d] = c;
      queue.push_back(d);
    }
  }
  if (parent[b] == -1) return {};
  std::vector<int> path{b};
  while (path.back() != a) path.push_back(parent[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

/// Sends the first cell of the path onto the last; the cells in between each
/// step back one place toward the start.
CellPermutation cycle_along(int n, const std::vector<int>& path) {
  Eigen::VectorXi img = Eigen::VectorXi::LinSpaced(n, 0, n - 1);
  if (path.size() < 2) return CellPermutation(std::move(img));
  img(path.front()) = path.back();
  for (std::size_t k = 1; k < path.size(); ++k) img(path[k]) = path[k - 1];
  return CellPermutation(std::move(img));
}

}  // namespace

int Lattice::chebyshev(int a, int b) const {
  return std::max(axis_distance(row(a), row(b), n1, periodic), axis_distance(col(a), col(b), n2, periodic));
}

std::vector<int> Lattice::ball(int c, int radius) const {
  std::vector<int> out;
  for (int di = -radius; di <= radius; ++di) {
    for (int dj = -radius; dj <= radius; ++dj) {
      int i = row(c) + di, j = col(c) + dj;
      if (periodic) {
        i = ((i % n1) + n1) % n1;
        j = ((j % n2) + n2) % n2;
      } else if (i < 0 || i >= n1 || j < 0 || j >= n2) {
        continue;
      }
      out.push_back(index(i, j));
    }
  }
  return sorted_unique(std::move(out));
}

std::vector<int> Lattice::refine_cells(const std::vector<int>& cells, int s) const {
  const Lattice fine = refined(s);
  std::vector<int> out;
  out.reserve(cells.size() * s * s);
  for (int c : cells)
    for (int a = 0; a < s; ++a)
      for (int b = 0; b < s; ++b) out.push_back(fine.index(row(c) * s + a, col(c) * s + b));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<int>> decompose_nice_subpartitions(const Lattice& lattice, const std::vector<int>& region,
                                                           int modulus) {
  if (modulus < 1) throw PreconditionError("modulus must be positive");
  std::vector<std::vector<int>> classes(static_cast<std::size_t>(modulus) * modulus);
  for (int c : sorted_unique(region)) {
    if (c < 0 || c >= lattice.size()) throw PreconditionError("cell index outside lattice");
    classes[static_cast<std::size_t>((lattice.row(c) % modulus) * modulus + lattice.col(c) % modulus)].push_back(c);
  }
  return classes;
}

bool is_nice_subpartition(const Lattice& lattice, const std::vector<int>& cubes) {
  for (std::size_t a = 0; a < cubes.size(); ++a)
    for (std::size_t b = a + 1; b < cubes.size(); ++b)
      if (dilates_intersect(lattice.chebyshev(cubes[a], cubes[b]), 16.0)) return false;
  return true;
}

// --------------------------------------------------------------------------

std::vector<std::int64_t> Family42B::counting(int cells) const {
  if (!enumerated) throw PreconditionError("implicit family has no explicit counting function");
  std::vector<std::int64_t> nu(static_cast<std::size_t>(cells), 0);
  for (const auto& m : members)
    for (int c : m) ++nu[c];
  return nu;
}

Family42B family_4_2_B(const std::vector<int>& x_prime, double mu_x, double a, int k, std::int64_t enumeration_cap,
                       std::uint64_t seed) {
  if (k < 4) throw PreconditionError("k below threshold");
  if (!(a > 0) || a > mu_x) throw PreconditionError("a must lie in (0, mu(X)]");
  Family42B fam;
  fam.cubes = sorted_unique(x_prime);
  const int M = static_cast<int>(fam.cubes.size());
  const double mu_xp = M * a / k;
  if (!(mu_xp < 1.5 * mu_x)) throw PreconditionError("mu(X') must be below 1.5 mu(X)");
  fam.subset_size = k - 1;
  if (fam.subset_size > M) throw PreconditionError("X' has fewer than k - 1 cubes");

  long double count = 1;
  for (int i = 0; i < fam.subset_size; ++i) count = count * (M - i) / (i + 1);
  fam.member_count = count;
  fam.ratio = static_cast<double>(fam.subset_size) / M;
  fam.bound = a / (2 * mu_x);

  if (count <= static_cast<long double>(enumeration_cap)) {
    fam.enumerated = true;
    std::vector<int> idx(static_cast<std::size_t>(fam.subset_size));
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      std::vector<int> m(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) m[i] = fam.cubes[idx[i]];
      fam.members.push_back(std::move(m));
      int i = fam.subset_size - 1;
      while (i >= 0 && idx[i] == M - fam.subset_size + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < fam.subset_size; ++j) idx[j] = idx[j - 1] + 1;
    }
  } else {
    std::mt19937_64 rng(seed);
    const int samples = 1000;
    std::vector<int> hits(static_cast<std::size_t>(M), 0), perm(static_cast<std::size_t>(M));
    for (int s = 0; s < samples; ++s) {
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = 0; i < fam.subset_size; ++i) {
        std::uniform_int_distribution<int> pick(i, M - 1);
        std::swap(perm[i], perm[pick(rng)]);
        ++hits[perm[i]];
      }
    }
    for (int h : hits)
      fam.spot_check_error = std::max(fam.spot_check_error, std::abs(static_cast<double>(h) / samples - fam.ratio));
  }
  return fam;
}

// --------------------------------------------------------------------------

std::vector<TransportPlan> transport_4_2_C(const Lattice& L, const std::vector<int>& A_in,
                                           const std::vector<int>& B_in, const std::vector<int>& U, int modulus) {
  const std::vector<int> A = sorted_unique(A_in), B = sorted_unique(B_in);
  const int n = L.size();
  const std::int64_t C = static_cast<std::int64_t>(modulus) * modulus;
  if (!(static_cast<std::int64_t>(A.size()) > 2 * C * static_cast<std::int64_t>(B.size())))
    throw PreconditionError("hypothesis mu(A) > 2C mu(B) fails");
  const std::vector<char> in_A = mask_of(n, A);
  if (std::all_of(B.begin(), B.end(), [&](int c) { return in_A[c]; })) {
    TransportPlan id;
    id.map = CellPermutation::identity(n);
    return {id};
  }
  std::vector<char> allowed = U.empty() ? std::vector<char>(static_cast<std::size_t>(n), 1) : mask_of(n, U);

  const auto A_classes = decompose_nice_subpartitions(L, A, modulus);
  const auto B_classes = decompose_nice_subpartitions(L, B, modulus);
  std::size_t best = 0;
  for (std::size_t i = 1; i < A_classes.size(); ++i)
    if (A_classes[i].size() > A_classes[best].size()) best = i;
  const std::vector<int>& q = A_classes[best];

  std::vector<TransportPlan> plans;
  for (std::size_t cls = 0; cls < B_classes.size(); ++cls) {
    const std::vector<int>& qp = B_classes[cls];
    if (qp.empty()) continue;
    if (qp.size() >= q.size()) throw CertificateError("class of A too small for transport");

    // Pairs whose 4-dilates meet are forced; the rest take unused cubes of q.
    std::vector<std::pair<int, int>> pairs;
    std::vector<char> near_flag;
    std::vector<char> used(q.size(), 0);
    std::vector<int> far_targets;
    for (int target : qp) {
      int match = -1;
      for (std::size_t k = 0; k < q.size(); ++k)
        if (!used[k] && dilates_intersect(L.chebyshev(q[k], target), 4.0)) {
          match = static_cast<int>(k);
          break;
        }
      if (match >= 0) {
        used[match] = 1;
        pairs.push_back({q[match], target});
        near_flag.push_back(1);
      } else {
        far_targets.push_back(target);
      }
    }
    std::size_t next = 0;
    for (int target : far_targets) {
      while (used[next]) ++next;
      used[next] = 1;
      pairs.push_back({q[next], target});
      near_flag.push_back(0);
    }

    // p = q u q'; Z = union of 4-dilates (cells within 2 pitches).
    std::vector<int> p = q;
    p.insert(p.end(), qp.begin(), qp.end());
    p = sorted_unique(p);
    const std::vector<char> in_p = mask_of(n, p);
    std::vector<int> zcount(static_cast<std::size_t>(n), 0);
    for (int c : p)
      for (int d : L.ball(c, 2)) ++zcount[d];

    TransportPlan plan;
    plan.residue_class = static_cast<int>(cls);
    for (int c = 0; c < n; ++c)
      if (zcount[c]) plan.blocked.push_back(c);
    std::vector<CellPermutation> moves;
    std::set<int> support;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
      const auto [from, to] = pairs[j];
      CubeMove mv{from, to, near_flag[j] != 0, {}};
      if (from == to) {
        mv.path = {from};
      } else if (mv.near) {
        // Inside K = 16Q n 16Q', which holds no other cube of p.
        std::vector<char> open(static_cast<std::size_t>(n), 0);
        for (int c : L.ball(from, 8))
          if (L.chebyshev(c, to) <= 8 && allowed[c] && (!in_p[c] || c == from || c == to)) open[c] = 1;
        mv.path = bfs_path(L, from, to, open);
      } else {
        // Avoid Z_j = Z minus the dilates of this pair.
        std::vector<int> own(static_cast<std::size_t>(n), 0);
        for (int d : L.ball(from, 2)) ++own[d];
        for (int d : L.ball(to, 2)) ++own[d];
        std::vector<char> open(static_cast<std::size_t>(n), 0);
        for (int c = 0; c < n; ++c) {
          const bool in_Zj = zcount[c] > 0 && !own[c];
          open[c] = allowed[c] && !in_Zj && (!in_p[c] || c == from || c == to);
        }
        // Cells of the own dilates can still carry another cube's dilate;
        // only the cubes themselves must be avoided there.
        mv.path = bfs_path(L, from, to, open);
        if (mv.path.empty()) {
          for (int c = 0; c < n; ++c) open[c] = allowed[c] && (!in_p[c] || c == from || c == to);
          mv.path = bfs_path(L, from, to, open);
        }
      }
      if (mv.path.empty()) throw Error("transport blocked");
      support.insert(mv.path.begin(), mv.path.end());
      moves.push_back(cycle_along(n, mv.path));
      plan.moves.push_back(std::move(mv));
    }
    CellPermutation g = CellPermutation::identity(n);
    for (std::size_t j = moves.size(); j-- > 0;) g = moves[j].after(g);
    plan.map = std::move(g);
    plan.support.assign(support.begin(), support.end());
    plans.push_back(std::move(plan));
  }
  if (!plans_cover(plans, A, B)) throw CertificateError("transport plans do not cover B");
  return plans;
}

bool plans_cover(const std::vector<TransportPlan>& plans, const std::vector<int>& A, const std::vector<int>& B) {
  if (plans.empty()) return B.empty();
  const int n = plans.front().map.size();
  std::vector<char> hit(static_cast<std::size_t>(n), 0);
  for (const auto& plan : plans)
    for (int c : A) hit[plan.map(c)] = 1;
  return std::all_of(B.begin(), B.end(), [&](int c) { return hit[c] != 0; });
}

// --------------------------------------------------------------------------

std::int64_t CoveringFamily::size() const {
  std::int64_t n = maps.size();
  for (std::int64_t w : image_weights) n += w;
  return n;
}

std::vector<std::int64_t> CoveringFamily::counting() const {
  std::vector<std::int64_t> nu(static_cast<std::size_t>(cells), 0);
  for (std::int64_t j = 0; j < maps.member_count(); ++j) {
    const std::int64_t w = maps.weight(j);
    for (int c : maps.member_image(j, source)) nu[c] += w;
  }
  for (std::size_t m = 0; m < images.size(); ++m) {
    const std::int64_t w = m < image_weights.size() ? image_weights[m] : 1;
    for (int c : images[m]) nu[c] += w;
  }
  return nu;
}

CoveringVerdict verify_covering(const CoveringFamily& theta, std::int64_t A_size, double c1, double c2,
                                const std::vector<int>& region_in) {
  if (A_size < 1) throw PreconditionError("A must be non-empty");
  CoveringVerdict v;
  v.counts = theta.counting();
  v.N = theta.size();
  std::vector<int> region = region_in;
  if (region.empty()) {
    region.resize(static_cast<std::size_t>(theta.cells));
    std::iota(region.begin(), region.end(), 0);
  }
  const std::int64_t Y = static_cast<std::int64_t>(region.size());
  v.bound = 1.0 / (c1 + c2 * static_cast<double>(Y) / static_cast<double>(A_size));
  const bool integral = c1 == std::floor(c1) && c2 == std::floor(c2) && c1 >= 0 && c2 >= 0 && c1 < 1e12 && c2 < 1e12;
  v.pass = true;
  v.worst_ratio = 1e300;
  for (int c : region) {
    const std::int64_t nu = v.counts[c];
    bool ok;
    if (integral) {
      const __int128 lhs = static_cast<__int128>(nu) *
                           (static_cast<__int128>(c1) * A_size + static_cast<__int128>(c2) * Y);
      ok = lhs >= static_cast<__int128>(v.N) * A_size;
    } else {
      ok = static_cast<long double>(nu) * (c1 * A_size + c2 * Y) >= static_cast<long double>(v.N) * A_size;
    }
    const double ratio = v.N ? static_cast<double>(nu) / static_cast<double>(v.N) : 0.0;
    if (ratio < v.worst_ratio || (!ok && v.pass)) {
      v.worst_ratio = ratio;
      v.worst_cell = c;
      v.worst_count = nu;
    }
    if (!ok) v.pass = false;
  }
  return v;
}

LocalCovering covering_4_2_A(const Lattice& lattice, const std::vector<int>& X_in, const std::vector<int>& A_in,
                             int approximation_defect, int modulus) {
  const int n = lattice.size();
  const std::vector<int> X = sorted_unique(X_in), A = sorted_unique(A_in);
  if (A.empty()) throw PreconditionError("A must be non-empty");
  const std::vector<char> in_X = mask_of(n, X);
  for (int c : A)
    if (!in_X[c]) throw PreconditionError("A must lie inside X");

  LocalCovering out;
  out.C1 = static_cast<double>(modulus) * modulus;
  out.C2 = 2.0;
  out.family.cells = n;
  out.family.source = A;
  out.family.maps = PermutationFamily(n);
  const std::int64_t a = static_cast<std::int64_t>(A.size());
  const std::int64_t MX = static_cast<std::int64_t>(X.size());

  if (a == MX) {
    out.family.maps.add(CellPermutation::identity(n));
    out.N = out.N_prime = out.M = 1;
  } else if (approximation_defect <= 0) {
    // sigma: the |X| cyclic windows of a along X, each cell covered a times;
    // f_i = exchange of A onto window i, so f_i(A) = A_i and B is empty.
    out.family.maps.add_ring(WindowRing{A, X, std::nullopt});
    out.N = MX;
    out.N_prime = a;
    out.M = MX;
  } else {
    const std::int64_t d = approximation_defect;
    if (d >= a || d > MX - a) throw PreconditionError("approximation defect too large for A");
    const WindowRing sigma{A, X, std::nullopt};
    std::set<int> B;
    for (std::int64_t j = 0; j < MX; ++j) {
      std::vector<int> target = sigma.window(j);
      if (j == 0) {
        for (std::int64_t k = 0; k < d; ++k) {
          B.insert(target[static_cast<std::size_t>(a - d + k)]);
          target[static_cast<std::size_t>(a - d + k)] = X[static_cast<std::size_t>(a + k)];
          B.insert(X[static_cast<std::size_t>(a + k)]);
        }
      }
      out.family.maps.add(CellPermutation::exchange(n, A, target));
    }
    out.defect.assign(B.begin(), B.end());
    out.N = MX;
    out.N_prime = a;
    out.plans = transport_4_2_C(lattice, A, out.defect, {}, modulus);
    for (const auto& plan : out.plans) out.family.maps.add(plan.map, out.N_prime);
    out.M = out.N + static_cast<std::int64_t>(out.plans.size()) * out.N_prime;
  }
  const CoveringVerdict v = verify_covering(out.family, a, out.C1, out.C2, X);
  if (!v.pass) throw CertificateError("local covering inequality fails at cell " + std::to_string(v.worst_cell));
  return out;
}

std::vector<std::vector<int>> strip_charts(const Lattice& lattice, int r) {
  if (r < 1 || lattice.n1 % r != 0) throw PreconditionError("strip count must divide the first lattice size");
  std::vector<std::vector<int>> charts(static_cast<std::size_t>(r));
  const int h = lattice.n1 / r;
  for (int c = 0; c < lattice.size(); ++c) charts[static_cast<std::size_t>(lattice.row(c) / h)].push_back(c);
  return charts;
}

GlobalCovering covering_global(const Lattice& lattice, const std::vector<std::vector<int>>& charts_in,
                               const std::vector<int>& A_in, int modulus) {
  const int r = static_cast<int>(charts_in.size());
  if (r < 1) throw PreconditionError("need at least one chart");
  std::vector<int> A = sorted_unique(A_in);
  if (A.empty()) throw PreconditionError("A must be non-empty");
  {
    std::vector<int> owner(static_cast<std::size_t>(lattice.size()), -1);
    for (int i = 0; i < r; ++i) {
      if (charts_in[i].size() != charts_in[0].size()) throw PreconditionError("charts must have equal measure");
      for (int c : charts_in[i]) {
        if (c < 0 || c >= lattice.size() || owner[c] != -1) throw PreconditionError("charts must partition the lattice");
        owner[c] = i;
      }
    }
    if (std::count(owner.begin(), owner.end(), -1)) throw PreconditionError("charts must partition the lattice");
  }

  GlobalCovering out;
  out.r = r;
  int s = 1;
  while (static_cast<std::int64_t>(A.size()) * s * s < r) ++s;
  out.refinement = s;
  out.lattice = lattice.refined(s);
  std::vector<std::vector<int>> charts;
  for (const auto& ch : charts_in) charts.push_back(lattice.refine_cells(ch, s));
  if (s > 1) A = lattice.refine_cells(A, s);
  const int n = out.lattice.size();
  const std::int64_t a = static_cast<std::int64_t>(A.size());

  // Spreading f: every chart receives floor(|A|/r) or ceil(|A|/r) cells of f(A).
  const std::vector<char> in_A = mask_of(n, A);
  std::vector<int> excess, targets;
  std::vector<std::vector<int>> kept(static_cast<std::size_t>(r));
  std::vector<std::int64_t> quota(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) quota[i] = a / r + (i < a % r ? 1 : 0);
  for (int i = 0; i < r; ++i) {
    for (int c : charts[i]) {
      if (!in_A[c]) continue;
      if (static_cast<std::int64_t>(kept[i].size()) < quota[i])
        kept[i].push_back(c);
      else
        excess.push_back(c);
    }
  }
  for (int i = 0; i < r; ++i) {
    for (int c : charts[i]) {
      if (static_cast<std::int64_t>(kept[i].size()) >= quota[i]) break;
      if (in_A[c]) continue;
      kept[i].push_back(c);
      targets.push_back(c);
    }
  }
  out.spreading = CellPermutation::exchange(n, excess, targets);
  for (int i = 0; i < r; ++i) {
    std::sort(kept[i].begin(), kept[i].end());
    if (!(2 * r * static_cast<std::int64_t>(kept[i].size()) > a))
      throw CertificateError("spreading leaves a chart with too little of A");
    out.parts.push_back(kept[i]);
  }

  const double C1 = static_cast<double>(modulus) * modulus, C2 = 2.0;
  out.c1 = r * C1;
  out.c2 = 2 * r * C2;
  out.family.cells = n;
  out.family.source = A;
  out.family.maps = PermutationFamily(n);
  const bool f_trivial = out.spreading.is_identity();
  std::vector<std::int64_t> Ni(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) Ni[i] = out.parts[i].size() == charts[i].size() ? 1 : static_cast<std::int64_t>(charts[i].size());
  std::int64_t L = 1;
  for (std::int64_t v : Ni) L = std::lcm(L, v);
  for (int i = 0; i < r; ++i) {
    const std::int64_t w = L / Ni[i];
    if (Ni[i] == 1) {
      out.family.maps.add(out.spreading, w);
    } else {
      std::vector<int> ring = charts[i];
      std::sort(ring.begin(), ring.end());
      out.family.maps.add_ring(WindowRing{out.parts[i], ring, f_trivial ? std::nullopt : std::optional(out.spreading)}, w);
    }
  }
  const CoveringVerdict v = verify_covering(out.family, a, out.c1, out.c2);
  if (!v.pass) throw CertificateError("global covering inequality fails at cell " + std::to_string(v.worst_cell));
  return out;
}

CoveringOracle torus_covering_oracle(int n1, int n2, int r) {
  const Lattice lattice{n1, n2, true};
  const auto charts = strip_charts(lattice, r);
  return [lattice, charts](const std::vector<int>& A, int cells) {
    if (cells != lattice.size()) throw PreconditionError("oracle lattice does not match the field");
    GlobalCovering g = covering_global(lattice, charts, A);
    if (g.refinement != 1) throw PreconditionError("A has fewer cells than charts");
    return CoveringResponse{std::make_shared<PermutationFamily>(std::move(g.family.maps)), g.c1, g.c2};
  };
}

}  // namespace ergoloop
