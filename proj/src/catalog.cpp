#include "wtl/catalog.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>

#include "wtl/error.hpp"

namespace wtl {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent[static_cast<size_t>(find(a))] = find(b); }
};

// Angle multiples (units of pi) of the vertex classes.
std::vector<int> vertex_angles(const LinearInvolution& li) {
  const int l = static_cast<int>(li.top.size()), m = static_cast<int>(li.bottom.size());
  // P_0..P_m are 0..m, interior top points Q_1..Q_{l-1} follow.
  auto q = [&](int i) { return i == 0 ? 0 : (i == l ? m : m + i); };
  UnionFind uf(m + l);
  const int d = li.letters();
  std::vector<std::vector<std::pair<int, int>>> occ(static_cast<size_t>(d));
  for (int j = 0; j < m; ++j) occ[static_cast<size_t>(li.bottom[static_cast<size_t>(j)])].push_back({j, j + 1});
  for (int i = 0; i < l; ++i) occ[static_cast<size_t>(li.top[static_cast<size_t>(i)])].push_back({q(i), q(i + 1)});
  for (int a = 0; a < d; ++a) {
    const auto [s1, e1] = occ[static_cast<size_t>(a)][0];
    const auto [s2, e2] = occ[static_cast<size_t>(a)][1];
    if (li.pairing_type(a) == 1) {
      uf.unite(s1, s2);
      uf.unite(e1, e2);
    } else {
      uf.unite(s1, e2);
      uf.unite(e1, s2);
    }
  }
  std::map<int, int> angle;
  for (int v = 0; v < m + l; ++v) angle[uf.find(v)] += (v != 0 && v != m) ? 1 : 0;
  std::vector<int> out;
  for (const auto& [root, a] : angle) out.push_back(a);
  return out;
}

}  // namespace

StratumInfo combinatorial_stratum(const LinearInvolution& li) {
  check_combinatorics(li);
  StratumInfo info;
  info.signature.kind = li.is_abelian() ? StratumKind::Abelian : StratumKind::Quadratic;
  for (int a : vertex_angles(li)) {
    if (a == 2) {
      ++info.marked_points;
      continue;
    }
    info.signature.multiplicities.push_back(info.signature.kind == StratumKind::Abelian ? a / 2 - 1 : a - 2);
  }
  std::sort(info.signature.multiplicities.rbegin(), info.signature.multiplicities.rend());
  info.genus = info.signature.genus();
  info.complex_dimension = info.signature.complex_dimension();
  return info;
}

namespace {

// One-cylinder form "Z T / B Z" where T and B are n relabelled copies of a
// six-letter block; each copy adds a handle with four simple zeros.
LinearInvolution block_representative(int n) {
  static const std::vector<int> top_block{4, 3, 1, 2, 5, 1}, bottom_block{4, 0, 5, 2, 0, 3};
  LinearInvolution li;
  const int z = 6 * n;
  li.top.push_back(z);
  for (int b = 0; b < n; ++b)
    for (int x : top_block) li.top.push_back(x + 6 * b);
  for (int b = 0; b < n; ++b)
    for (int x : bottom_block) li.bottom.push_back(x + 6 * b);
  li.bottom.push_back(z);
  return li;
}

// Cuts letter 2 (which sits in both rows) into p+1 pieces, making p regular
// points, and opens each of them in the top row with a folded pair "P P":
// the fold point becomes a pole and the regular point a simple zero.
LinearInvolution add_poles(LinearInvolution li, int p) {
  const int x = 2, d = li.letters();
  auto expand = [&](std::vector<int>& row, bool top) {
    std::vector<int> out;
    for (int v : row) {
      if (v != x) {
        out.push_back(v);
        continue;
      }
      for (int k = 0; k <= p; ++k) {
        out.push_back(k == 0 ? x : d + k - 1);
        if (top && k < p) out.insert(out.end(), {d + p + k, d + p + k});
      }
    }
    row = std::move(out);
  };
  expand(li.top, true);
  expand(li.bottom, false);
  return li;
}

}  // namespace

const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries = [] {
    std::vector<CatalogEntry> e{{"-1^4", "A A B / B C C"}};
    for (int n = 1; n <= 5; ++n) e.push_back({"1^" + std::to_string(4 * n), block_representative(n).to_string()});
    for (int p = 1; p <= 6; ++p)
      e.push_back({"1^" + std::to_string(8 + p) + ",-1^" + std::to_string(p), add_poles(block_representative(2), p).to_string()});
    for (int n = 1; n <= 3; ++n)
      e.push_back({"1^" + std::to_string(4 * n + 10) + ",-1^10", add_poles(block_representative(n), 10).to_string()});
    return e;
  }();
  return entries;
}

namespace {

std::string key_of(const StratumSignature& sig) {
  std::string s = sig.to_string();
  return s.substr(2, s.size() - 3);
}

const CatalogEntry* find_entry(const StratumSignature& sig) {
  if (sig.kind != StratumKind::Quadratic) return nullptr;
  for (const auto& e : catalog_entries())
    if (StratumSignature::parse(e.stratum) == sig) return &e;
  return nullptr;
}

std::mutex cache_mutex;
std::map<std::string, Certificate> cache;

}  // namespace

bool in_catalog(const StratumSignature& sig) { return find_entry(sig) != nullptr; }

Certificate certify(const StratumSignature& sig) {
  const CatalogEntry* e = find_entry(sig);
  if (!e) throw Error(ErrorCode::NotInCatalog, sig.to_string() + " is not in the representative catalog");
  const std::string key = key_of(sig);
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const LinearInvolution li = LinearInvolution::parse(e->permutation);
  const StratumInfo info = suspension_stratum(li);
  Certificate c;
  c.stratum = info.signature.to_string();
  c.permutation = e->permutation;
  c.genus = info.genus;
  c.complex_dimension = info.complex_dimension;
  c.marked_points = info.marked_points;
  c.verified = info.signature == sig && info.marked_points == 0 && is_irreducible(li);
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache[key] = c;
  return c;
}

LinearInvolution stratum_representative(const StratumSignature& sig) {
  const Certificate c = certify(sig);
  if (!c.verified)
    throw Error(ErrorCode::NotInCatalog, "catalog entry for " + sig.to_string() + " failed its suspension check (got " +
                                             c.stratum + ")");
  return LinearInvolution::parse(c.permutation);
}

ExponentReport estimate_top_exponent(const StratumSignature& sig, std::uint64_t seed, const ExponentOptions& opts) {
  if (opts.iterations < 100000)
    throw Error(ErrorCode::InvalidArgument, "at least 1e5 accelerated steps are required");
  return estimate_top_exponent(stratum_representative(sig), seed, opts);
}

}  // namespace wtl
