#include "wtl/double_cover.hpp"

#include <Eigen/Dense>
#include <queue>

#include "wtl/error.hpp"

namespace wtl {

DoubleCover double_cover(const HalfTranslationSurface& s) {
  const int f = s.polygon_count();
  std::vector<PlanarPolygon> polys(static_cast<size_t>(2 * f));
  for (int p = 0; p < f; ++p) {
    polys[static_cast<size_t>(p)] = s.polygons()[static_cast<size_t>(p)];
    auto& rotated = polys[static_cast<size_t>(p + f)];
    for (const auto& v : s.polygons()[static_cast<size_t>(p)].vertices) rotated.vertices.push_back(-v);
  }
  std::vector<SidePair> pairs;
  for (const auto& pr : s.gluing().pairs) {
    const EdgeRef a0{pr.a.polygon, pr.a.edge}, a1{pr.a.polygon + f, pr.a.edge};
    const EdgeRef b0{pr.b.polygon, pr.b.edge}, b1{pr.b.polygon + f, pr.b.edge};
    if (pr.sign == 1) {
      pairs.push_back({a0, b0, 1});
      pairs.push_back({a1, b1, 1});
    } else {
      pairs.push_back({a0, b1, 1});
      pairs.push_back({a1, b0, 1});
    }
  }

  // Component of polygon 0.
  std::vector<std::vector<int>> adj(static_cast<size_t>(2 * f));
  for (const auto& pr : pairs) {
    adj[static_cast<size_t>(pr.a.polygon)].push_back(pr.b.polygon);
    adj[static_cast<size_t>(pr.b.polygon)].push_back(pr.a.polygon);
  }
  std::vector<int> index(static_cast<size_t>(2 * f), -1);
  std::vector<int> order;
  std::queue<int> todo;
  todo.push(0);
  index[0] = 0;
  order.push_back(0);
  while (!todo.empty()) {
    const int p = todo.front();
    todo.pop();
    for (int q : adj[static_cast<size_t>(p)]) {
      if (index[static_cast<size_t>(q)] < 0) {
        index[static_cast<size_t>(q)] = static_cast<int>(order.size());
        order.push_back(q);
        todo.push(q);
      }
    }
  }

  DoubleCover cover;
  cover.base_polygons = f;
  cover.connected = static_cast<int>(order.size()) == 2 * f;
  if (cover.connected) {
    // Keep the natural numbering.
    for (int p = 0; p < 2 * f; ++p) index[static_cast<size_t>(p)] = p;
    order.resize(static_cast<size_t>(2 * f));
    for (int p = 0; p < 2 * f; ++p) order[static_cast<size_t>(p)] = p;
  }
  std::vector<PlanarPolygon> kept;
  for (int p : order) {
    kept.push_back(polys[static_cast<size_t>(p)]);
    cover.projection.push_back(p % f);
    cover.sheet.push_back(p / f);
    const int twin = p < f ? p + f : p - f;
    cover.deck.push_back(index[static_cast<size_t>(twin)]);
  }
  EdgeGluing g;
  for (const auto& pr : pairs) {
    const int ia = index[static_cast<size_t>(pr.a.polygon)];
    if (ia < 0) continue;
    g.pairs.push_back({{ia, pr.a.edge}, {index[static_cast<size_t>(pr.b.polygon)], pr.b.edge}, 1});
  }
  cover.surface = build_surface(std::move(kept), std::move(g));

  for (const auto& cp : cover.surface.cone_points()) {
    const CornerRef c = cp.corners.front();
    cover.vertex_projection.push_back(s.vertex_class({cover.projection[static_cast<size_t>(c.polygon)], c.edge}));
  }

  if (cover.connected) {
    const StratumInfo base = stratum_of(s);
    const StratumInfo top = stratum_of(cover.surface);
    int odd = 0;
    for (int d : base.signature.multiplicities) odd += (d % 2 != 0);
    const int chi_base = 2 - 2 * base.genus;
    const int chi_top = 2 - 2 * top.genus;
    if (chi_top != 2 * chi_base - odd)
      throw Error(ErrorCode::InvalidArgument, "Riemann-Hurwitz check failed for the double cover");
  }
  return cover;
}

namespace {

struct LiftedTerm {
  int polygon;
  int edge;
  int coeff;
};

CornerRef start_corner(const HalfTranslationSurface& s, const LiftedTerm& t) {
  const int n = s.edge_count(t.polygon);
  return t.coeff > 0 ? CornerRef{t.polygon, t.edge} : CornerRef{t.polygon, (t.edge + 1) % n};
}

CornerRef end_corner(const HalfTranslationSurface& s, const LiftedTerm& t) {
  const int n = s.edge_count(t.polygon);
  return t.coeff > 0 ? CornerRef{t.polygon, (t.edge + 1) % n} : CornerRef{t.polygon, t.edge};
}

}  // namespace

HatBasis hat_basis(const HalfTranslationSurface& base, const DoubleCover& cover, const HomologyBasis& basis) {
  if (!cover.connected) throw Error(ErrorCode::HolonomyObstruction, "double cover is disconnected (trivial holonomy)");
  const auto& cs = cover.surface;
  const int f = cover.base_polygons;
  HatBasis out;

  auto lift = [&](const NamedChain& nc, bool closed) {
    if (nc.chain.terms.empty()) throw Error(ErrorCode::InvalidArgument, "empty chain " + nc.name);
    std::vector<LiftedTerm> path;
    int sheet = 0;
    for (size_t i = 0; i < nc.chain.terms.size(); ++i) {
      const auto& t = nc.chain.terms[i];
      base.check_edge(t.edge);
      if (t.coeff != 1 && t.coeff != -1)
        throw Error(ErrorCode::InvalidArgument, "path chains need unit coefficients (" + nc.name + ")");
      if (i == 0) {
        path.push_back({t.edge.polygon, t.edge.edge, t.coeff});
        continue;
      }
      const int prev_end = cs.vertex_class(end_corner(cs, path.back()));
      bool ok[2];
      for (int sh = 0; sh < 2; ++sh) {
        const LiftedTerm cand{t.edge.polygon + sh * f, t.edge.edge, t.coeff};
        ok[sh] = cs.vertex_class(start_corner(cs, cand)) == prev_end;
      }
      if (!ok[0] && !ok[1]) throw Error(ErrorCode::InvalidArgument, "chain " + nc.name + " is not a connected path");
      if (!ok[sheet]) sheet = 1 - sheet;
      path.push_back({t.edge.polygon + sheet * f, t.edge.edge, t.coeff});
    }
    if (closed) {
      const int first = cs.vertex_class(start_corner(cs, path.front()));
      const int last = cs.vertex_class(end_corner(cs, path.back()));
      if (first != last) {
        // The lift of a closed path closes iff its holonomy is trivial.
        const bool base_closed =
            base.vertex_class({path.front().polygon % f, start_corner(cs, path.front()).edge}) ==
            base.vertex_class({path.back().polygon % f, end_corner(cs, path.back()).edge});
        if (base_closed) throw Error(ErrorCode::HolonomyObstruction, nc.name + " has nontrivial linear holonomy");
        throw Error(ErrorCode::InvalidArgument, "absolute class " + nc.name + " is not closed");
      }
    }
    std::vector<int> v(static_cast<size_t>(cs.surface_edge_count()), 0);
    for (const auto& t : path) {
      const EdgeRef e1{t.polygon, t.edge};
      const EdgeRef e2{cover.deck[static_cast<size_t>(t.polygon)], t.edge};
      v[static_cast<size_t>(cs.surface_edge(e1))] += t.coeff * cs.surface_edge_orientation(e1);
      v[static_cast<size_t>(cs.surface_edge(e2))] -= t.coeff * cs.surface_edge_orientation(e2);
    }
    if (relative_homology_rank(cs, {v}) == 0)
      throw Error(ErrorCode::HolonomyObstruction, nc.name + " lifts to a deck-invariant class (hat image is zero)");
    out.classes.push_back({nc.name, std::move(v)});
  };

  for (const auto& nc : basis.absolute) lift(nc, true);
  for (const auto& nc : basis.relative) lift(nc, false);

  std::vector<std::vector<int>> vecs;
  for (const auto& c : out.classes) vecs.push_back(c.coefficients);
  out.rank = relative_homology_rank(cs, vecs);
  const StratumInfo info = stratum_of(base);
  out.expected_dimension =
      2 * info.genus + static_cast<int>(info.signature.multiplicities.size()) - 2;
  return out;
}

std::vector<int> independent_subset(const HalfTranslationSurface& cover_surface, const std::vector<HatClass>& classes) {
  std::vector<int> picked;
  std::vector<std::vector<int>> vecs;
  int rank = 0;
  for (size_t i = 0; i < classes.size(); ++i) {
    vecs.push_back(classes[i].coefficients);
    const int r = relative_homology_rank(cover_surface, vecs);
    if (r > rank) {
      rank = r;
      picked.push_back(static_cast<int>(i));
    } else {
      vecs.pop_back();
    }
  }
  return picked;
}

}  // namespace wtl
