#include "wtl/surface_io.hpp"

#include "wtl/error.hpp"

namespace wtl {

nlohmann::json surface_to_json(const HalfTranslationSurface& s) {
  nlohmann::json polys = nlohmann::json::array();
  for (const auto& p : s.polygons()) {
    nlohmann::json verts = nlohmann::json::array();
    for (const auto& v : p.vertices) verts.push_back({v.x, v.y});
    polys.push_back(std::move(verts));
  }
  nlohmann::json glue = nlohmann::json::array();
  for (const auto& pr : s.gluing().pairs) {
    glue.push_back({{pr.a.polygon, pr.a.edge}, {pr.b.polygon, pr.b.edge}, pr.sign});
  }
  return {{"polygons", std::move(polys)}, {"gluings", std::move(glue)}};
}

HalfTranslationSurface surface_from_json(const nlohmann::json& j) {
  try {
    std::vector<PlanarPolygon> polys;
    for (const auto& jp : j.at("polygons")) {
      PlanarPolygon p;
      for (const auto& v : jp) p.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
      polys.push_back(std::move(p));
    }
    EdgeGluing g;
    for (const auto& jg : j.at("gluings")) {
      g.pairs.push_back({{jg.at(0).at(0).get<int>(), jg.at(0).at(1).get<int>()},
                         {jg.at(1).at(0).get<int>(), jg.at(1).at(1).get<int>()},
                         jg.at(2).get<int>()});
    }
    return build_surface(std::move(polys), std::move(g));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed surface JSON: ") + e.what());
  }
}

}  // namespace wtl
