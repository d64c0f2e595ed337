#pragma once

#include <json.hpp>

#include "wtl/surface.hpp"

namespace wtl {

/// {"polygons": [[[x,y],...],...], "gluings": [[[p,e],[p,e],sign],...]}
nlohmann::json surface_to_json(const HalfTranslationSurface& s);
HalfTranslationSurface surface_from_json(const nlohmann::json& j);

}  // namespace wtl
