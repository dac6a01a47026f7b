#pragma once

#include <string>

#include "polymesh/geometry.hpp"
#include "polymesh/json_util.hpp"

namespace polymesh::geometry {

// Body description format:
//   {"dim": d,
//    "shape": {"type": "hpolytope", "halfspaces": [{"normal": [...], "offset": b}, ...]}
//           | {"type": "vpolytope", "vertices": [[...], ...]}
//           | {"type": "ball", "center": [...], "radius": r}
//           | {"type": "ellipsoid", "center": [...], "axes": [[...], ...]},
//    "transform": {"matrix": [[...], ...], "shift": [...]}}      (optional)
ConvexBody body_from_json(const json& j);
json body_to_json(const ConvexBody& body);
ConvexBody load_body(const std::string& path);

json affine_to_json(const AffineMap& map);
AffineMap affine_from_json(const json& j);

// Hash of the canonical serialization; binds meshes and reports to a body.
std::string body_fingerprint(const ConvexBody& body);

}  // namespace polymesh::geometry
