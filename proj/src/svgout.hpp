#pragma once

#include <string>

#include "geobool.hpp"

namespace aidl {

// Deterministic SVG: faces as even-odd filled paths, drawing edges as stroked
// polylines, viewBox padded 5% around the scene. Identical scenes render to
// byte-identical files.
std::string render_svg(const geobool::SceneOutput& scene, double chord_tol);

}  // namespace aidl
