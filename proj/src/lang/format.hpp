#pragma once

#include <string>

#include "../model.hpp"

namespace aidl::lang {

// Canonical program text: statement order params/geometry/children/constraints,
// canonical constraint names, shortest round-trip decimals. Re-parsing the
// output reproduces an isomorphic model.
std::string format(const Model& m);

}  // namespace aidl::lang
