#pragma once

#include <string>

#include "tads/tads.hpp"

namespace tads {

// Graphviz rendering, nodes in id order.  Inner nodes are labeled with their
// predicate ("a·x0 + b·x1 + c >= 0", 4 significant digits); leaves are boxes
// holding the affine function.  Solid edges are the true branch, dashed the
// false branch.
std::string to_dot(const Tads& t, const std::string& graph_name = "tads");

}  // namespace tads
