#include "tads/dot.hpp"

namespace tads {

namespace {
std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}
}  // namespace

std::string to_dot(const Tads& t, const std::string& graph_name) {
  std::string out = "digraph \"" + escape(graph_name) + "\" {\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    const std::string name = "n" + std::to_string(i);
    if (t.is_leaf(id)) {
      out += "  " + name + " [shape=box, label=\"" + escape(t.leaf(id).fn.to_string(4)) + "\"];\n";
    } else {
      const auto& in = t.inner(id);
      out += "  " + name + " [shape=ellipse, label=\"" + escape(in.pred.to_string(4)) + "\"];\n";
    }
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (t.is_leaf(id)) continue;
    const auto& in = t.inner(id);
    out += "  n" + std::to_string(i) + " -> n" + std::to_string(in.hi) + " [style=solid];\n";
    out += "  n" + std::to_string(i) + " -> n" + std::to_string(in.lo) + " [style=dashed];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace tads
