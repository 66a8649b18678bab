#include "hkr/dot_export.hpp"

#include <sstream>

namespace hkr::cli {

namespace {

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

const char* node_shape(semnet::NodeKind k) {
  switch (k) {
    case semnet::NodeKind::GenericClass: return "box";
    case semnet::NodeKind::Instance: return "ellipse";
    case semnet::NodeKind::Value: return "note";
  }
  return "box";
}

void emit_cluster(std::ostringstream& o, const hybrid::HybridKb& kb,
                  const semnet::SpaceId& space, int indent) {
  std::string pad(indent * 2, ' ');
  o << pad << "subgraph \"cluster_" << esc(space) << "\" {\n";
  o << pad << "  label=\"" << esc(space) << "\";\n";
  for (const auto& [id, n] : kb.net.nodes()) {
    if (n.space != space) continue;
    o << pad << "  \"n_" << esc(id) << "\" [label=\"" << esc(n.label)
      << "\", shape=" << node_shape(n.kind) << "];\n";
  }
  for (const auto& [id, sp] : kb.net.spaces())
    if (sp.parent && *sp.parent == space) emit_cluster(o, kb, id, indent + 1);
  o << pad << "}\n";
}

std::string element_id(const hybrid::ScriptElementRef& ref) {
  switch (ref.kind) {
    case hybrid::ElementKind::Role:
      return "se_" + ref.script + "__role_" + ref.symbol;
    case hybrid::ElementKind::Prop:
      return "se_" + ref.script + "__prop_" + ref.symbol;
    case hybrid::ElementKind::EventObject:
      return "se_" + ref.script + "__event_" + std::to_string(ref.scene) +
             "_" + std::to_string(ref.event);
  }
  return "se_" + ref.script;
}

}  // namespace

std::string export_dot(const hybrid::HybridKb& kb) {
  std::ostringstream o;
  o << "digraph kb {\n";
  o << "  rankdir=LR;\n";
  o << "  node [fontname=\"Helvetica\"];\n";
  emit_cluster(o, kb, semnet::kRootSpace, 1);

  // script elements referenced by hybrid links live outside the clusters
  std::set<std::string> emitted;
  for (const hybrid::HybridLink& l : kb.links) {
    std::string id = element_id(l.from);
    if (!emitted.insert(id).second) continue;
    o << "  \"" << esc(id) << "\" [label=\"" << esc(render(l.from))
      << "\", shape=hexagon];\n";
  }

  for (const semnet::Link& l : kb.net.links()) {
    o << "  \"n_" << esc(l.from) << "\" -> \"n_" << esc(l.to) << "\" [";
    switch (semnet::link_kind(l.label)) {
      case semnet::LinkKind::IsA:
        o << "style=solid";
        break;
      case semnet::LinkKind::InstanceOf:
        o << "style=dashed";
        break;
      default:
        o << "style=dotted, label=\"" << esc(l.label) << "\"";
        break;
    }
    o << "];\n";
  }
  for (const hybrid::HybridLink& l : kb.links)
    o << "  \"" << esc(element_id(l.from)) << "\" -> \"n_" << esc(l.to)
      << "\" [style=bold];\n";
  o << "}\n";
  return o.str();
}

}  // namespace hkr::cli
