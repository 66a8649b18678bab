#include "hkr/hybrid.hpp"

namespace hkr::hybrid {

std::string render(const ScriptElementRef& ref) {
  switch (ref.kind) {
    case ElementKind::Role:
      return ref.script + "/role " + ref.symbol;
    case ElementKind::Prop:
      return ref.script + "/prop " + ref.symbol;
    case ElementKind::EventObject:
      return ref.script + "/event " + std::to_string(ref.scene) + " " +
             std::to_string(ref.event);
  }
  return ref.script;
}

namespace {

void check_element(const HybridKb& kb, const ScriptElementRef& ref) {
  auto it = kb.scripts.find(ref.script);
  if (it == kb.scripts.end())
    fail(ErrCode::DanglingScriptElement,
         "unknown script '" + ref.script + "'");
  const script::Script& s = it->second;
  switch (ref.kind) {
    case ElementKind::Role:
      if (!s.roles.count(ref.symbol))
        fail(ErrCode::DanglingScriptElement,
             "script '" + ref.script + "' declares no role '" + ref.symbol +
                 "'");
      break;
    case ElementKind::Prop:
      if (!s.has_prop(ref.symbol))
        fail(ErrCode::DanglingScriptElement,
             "script '" + ref.script + "' lists no prop '" + ref.symbol +
                 "'");
      break;
    case ElementKind::EventObject: {
      const script::Scene* sc = s.scene(ref.scene);
      if (!sc || ref.event < 1 ||
          ref.event > static_cast<int>(sc->events.size()))
        fail(ErrCode::DanglingScriptElement,
             "script '" + ref.script + "' has no event " +
                 std::to_string(ref.event) + " in scene " +
                 std::to_string(ref.scene));
      break;
    }
  }
}

}  // namespace

void add_script(HybridKb& kb, script::Script script) {
  if (kb.scripts.count(script.name))
    fail(ErrCode::DuplicateScript,
         "script '" + script.name + "' already defined");
  if (auto issues = script::validate(script); !issues.empty())
    fail(ErrCode::InvalidScript,
         "script '" + script.name + "': " + issues.front());
  kb.scripts.emplace(script.name, std::move(script));
}

void add_hybrid_link(HybridKb& kb, HybridLink link) {
  check_element(kb, link.from);
  if (!kb.net.has_node(link.to))
    fail(ErrCode::DanglingNode, "unknown node '" + link.to + "'");
  link.relation = link.from.kind == ElementKind::Role
                      ? HybridRelation::BoundTo
                      : HybridRelation::Denotes;
  if (link.from.kind == ElementKind::Role &&
      kb.net.node(link.to).kind != semnet::NodeKind::GenericClass)
    fail(ErrCode::RoleLinkToNonClass,
         "role link target '" + link.to + "' is not a generic class");
  if (kb.links.count(link))
    fail(ErrCode::DuplicateLink,
         "duplicate hybrid link " + render(link.from) + " -> " + link.to);
  kb.links.insert(link);
}

std::size_t add_episode(HybridKb& kb, script::Episode episode) {
  if (!kb.scripts.count(episode.script))
    fail(ErrCode::UnknownScript,
         "episode references unknown script '" + episode.script + "'");
  kb.episodes.push_back(std::move(episode));
  return kb.episodes.size() - 1;
}

std::vector<BindingViolation> check_binding_consistency(
    const HybridKb& kb, const script::Episode& episode) {
  std::vector<BindingViolation> out;
  for (const HybridLink& l : kb.links) {
    if (l.from.script != episode.script ||
        l.from.kind != ElementKind::Role)
      continue;
    auto it = episode.bindings.find(l.from.symbol);
    if (it == episode.bindings.end()) continue;  // unbound roles are vacuous
    const semnet::NodeId& bound = it->second;
    if (!kb.net.has_node(bound) || !kb.net.is_a(bound, l.to))
      out.push_back({l.from.symbol, bound, l.to});
  }
  return out;
}

RoleResolution resolve_role_attributes(const HybridKb& kb,
                                       const std::string& script_name,
                                       const std::string& role) {
  auto it = kb.scripts.find(script_name);
  if (it == kb.scripts.end())
    fail(ErrCode::UnknownScript, "unknown script '" + script_name + "'");
  if (!it->second.roles.count(role))
    fail(ErrCode::UndeclaredRole, "script '" + script_name +
                                      "' declares no role '" + role + "'");
  // Lowest-sorting link wins when a role carries several.
  const HybridLink* found = nullptr;
  for (const HybridLink& l : kb.links) {
    if (l.from.script == script_name && l.from.kind == ElementKind::Role &&
        l.from.symbol == role) {
      found = &l;
      break;
    }
  }
  if (!found)
    fail(ErrCode::UnlinkedRole, "role '" + role + "' of script '" +
                                    script_name + "' has no class link");
  RoleResolution res;
  res.linked_class = found->to;
  res.attributes = kb.net.inherited_attributes(found->to);
  for (const semnet::Link& l : kb.net.links())
    if (l.label == semnet::kIsA && l.to == found->to)
      res.generalization_children.insert(l.from);
  return res;
}

}  // namespace hkr::hybrid
