// hybrid.hpp - the combined store: a semantic net, script templates, the
// cross-links that tie script elements to net nodes, and episodes.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "hkr/script.hpp"
#include "hkr/semnet.hpp"

namespace hkr::hybrid {

enum class ElementKind { Role, Prop, EventObject };

// A script element addressable from outside: a role, a prop, or the object
// slot of one event (scene number + 1-based event index).
struct ScriptElementRef {
  std::string script;
  ElementKind kind = ElementKind::Role;
  std::string symbol;  // role symbol or prop name
  int scene = 0;       // EventObject only
  int event = 0;       // EventObject only, 1-based

  friend bool operator<(const ScriptElementRef& a, const ScriptElementRef& b) {
    if (a.script != b.script) return a.script < b.script;
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.symbol != b.symbol) return a.symbol < b.symbol;
    if (a.scene != b.scene) return a.scene < b.scene;
    return a.event < b.event;
  }
  friend bool operator==(const ScriptElementRef& a, const ScriptElementRef& b) {
    return !(a < b) && !(b < a);
  }
};

std::string render(const ScriptElementRef& ref);

// Role links bind a role to the class its fillers must belong to; prop and
// event-object links say which net node the element denotes. Directional,
// script side to net side only.
enum class HybridRelation { BoundTo, Denotes };

struct HybridLink {
  ScriptElementRef from;
  semnet::NodeId to;
  HybridRelation relation = HybridRelation::BoundTo;

  friend bool operator<(const HybridLink& a, const HybridLink& b) {
    if (!(a.from == b.from)) return a.from < b.from;
    if (a.to != b.to) return a.to < b.to;
    return a.relation < b.relation;
  }
};

struct HybridKb {
  semnet::Kb net;
  std::map<std::string, script::Script> scripts;
  std::set<HybridLink> links;
  std::vector<script::Episode> episodes;
};

// Validates and stores a script. Throws InvalidScript (first diagnostic) or
// DuplicateScript.
void add_script(HybridKb& kb, script::Script script);

// Stores a cross-link. The relation is canonicalized from the element kind:
// roles are BoundTo, props and event objects Denote. Throws
// DanglingScriptElement / DanglingNode / RoleLinkToNonClass / DuplicateLink.
void add_hybrid_link(HybridKb& kb, HybridLink link);

// Appends an episode; its script must exist. Returns the episode index.
std::size_t add_episode(HybridKb& kb, script::Episode episode);

struct BindingViolation {
  std::string role;
  semnet::NodeId bound;
  semnet::NodeId required;  // the class the role is linked to
};

// For every role of the episode's script with a BoundTo link and a binding,
// checks is_a(bound instance, linked class). Report form; never throws for
// content reasons.
std::vector<BindingViolation> check_binding_consistency(
    const HybridKb& kb, const script::Episode& episode);

struct RoleResolution {
  semnet::NodeId linked_class;
  std::map<std::string, semnet::AttributeRecord> attributes;
  std::set<semnet::NodeId> generalization_children;  // X with (X is-a class)
};

// The net-side detail behind a role: the linked class's inherited attributes
// plus its direct generalization children. Throws UnknownScript /
// UndeclaredRole / UnlinkedRole.
RoleResolution resolve_role_attributes(const HybridKb& kb,
                                       const std::string& script_name,
                                       const std::string& role);

}  // namespace hkr::hybrid
