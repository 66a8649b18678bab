// semnet.hpp - partitioned semantic network: nodes, labeled links, spaces,
// and the structural queries (ancestors, inheritance, is-a, visibility).
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hkr/errors.hpp"

namespace hkr::semnet {

using NodeId = std::string;
using SpaceId = std::string;

inline constexpr const char* kRootSpace = "s0";

// Built-in relation names. Everything else is a named relation.
inline constexpr const char* kIsA = "is-a";
inline constexpr const char* kInstanceOf = "instance";
inline constexpr const char* kHas = "has";

enum class NodeKind { GenericClass, Instance, Value };
enum class SpaceKind { Ordinary, GeneralStatement };
enum class LinkKind { IsA, InstanceOf, Has, Named };

inline LinkKind link_kind(const std::string& label) {
  if (label == kIsA) return LinkKind::IsA;
  if (label == kInstanceOf) return LinkKind::InstanceOf;
  if (label == kHas) return LinkKind::Has;
  return LinkKind::Named;
}

struct Node {
  NodeId id;
  NodeKind kind = NodeKind::GenericClass;
  std::string label;  // display name; defaults to id
  SpaceId space = kRootSpace;
};

// Unidirectional. Identity is the (from, label, to) triple; the space is
// payload and does not distinguish two links.
struct Link {
  NodeId from;
  std::string label;
  NodeId to;
  SpaceId space = kRootSpace;
};

inline bool operator<(const Link& a, const Link& b) {
  if (a.from != b.from) return a.from < b.from;
  if (a.label != b.label) return a.label < b.label;
  return a.to < b.to;
}
inline bool operator==(const Link& a, const Link& b) {
  return a.from == b.from && a.label == b.label && a.to == b.to;
}

// Spaces nest in a tree rooted at s0. GeneralStatement spaces hold the
// universally quantified variable nodes of a general statement; the engine
// stores and round-trips them but does not expand them into ground facts.
struct Space {
  SpaceId id;
  std::optional<SpaceId> parent;  // empty only for the root
  SpaceKind kind = SpaceKind::Ordinary;
  std::optional<NodeId> agent;  // belief spaces
};

struct AttributeRecord {
  std::string attribute;
  NodeId value;
  NodeId source;  // node the value was asserted on
  int depth = 0;  // 0 iff source is the queried node itself
};

class Kb {
 public:
  Kb();  // starts with the root space

  // Mutations validate fully before touching state, so a throw leaves the
  // KB unchanged.
  void add_space(const Space& space);
  void add_node(const Node& node);
  void add_link(const Link& link);

  bool has_space(const SpaceId& id) const { return spaces_.count(id) > 0; }
  bool has_node(const NodeId& id) const { return nodes_.count(id) > 0; }
  bool has_link(const NodeId& from, const std::string& label,
                const NodeId& to) const;
  const Space& space(const SpaceId& id) const;  // throws UnknownSpace
  const Node& node(const NodeId& id) const;     // throws UnknownNode

  // True if adding (from is-a to) would close a cycle in the is-a subgraph.
  bool would_create_isa_cycle(const NodeId& from, const NodeId& to) const;

  // All generalization ancestors over instance/is-a edges, minimal depth per
  // node, ordered by (depth, id). The node itself is excluded.
  std::vector<std::pair<NodeId, int>> ancestors(const NodeId& id) const;

  // Most-specific attribute per name: minimal depth wins, ties broken by
  // (source id, value id).
  std::map<std::string, AttributeRecord> inherited_attributes(
      const NodeId& id) const;

  // Reachability over instance/is-a edges; identical ids count as true.
  bool is_a(const NodeId& a, const NodeId& b) const;

  // Outgoing links of a subject ordered by (label, target), optionally
  // filtered to one label.
  std::vector<Link> relations_of(
      const NodeId& subject,
      const std::optional<std::string>& label = std::nullopt) const;

  //Nodes owned by the space or by any ancestor space in the nesting tree.
  std::set<NodeId> visible_nodes(const SpaceId& id) const;

  // The cheapest support for (subject predicate object): the record whose
  // source is the nearest ancestor (self at depth 0) asserting it. An empty
  // object matches any value. Shared by entry-condition checks and ASK.
  std::optional<AttributeRecord> fact_support(
      const NodeId& subject, const std::string& predicate,
      const std::optional<NodeId>& object) const;

  // Per distinct value, the minimal-depth support of (subject predicate _).
  std::map<NodeId, AttributeRecord> predicate_supports(
      const NodeId& subject, const std::string& predicate) const;

  // The is-a/instance edge sequence from `from` up to its ancestor `to`,
  // following the deterministic BFS tree. Empty when from == to.
  std::vector<Link> inheritance_path(const NodeId& from,
                                     const NodeId& to) const;

  const std::map<NodeId, Node>& nodes() const { return nodes_; }
  const std::map<SpaceId, Space>& spaces() const { return spaces_; }
  std::vector<Link> links() const;  // sorted by (from, label, to)
  const std::set<Link>& outgoing(const NodeId& id) const;
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t link_count() const { return link_count_; }

 private:
  // Depth map over instance/is-a edges, self included at depth 0.
  std::map<NodeId, int> generalization_depths(const NodeId& id) const;

  std::map<NodeId, Node> nodes_;
  std::map<SpaceId, Space> spaces_;
  std::map<NodeId, std::set<Link>> out_;
  std::size_t link_count_ = 0;
};

}  // namespace hkr::semnet
