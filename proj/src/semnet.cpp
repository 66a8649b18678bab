#include "hkr/semnet.hpp"

#include <algorithm>
#include <deque>

namespace hkr::semnet {

namespace {

bool generalization_edge(const Link& l) {
  LinkKind k = link_kind(l.label);
  return k == LinkKind::IsA || k == LinkKind::InstanceOf;
}

}  // namespace

Kb::Kb() {
  spaces_[kRootSpace] =
      Space{kRootSpace, std::nullopt, SpaceKind::Ordinary, std::nullopt};
}

void Kb::add_space(const Space& space) {
  if (space.id.empty()) fail(ErrCode::UnknownSpace, "space id is empty");
  if (spaces_.count(space.id))
    fail(ErrCode::DuplicateSpace, "space '" + space.id + "' already declared");
  if (!space.parent)
    fail(ErrCode::UnknownSpace,
         "space '" + space.id + "' must name a parent space");
  if (!spaces_.count(*space.parent))
    fail(ErrCode::UnknownSpace, "unknown parent space '" + *space.parent +
                                    "' for space '" + space.id + "'");
  spaces_[space.id] = space;
}

void Kb::add_node(const Node& node) {
  if (node.id.empty()) fail(ErrCode::UnknownNode, "node id is empty");
  if (nodes_.count(node.id))
    fail(ErrCode::DuplicateNode, "node '" + node.id + "' already defined");
  if (!spaces_.count(node.space))
    fail(ErrCode::UnknownSpace,
         "unknown space '" + node.space + "' for node '" + node.id + "'");
  Node stored = node;
  if (stored.label.empty()) stored.label = stored.id;
  nodes_[stored.id] = stored;
}

void Kb::add_link(const Link& link) {
  auto from = nodes_.find(link.from);
  if (from == nodes_.end())
    fail(ErrCode::UnknownNode, "unknown node '" + link.from + "'");
  auto to = nodes_.find(link.to);
  if (to == nodes_.end())
    fail(ErrCode::UnknownNode, "unknown node '" + link.to + "'");
  if (link.label.empty())
    fail(ErrCode::KindMismatch, "link label is empty");
  if (!spaces_.count(link.space))
    fail(ErrCode::UnknownSpace,
         "unknown space '" + link.space + "' for link");
  if (has_link(link.from, link.label, link.to))
    fail(ErrCode::DuplicateLink, "duplicate link (" + link.from + " " +
                                     link.label + " " + link.to + ")");

  switch (link_kind(link.label)) {
    case LinkKind::IsA:
      if (from->second.kind != NodeKind::GenericClass ||
          to->second.kind != NodeKind::GenericClass)
        fail(ErrCode::KindMismatch,
             "is-a links connect generic classes: (" + link.from + " is-a " +
                 link.to + ")");
      if (would_create_isa_cycle(link.from, link.to))
        fail(ErrCode::CycleDetected, "is-a cycle through (" + link.from +
                                         " is-a " + link.to + ")");
      break;
    case LinkKind::InstanceOf:
      if (from->second.kind != NodeKind::Instance ||
          to->second.kind != NodeKind::GenericClass)
        fail(ErrCode::KindMismatch,
             "instance links connect an instance to a generic class: (" +
                 link.from + " instance " + link.to + ")");
      break;
    default:
      break;  // has / named relations carry no kind constraints
  }

  out_[link.from].insert(link);
  ++link_count_;
}

bool Kb::has_link(const NodeId& from, const std::string& label,
                  const NodeId& to) const {
  auto it = out_.find(from);
  if (it == out_.end()) return false;
  return it->second.count(Link{from, label, to, kRootSpace}) > 0;
}

const Space& Kb::space(const SpaceId& id) const {
  auto it = spaces_.find(id);
  if (it == spaces_.end())
    fail(ErrCode::UnknownSpace, "unknown space '" + id + "'");
  return it->second;
}

const Node& Kb::node(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end())
    fail(ErrCode::UnknownNode, "unknown node '" + id + "'");
  return it->second;
}

const std::set<Link>& Kb::outgoing(const NodeId& id) const {
  static const std::set<Link> empty;
  auto it = out_.find(id);
  return it == out_.end() ? empty : it->second;
}

bool Kb::would_create_isa_cycle(const NodeId& from, const NodeId& to) const {
  // A new edge from->to closes a cycle iff `from` is reachable from `to`
  // along existing is-a edges.
  if (from == to) return true;
  std::deque<NodeId> frontier{to};
  std::set<NodeId> seen{to};
  while (!frontier.empty()) {
    NodeId cur = frontier.front();
    frontier.pop_front();
    for (const Link& l : outgoing(cur)) {
      if (link_kind(l.label) != LinkKind::IsA) continue;
      if (l.to == from) return true;
      if (seen.insert(l.to).second) frontier.push_back(l.to);
    }
  }
  return false;
}

std::map<NodeId, int> Kb::generalization_depths(const NodeId& id) const {
  std::map<NodeId, int> depth;
  depth[id] = 0;
  std::deque<NodeId> frontier{id};
  while (!frontier.empty()) {
    NodeId cur = frontier.front();
    frontier.pop_front();
    for (const Link& l : outgoing(cur)) {
      if (!generalization_edge(l)) continue;
      if (depth.count(l.to)) continue;
      depth[l.to] = depth[cur] + 1;
      frontier.push_back(l.to);
    }
  }
  return depth;
}

std::vector<std::pair<NodeId, int>> Kb::ancestors(const NodeId& id) const {
  node(id);  // existence check
  auto depth = generalization_depths(id);
  std::vector<std::pair<NodeId, int>> out;
  out.reserve(depth.size());
  for (const auto& [n, d] : depth)
    if (n != id) out.emplace_back(n, d);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  return out;
}

std::map<std::string, AttributeRecord> Kb::inherited_attributes(
    const NodeId& id) const {
  node(id);
  std::map<std::string, AttributeRecord> best;
  auto consider = [&](const NodeId& source, int depth) {
    for (const Link& l : outgoing(source)) {
      if (generalization_edge(l)) continue;
      AttributeRecord rec{l.label, l.to, source, depth};
      auto it = best.find(l.label);
      if (it == best.end()) {
        best[l.label] = rec;
        continue;
      }
      const AttributeRecord& cur = it->second;
      auto key = [](const AttributeRecord& r) {
        return std::tie(r.depth, r.source, r.value);
      };
      if (key(rec) < key(cur)) it->second = rec;
    }
  };
  consider(id, 0);
  for (const auto& [anc, d] : ancestors(id)) consider(anc, d);
  return best;
}

bool Kb::is_a(const NodeId& a, const NodeId& b) const {
  node(a);
  node(b);
  if (a == b) return true;
  return generalization_depths(a).count(b) > 0;
}

std::vector<Link> Kb::relations_of(
    const NodeId& subject, const std::optional<std::string>& label) const {
  node(subject);
  std::vector<Link> out;
  for (const Link& l : outgoing(subject)) {
    if (label && l.label != *label) continue;
    out.push_back(l);
  }
  std::sort(out.begin(), out.end(), [](const Link& a, const Link& b) {
    return a.label != b.label ? a.label < b.label : a.to < b.to;
  });
  return out;
}

std::set<NodeId> Kb::visible_nodes(const SpaceId& id) const {
  space(id);
  std::set<SpaceId> chain;
  const Space* cur = &space(id);
  while (true) {
    chain.insert(cur->id);
    if (!cur->parent) break;
    cur = &space(*cur->parent);
  }
  std::set<NodeId> out;
  for (const auto& [nid, n] : nodes_)
    if (chain.count(n.space)) out.insert(nid);
  return out;
}

std::optional<AttributeRecord> Kb::fact_support(
    const NodeId& subject, const std::string& predicate,
    const std::optional<NodeId>& object) const {
  if (!has_node(subject)) return std::nullopt;
  // Sources in (depth, id) order, so the first match is minimal.
  std::vector<std::pair<NodeId, int>> sources{{subject, 0}};
  for (const auto& p : ancestors(subject)) sources.push_back(p);
  for (const auto& [source, depth] : sources) {
    std::optional<NodeId> found;
    for (const Link& l : outgoing(source)) {
      if (l.label != predicate) continue;
      if (object && l.to != *object) continue;
      if (!found || l.to < *found) found = l.to;
    }
    if (found) return AttributeRecord{predicate, *found, source, depth};
  }
  return std::nullopt;
}

std::map<NodeId, AttributeRecord> Kb::predicate_supports(
    const NodeId& subject, const std::string& predicate) const {
  std::map<NodeId, AttributeRecord> out;
  if (!has_node(subject)) return out;
  std::vector<std::pair<NodeId, int>> sources{{subject, 0}};
  for (const auto& p : ancestors(subject)) sources.push_back(p);
  for (const auto& [source, depth] : sources)
    for (const Link& l : outgoing(source))
      if (l.label == predicate && !out.count(l.to))
        out[l.to] = AttributeRecord{predicate, l.to, source, depth};
  return out;
}

std::vector<Link> Kb::inheritance_path(const NodeId& from,
                                       const NodeId& to) const {
  node(from);
  node(to);
  if (from == to) return {};
  // Deterministic BFS tree: the parent edge is assigned once, on first
  // discovery, and discovery order is fixed by the sorted link sets.
  std::map<NodeId, Link> parent_edge;
  std::map<NodeId, int> depth{{from, 0}};
  std::deque<NodeId> frontier{from};
  while (!frontier.empty()) {
    NodeId cur = frontier.front();
    frontier.pop_front();
    for (const Link& l : outgoing(cur)) {
      if (!generalization_edge(l)) continue;
      if (depth.count(l.to)) continue;
      depth[l.to] = depth[cur] + 1;
      parent_edge[l.to] = l;
      frontier.push_back(l.to);
    }
  }
  if (!depth.count(to))
    fail(ErrCode::UnknownNode,
         "'" + to + "' is not an ancestor of '" + from + "'");
  std::vector<Link> path;
  NodeId cur = to;
  while (cur != from) {
    const Link& l = parent_edge.at(cur);
    path.push_back(l);
    cur = l.from;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<Link> Kb::links() const {
  std::vector<Link> out;
  out.reserve(link_count_);
  for (const auto& [id, set] : out_)
    out.insert(out.end(), set.begin(), set.end());
  return out;
}

}  // namespace hkr::semnet
