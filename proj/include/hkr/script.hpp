// script.hpp - stereotyped event templates: scenes, transitions, episode
// instantiation and gap filling over partially observed event sequences.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "hkr/semnet.hpp"

namespace hkr::script {

inline constexpr const char* kWildcard = "?";

// A checkable condition over the net. Subject/object tokens that name
// declared roles are substituted at evaluation time; "?" as object matches
// any value.
struct Pattern {
  std::string subject;
  std::string predicate;
  std::string object;
};

inline bool operator==(const Pattern& a, const Pattern& b) {
  return a.subject == b.subject && a.predicate == b.predicate &&
         a.object == b.object;
}

std::string render(const Pattern& p);

// One step of a scene. The actor is a role symbol (may be empty in raw
// observations); the object may name a role, a prop, or be a literal, and
// may be absent.
struct Event {
  std::string actor;
  std::string action;
  std::string object;
};

inline bool operator==(const Event& a, const Event& b) {
  return a.actor == b.actor && a.action == b.action && a.object == b.object;
}
inline bool operator<(const Event& a, const Event& b) {
  if (a.actor != b.actor) return a.actor < b.actor;
  if (a.action != b.action) return a.action < b.action;
  return a.object < b.object;
}

std::string render(const Event& e);

// Conditional jump out of a scene. The condition is carried data: it is
// round-tripped and reported but not evaluated during path search, where
// transitions act as alternative edges.
struct Transition {
  int target = 0;
  Pattern condition;
};

struct Scene {
  int number = 0;
  std::string name;
  std::vector<Event> events;
  std::vector<Transition> transitions;
};

struct Script {
  std::string name;
  std::string track;
  std::vector<std::string> props;
  std::map<std::string, std::string> roles;  // symbol -> description
  std::vector<Pattern> entry_conditions;
  std::vector<Pattern> results;
  std::vector<Scene> scenes;  // ascending scene numbers

  const Scene* scene(int number) const;
  bool has_prop(const std::string& name) const;
};

enum class EpisodeStatus { Open, Completed };

// One concrete run of a script. Observed holds the matched script events
// (prop symbols substituted), inferred the remaining events along the path;
// together they partition the path's event sequence.
struct Episode {
  std::string script;
  std::map<std::string, std::string> bindings;  // role -> node
  std::vector<Event> observed;
  std::vector<Event> inferred;
  std::vector<int> scene_path;
  EpisodeStatus status = EpisodeStatus::Open;
};

// All invariant violations: undeclared roles, bad scene numbering, empty
// scenes, bad transition targets. Empty result means the script is valid.
std::vector<std::string> validate(const Script& script);

// Checks that every role is bound to an existing node and every entry
// condition holds in the net (directly or by inheritance). Throws
// UnboundRole / UndeclaredRole / UnknownNode / EntryConditionFailed, the
// latter naming the first failing condition in declaration order.
Episode instantiate(const semnet::Kb& kb, const Script& script,
                    const std::map<std::string, std::string>& bindings);

struct GapFill {
  std::vector<int> scene_path;
  std::vector<Event> observed;  // matched path events, in path order
  std::vector<Event> inferred;  // unmatched path events, in path order
  std::map<std::string, std::string> bindings;  // role + prop unifications
};

// Finds the cheapest scene path (entered at scene 1, ending at the last
// scene; cost = events traversed) that embeds the observations in order,
// unifying role and prop symbols greedily left to right. Ties prefer the
// lexicographically smaller scene sequence. Throws NoAlignment when no such
// path exists.
GapFill gap_fill(const Script& script, const std::vector<Event>& observed,
                 const std::map<std::string, std::string>& bindings = {});

Episode gap_fill_episode(const Script& script,
                         const std::vector<Event>& observed);

// Recomputes an open episode's path from its accumulated observations,
// keeping its role bindings. Precondition for completing it.
void apply_gap_fill(const Script& script, Episode& episode);

// Actor/object resolved through role bindings; used when matching episode
// events against queries.
Event resolve(const Event& e,
              const std::map<std::string, std::string>& bindings);

}  // namespace hkr::script
