#include "hkr/script.hpp"

#include <algorithm>
#include <set>

namespace hkr::script {

std::string render(const Pattern& p) {
  return "(" + p.subject + " " + p.predicate + " " + p.object + ")";
}

std::string render(const Event& e) {
  std::string actor = e.actor.empty() ? std::string(kWildcard) : e.actor;
  std::string out = "(" + actor + " " + e.action;
  if (!e.object.empty()) out += " " + e.object;
  return out + ")";
}

const Scene* Script::scene(int number) const {
  for (const Scene& s : scenes)
    if (s.number == number) return &s;
  return nullptr;
}

bool Script::has_prop(const std::string& name) const {
  return std::find(props.begin(), props.end(), name) != props.end();
}

std::vector<std::string> validate(const Script& script) {
  std::vector<std::string> issues;
  if (script.name.empty()) issues.push_back("script has no name");
  for (std::size_t i = 0; i < script.scenes.size(); ++i) {
    const Scene& sc = script.scenes[i];
    if (sc.number != static_cast<int>(i) + 1)
      issues.push_back("scene numbers must run 1.." +
                       std::to_string(script.scenes.size()) +
                       " without gaps; found scene " +
                       std::to_string(sc.number) + " at position " +
                       std::to_string(i + 1));
    if (sc.events.empty())
      issues.push_back("scene " + std::to_string(sc.number) +
                       " has no events");
    for (const Event& e : sc.events)
      if (!script.roles.count(e.actor))
        issues.push_back("undeclared role " + e.actor + " in scene " +
                         std::to_string(sc.number));
    for (const Transition& t : sc.transitions) {
      if (t.target == sc.number)
        issues.push_back("transition from scene " +
                         std::to_string(sc.number) + " to itself");
      else if (!script.scene(t.target))
        issues.push_back("unknown scene " + std::to_string(t.target) +
                         " in transition from scene " +
                         std::to_string(sc.number));
    }
  }
  return issues;
}

namespace {

std::string substitute(const std::string& token,
                       const std::map<std::string, std::string>& bindings) {
  auto it = bindings.find(token);
  return it == bindings.end() ? token : it->second;
}

// Greedy unification state while walking a scene path.
struct MatchState {
  std::size_t next = 0;  // observations consumed so far
  std::map<std::string, std::string> bind;
  std::vector<bool> matched;  // per path event, aligned with path order

  bool operator<(const MatchState&) const = delete;
};

bool symbolic(const Script& s, const std::string& token) {
  return s.roles.count(token) > 0 || s.has_prop(token);
}

// Script token vs concrete observed token. Symbols (roles, props) bind on
// first use and must agree afterwards.
bool unify_token(const Script& s, const std::string& script_tok,
                 const std::string& obs_tok,
                 std::map<std::string, std::string>& bind) {
  if (obs_tok.empty()) return true;  // unspecified in the observation
  if (script_tok.empty()) return false;
  if (script_tok == obs_tok) return true;
  if (symbolic(s, script_tok)) {
    auto it = bind.find(script_tok);
    if (it == bind.end()) {
      bind[script_tok] = obs_tok;
      return true;
    }
    return it->second == obs_tok;
  }
  return false;
}

// Feed one path event through the matcher; consumes the next observation
// when it matches.
void feed(const Script& s, const Event& ev,
          const std::vector<Event>& observed, MatchState& st) {
  bool consumed = false;
  if (st.next < observed.size()) {
    const Event& obs = observed[st.next];
    if (obs.action == ev.action) {
      auto bind = st.bind;
      if (unify_token(s, ev.actor, obs.actor, bind) &&
          unify_token(s, ev.object, obs.object, bind)) {
        st.bind = std::move(bind);
        ++st.next;
        consumed = true;
      }
    }
  }
  st.matched.push_back(consumed);
}

MatchState traverse_scene(const Script& s, const Scene& scene,
                          const std::vector<Event>& observed,
                          MatchState st) {
  for (const Event& ev : scene.events) feed(s, ev, observed, st);
  return st;
}

Event materialize(const Script& s, const Event& ev,
                  const std::map<std::string, std::string>& bind) {
  // Prop symbols are substituted into the stored events; role symbols stay
  // and are resolved through the episode bindings at query time.
  Event out = ev;
  if (s.has_prop(ev.object)) out.object = substitute(ev.object, bind);
  return out;
}

}  // namespace

Episode instantiate(const semnet::Kb& kb, const Script& script,
                    const std::map<std::string, std::string>& bindings) {
  for (const auto& [role, desc] : script.roles) {
    (void)desc;
    if (!bindings.count(role))
      fail(ErrCode::UnboundRole, "role '" + role + "' is not bound");
  }
  for (const auto& [role, node] : bindings) {
    if (!script.roles.count(role))
      fail(ErrCode::UndeclaredRole,
           "binding names undeclared role '" + role + "'");
    if (!kb.has_node(node))
      fail(ErrCode::UnknownNode,
           "role '" + role + "' bound to unknown node '" + node + "'");
  }
  for (const Pattern& p : script.entry_conditions) {
    std::string subject = substitute(p.subject, bindings);
    std::optional<std::string> object;
    if (p.object != kWildcard) object = substitute(p.object, bindings);
    if (!kb.fact_support(subject, p.predicate, object))
      fail(ErrCode::EntryConditionFailed,
           "entry condition not satisfied: " + render(p));
  }
  Episode ep;
  ep.script = script.name;
  ep.bindings = bindings;
  return ep;
}

GapFill gap_fill(const Script& script, const std::vector<Event>& observed,
                 const std::map<std::string, std::string>& bindings) {
  if (auto issues = validate(script); !issues.empty())
    fail(ErrCode::InvalidScript, issues.front());
  if (script.scenes.empty())
    fail(ErrCode::NoAlignment, "script '" + script.name + "' has no scenes");
  if (observed.empty())
    fail(ErrCode::NoAlignment, "no observed events to align");

  const int last = static_cast<int>(script.scenes.size());

  // Uniform-cost search over (scene, consumed, bindings) states. The
  // frontier is keyed by (cost, path); std::set pops the cheapest path and
  // breaks cost ties by lexicographic scene sequence, which is exactly the
  // required tie-break.
  using PathKey = std::pair<int, std::vector<int>>;
  std::set<PathKey> frontier;
  std::map<std::vector<int>, MatchState> state_of;

  using StateKey =
      std::tuple<int, std::size_t, std::map<std::string, std::string>>;
  std::map<StateKey, PathKey> visited;

  MatchState start;
  start.bind = bindings;
  start = traverse_scene(script, script.scenes[0], observed, start);
  std::vector<int> start_path{1};
  int start_cost = static_cast<int>(script.scenes[0].events.size());
  frontier.insert({start_cost, start_path});
  state_of[start_path] = start;
  visited[{1, start.next, start.bind}] = {start_cost, start_path};

  while (!frontier.empty()) {
    auto [cost, path] = *frontier.begin();
    frontier.erase(frontier.begin());
    MatchState st = state_of.at(path);
    int scene_no = path.back();

    if (scene_no == last && st.next == observed.size()) {
      GapFill out;
      out.scene_path = path;
      out.bindings = st.bind;
      std::size_t pos = 0;
      for (int n : path) {
        for (const Event& ev : script.scene(n)->events) {
          Event mat = materialize(script, ev, st.bind);
          if (st.matched[pos])
            out.observed.push_back(mat);
          else
            out.inferred.push_back(mat);
          ++pos;
        }
      }
      return out;
    }

    std::vector<int> successors;
    if (scene_no < last) successors.push_back(scene_no + 1);
    for (const Transition& t : script.scene(scene_no)->transitions)
      if (t.target != scene_no) successors.push_back(t.target);

    for (int succ : successors) {
      const Scene* sc = script.scene(succ);
      if (!sc) continue;
      std::vector<int> next_path = path;
      next_path.push_back(succ);
      MatchState next_state = traverse_scene(script, *sc, observed, st);
      int next_cost = cost + static_cast<int>(sc->events.size());
      StateKey key{succ, next_state.next, next_state.bind};
      PathKey pk{next_cost, next_path};
      auto it = visited.find(key);
      if (it != visited.end() && it->second <= pk) continue;
      visited[key] = pk;
      frontier.insert(pk);
      state_of[next_path] = std::move(next_state);
    }
  }
  fail(ErrCode::NoAlignment,
       "observed events cannot be ordered along any scene path of '" +
           script.name + "'");
}

Episode gap_fill_episode(const Script& script,
                         const std::vector<Event>& observed) {
  GapFill g = gap_fill(script, observed);
  Episode ep;
  ep.script = script.name;
  for (const auto& [sym, value] : g.bindings)
    if (script.roles.count(sym)) ep.bindings[sym] = value;
  ep.observed = g.observed;
  ep.inferred = g.inferred;
  ep.scene_path = g.scene_path;
  return ep;
}

void apply_gap_fill(const Script& script, Episode& episode) {
  GapFill g = gap_fill(script, episode.observed, episode.bindings);
  for (const auto& [sym, value] : g.bindings)
    if (script.roles.count(sym)) episode.bindings[sym] = value;
  episode.observed = g.observed;
  episode.inferred = g.inferred;
  episode.scene_path = g.scene_path;
}

Event resolve(const Event& e,
              const std::map<std::string, std::string>& bindings) {
  Event out = e;
  out.actor = substitute(e.actor, bindings);
  out.object = substitute(e.object, bindings);
  return out;
}

}  // namespace hkr::script
