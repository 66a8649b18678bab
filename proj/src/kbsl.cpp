#include "hkr/kbsl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace hkr::kbsl {

namespace {

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string map_predicate(const std::string& predicate) {
  if (predicate == "isa") return semnet::kIsA;
  return predicate;  // "is-a"/"instance"/"has" already canonical
}

TellResult rejected(const KbError& e) {
  return {TellStatus::Rejected, e.what(), e.code()};
}

TellResult tell_fact(hybrid::HybridKb& kb, const Fact& fact) {
  try {
    std::string label = map_predicate(fact.predicate);
    if (fact.subject.empty() || label.empty() || fact.object.empty())
      fail(ErrCode::MalformedQuery, "fact needs subject, predicate, object");
    if (kb.net.has_link(fact.subject, label, fact.object))
      return {TellStatus::Skipped, "", std::nullopt};
    if (!kb.net.has_node(fact.subject))
      fail(ErrCode::UnknownNode, "unknown node '" + fact.subject + "'");
    std::string space =
        fact.space.empty() ? kb.net.node(fact.subject).space : fact.space;
    if (!kb.net.has_space(space))
      fail(ErrCode::UnknownSpace, "unknown space '" + space + "'");

    semnet::LinkKind kind = semnet::link_kind(label);
    if (!kb.net.has_node(fact.object)) {
      // Accommodation: named relations and has-links may introduce their
      // value as a fresh value node; generalization links may not.
      if (kind == semnet::LinkKind::IsA || kind == semnet::LinkKind::InstanceOf)
        fail(ErrCode::UnknownNode, "unknown node '" + fact.object + "'");
      kb.net.add_node({fact.object, semnet::NodeKind::Value, "", space});
    }
    kb.net.add_link({fact.subject, label, fact.object, space});
    return {TellStatus::Accepted, "", std::nullopt};
  } catch (const KbError& e) {
    return rejected(e);
  }
}

TellResult tell_event(hybrid::HybridKb& kb, const ScriptEvent& se) {
  try {
    auto sit = kb.scripts.find(se.script);
    if (sit == kb.scripts.end())
      fail(ErrCode::UnknownScript, "unknown script '" + se.script + "'");
    const script::Script& s = sit->second;
    if (se.event.action.empty())
      fail(ErrCode::MalformedQuery, "event has no action");
    if (!s.roles.count(se.event.actor))
      fail(ErrCode::UndeclaredRole, "script '" + se.script +
                                        "' declares no role '" +
                                        se.event.actor + "'");
    script::Episode* target = nullptr;
    for (script::Episode& ep : kb.episodes)
      if (ep.script == se.script &&
          ep.status == script::EpisodeStatus::Open) {
        target = &ep;
        break;
      }
    if (!target)
      fail(ErrCode::NoOpenEpisode,
           "no open episode of script '" + se.script + "'");

    auto& observed = target->observed;
    if (std::find(observed.begin(), observed.end(), se.event) !=
        observed.end())
      return {TellStatus::Skipped, "", std::nullopt};

    // An event the gap filler already inferred is upgraded to observed so
    // the path partition stays intact.
    auto inf = std::find(target->inferred.begin(), target->inferred.end(),
                         se.event);
    if (inf != target->inferred.end()) {
      target->inferred.erase(inf);
      observed.push_back(se.event);
      return {TellStatus::Accepted, "", std::nullopt};
    }

    if (!target->scene_path.empty()) {
      // The episode already has a committed path; the new observation must
      // still align with it, so refill on a copy and roll back on failure.
      script::Episode trial = *target;
      trial.observed.push_back(se.event);
      script::apply_gap_fill(s, trial);  // throws NoAlignment
      *target = std::move(trial);
      return {TellStatus::Accepted, "", std::nullopt};
    }
    observed.push_back(se.event);
    return {TellStatus::Accepted, "", std::nullopt};
  } catch (const KbError& e) {
    return rejected(e);
  }
}

}  // namespace

TellResult tell(hybrid::HybridKb& kb, const Assertion& assertion) {
  if (const Fact* f = std::get_if<Fact>(&assertion)) return tell_fact(kb, *f);
  return tell_event(kb, std::get<ScriptEvent>(assertion));
}

std::string render(const TraceStep& step) {
  std::string out;
  switch (step.source) {
    case StepSource::Asserted:
      out = "asserted " + step.detail;
      break;
    case StepSource::Inherited:
      out = "inherited depth " + std::to_string(step.depth) + " via " +
            step.detail;
      break;
    case StepSource::ScriptInferred:
      out = "script-inferred " + step.detail;
      break;
  }
  return out + " confidence " + fmt2(step.cumulative);
}

namespace {

struct Derivation {
  double confidence = 1.0;
  std::vector<TraceStep> steps;
};

std::string fact_text(const std::string& s, const std::string& p,
                      const std::string& o) {
  return "(" + s + " " + p + " " + o + ")";
}

// Derivation through the net: the assertion at the supporting ancestor,
// then one decayed step per inheritance hop down to the subject.
Derivation net_derivation(const semnet::Kb& net, const std::string& subject,
                          const semnet::AttributeRecord& rec,
                          const ConfidenceConfig& cfg) {
  Derivation d;
  d.steps.push_back({StepSource::Asserted, 0,
                     fact_text(rec.source, rec.attribute, rec.value), 1.0});
  if (rec.depth > 0) {
    auto path = net.inheritance_path(subject, rec.source);
    double cum = 1.0;
    for (int hop = 1; hop <= rec.depth; ++hop) {
      const semnet::Link& edge = path[rec.depth - hop];
      cum *= cfg.decay;
      d.steps.push_back({StepSource::Inherited, hop,
                         fact_text(edge.from, edge.label, edge.to), cum});
    }
    d.confidence = cum;
  }
  return d;
}

Derivation event_derivation(const std::string& script_name,
                            const script::Event& ev, bool observed,
                            const ConfidenceConfig& cfg) {
  Derivation d;
  std::string detail = "(" + script_name + (observed ? " observed " : " ") +
                       script::render(ev).substr(1);
  if (observed) {
    d.steps.push_back({StepSource::Asserted, 0, detail, 1.0});
  } else {
    d.confidence = cfg.gapfill;
    d.steps.push_back({StepSource::ScriptInferred, 0, detail, cfg.gapfill});
  }
  return d;
}

bool better(const Derivation& a, const Derivation& b) {
  return a.confidence > b.confidence;
}

// Best derivation of a ground fact: direct or inherited net support first,
// then episode events read as (actor action object) facts.
std::optional<Derivation> derive_fact(const hybrid::HybridKb& kb,
                                      const std::string& subject,
                                      const std::string& predicate,
                                      const std::string& object,
                                      const ConfidenceConfig& cfg) {
  std::optional<Derivation> best;
  if (auto rec = kb.net.fact_support(subject, predicate, object))
    best = net_derivation(kb.net, subject, *rec, cfg);
  for (const script::Episode& ep : kb.episodes) {
    auto scan = [&](const std::vector<script::Event>& events, bool obs) {
      for (const script::Event& ev : events) {
        script::Event res = script::resolve(ev, ep.bindings);
        if (res.action != predicate) continue;
        if (res.actor != subject && ev.actor != subject) continue;
        if (res.object != object) continue;
        Derivation d = event_derivation(ep.script, res, obs, cfg);
        if (!best || better(d, *best)) best = d;
      }
    };
    scan(ep.observed, true);
    scan(ep.inferred, false);
  }
  return best;
}

double min_cumulative(const std::vector<TraceStep>& steps) {
  double m = 1.0;
  for (const TraceStep& s : steps) m = std::min(m, s.cumulative);
  return m;
}

Answer yes_answer(Derivation d) {
  Answer a;
  a.verdict = Verdict::Yes;
  a.confidence = d.confidence;
  a.trace = std::move(d.steps);
  return a;
}

Answer ask_yesno(const hybrid::HybridKb& kb, const YesNoQuery& q,
                 const ConfidenceConfig& cfg) {
  const script::Pattern& p = q.pattern;
  if (p.subject.empty() || p.predicate.empty() || p.object.empty())
    fail(ErrCode::MalformedQuery, "yes/no pattern is incomplete");
  if (p.subject == script::kWildcard || p.object == script::kWildcard ||
      p.predicate == script::kWildcard)
    fail(ErrCode::MalformedQuery,
         "yes/no patterns take no wildcard; use a wh query");
  auto d = derive_fact(kb, p.subject, map_predicate(p.predicate), p.object,
                       cfg);
  if (!d) return {};
  return yes_answer(std::move(*d));
}

Answer ask_wh(const hybrid::HybridKb& kb, const WhQuery& q,
              const ConfidenceConfig& cfg) {
  const script::Pattern& p = q.pattern;
  bool subj_wild = p.subject == script::kWildcard;
  bool obj_wild = p.object == script::kWildcard;
  if (p.predicate == script::kWildcard)
    fail(ErrCode::MalformedQuery, "the predicate cannot be a wildcard");
  if (subj_wild == obj_wild)
    fail(ErrCode::MalformedQuery,
         "wh queries take exactly one wildcard, in subject or object");
  std::string predicate = map_predicate(p.predicate);

  std::map<std::string, Derivation> candidates;
  auto offer = [&](const std::string& id, Derivation d) {
    auto it = candidates.find(id);
    if (it == candidates.end())
      candidates.emplace(id, std::move(d));
    else if (better(d, it->second))
      it->second = std::move(d);
  };

  if (obj_wild) {
    for (const auto& [value, rec] :
         kb.net.predicate_supports(p.subject, predicate))
      offer(value, net_derivation(kb.net, p.subject, rec, cfg));
  } else {
    for (const auto& [id, node] : kb.net.nodes()) {
      (void)node;
      if (auto rec = kb.net.fact_support(id, predicate, p.object))
        offer(id, net_derivation(kb.net, id, *rec, cfg));
    }
  }
  for (const script::Episode& ep : kb.episodes) {
    auto scan = [&](const std::vector<script::Event>& events, bool obs) {
      for (const script::Event& ev : events) {
        script::Event res = script::resolve(ev, ep.bindings);
        if (res.action != predicate) continue;
        // Event-derived bindings must be net nodes; unbound role symbols
        // and bare literals are not answers.
        if (obj_wild) {
          if ((res.actor != p.subject && ev.actor != p.subject) ||
              !kb.net.has_node(res.object))
            continue;
          offer(res.object, event_derivation(ep.script, res, obs, cfg));
        } else {
          if (res.object != p.object || !kb.net.has_node(res.actor))
            continue;
          offer(res.actor, event_derivation(ep.script, res, obs, cfg));
        }
      }
    };
    scan(ep.observed, true);
    scan(ep.inferred, false);
  }
  if (candidates.empty()) return {};

  std::vector<std::pair<std::string, const Derivation*>> order;
  order.reserve(candidates.size());
  for (const auto& [id, d] : candidates) order.emplace_back(id, &d);
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second->confidence != b.second->confidence)
      return a.second->confidence > b.second->confidence;
    return a.first < b.first;
  });

  Answer a;
  a.verdict = Verdict::Bindings;
  for (const auto& [id, d] : order) {
    a.bindings.push_back(id);
    a.trace.insert(a.trace.end(), d->steps.begin(), d->steps.end());
  }
  a.confidence = min_cumulative(a.trace);
  return a;
}

Answer ask_roledetail(const hybrid::HybridKb& kb, const RoleDetailQuery& q,
                      const ConfidenceConfig& cfg) {
  hybrid::RoleResolution res;
  try {
    res = hybrid::resolve_role_attributes(kb, q.script, q.role);
  } catch (const KbError& e) {
    if (e.code() == ErrCode::UnlinkedRole) return {};  // open world
    fail(ErrCode::MalformedQuery, e.what());
  }
  Answer a;
  a.verdict = Verdict::Bindings;
  a.trace.push_back({StepSource::Asserted, 0,
                     "(" + q.role + " bound-to " + res.linked_class + ")",
                     1.0});
  for (const semnet::NodeId& child : res.generalization_children) {
    a.bindings.push_back(child);
    a.trace.push_back({StepSource::Asserted, 0,
                       fact_text(child, semnet::kIsA, res.linked_class),
                       1.0});
  }
  for (const auto& [name, rec] : res.attributes) {
    (void)name;
    std::string detail = fact_text(rec.source, rec.attribute, rec.value);
    if (rec.depth == 0)
      a.trace.push_back({StepSource::Asserted, 0, detail, 1.0});
    else
      a.trace.push_back({StepSource::Inherited, rec.depth, detail,
                         std::pow(cfg.decay, rec.depth)});
  }
  a.confidence = min_cumulative(a.trace);
  return a;
}

Answer ask_didhappen(const hybrid::HybridKb& kb, const DidHappenQuery& q,
                     const ConfidenceConfig& cfg) {
  if (!kb.scripts.count(q.script))
    fail(ErrCode::MalformedQuery, "unknown script '" + q.script + "'");
  if (q.event.action.empty())
    fail(ErrCode::MalformedQuery, "did-happen event has no action");
  std::optional<Derivation> best;
  for (const script::Episode& ep : kb.episodes) {
    if (ep.script != q.script) continue;
    auto scan = [&](const std::vector<script::Event>& events, bool obs) {
      for (const script::Event& ev : events) {
        script::Event res = script::resolve(ev, ep.bindings);
        if (res.action != q.event.action) continue;
        if (!q.event.actor.empty() && res.actor != q.event.actor &&
            ev.actor != q.event.actor)
          continue;
        if (!q.event.object.empty() && res.object != q.event.object)
          continue;
        Derivation d = event_derivation(ep.script, res, obs, cfg);
        if (!best || better(d, *best)) best = d;
      }
    };
    scan(ep.observed, true);
    scan(ep.inferred, false);
  }
  if (!best) return {};
  return yes_answer(std::move(*best));
}

}  // namespace

Answer ask(const hybrid::HybridKb& kb, const Query& query,
           const ConfidenceConfig& config) {
  return std::visit(
      [&](const auto& q) -> Answer {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, YesNoQuery>)
          return ask_yesno(kb, q, config);
        else if constexpr (std::is_same_v<T, WhQuery>)
          return ask_wh(kb, q, config);
        else if constexpr (std::is_same_v<T, RoleDetailQuery>)
          return ask_roledetail(kb, q, config);
        else
          return ask_didhappen(kb, q, config);
      },
      query);
}

std::string explain(const Answer& answer) {
  if (answer.verdict != Verdict::Yes && answer.verdict != Verdict::Bindings)
    fail(ErrCode::NothingToExplain,
         "nothing to explain: the answer carries no derivation");
  std::string out;
  for (std::size_t i = 0; i < answer.trace.size(); ++i) {
    if (i) out += "\n";
    out += render(answer.trace[i]);
  }
  return out;
}

std::vector<TellResult> complete(hybrid::HybridKb& kb,
                                 std::size_t episode_index) {
  if (episode_index >= kb.episodes.size())
    fail(ErrCode::UnknownEpisode,
         "no episode at index " + std::to_string(episode_index));
  script::Episode& ep = kb.episodes[episode_index];
  if (ep.status == script::EpisodeStatus::Completed)
    fail(ErrCode::AlreadyCompleted,
         "episode of '" + ep.script + "' is already completed");
  if (ep.scene_path.empty())
    fail(ErrCode::NoAlignment,
         "episode of '" + ep.script + "' has no scene path; gap-fill first");
  const script::Script& s = kb.scripts.at(ep.script);
  std::vector<TellResult> out;
  for (const script::Pattern& r : s.results) {
    auto subst = [&](const std::string& tok) {
      auto it = ep.bindings.find(tok);
      return it == ep.bindings.end() ? tok : it->second;
    };
    Fact f{subst(r.subject), r.predicate, subst(r.object), ""};
    out.push_back(tell(kb, f));
  }
  ep.status = script::EpisodeStatus::Completed;
  return out;
}

}  // namespace hkr::kbsl
