// kbsl.hpp - the knowledge-base system layer: TELL with dedup and
// segmentation, ASK with confidence-scored answers and explanation traces.
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hkr/hybrid.hpp"

namespace hkr::kbsl {

// A net-side assertion. The built-in predicates "is-a", "instance" and
// "has" route to the corresponding link kinds; anything else is a named
// relation. An empty space means the subject's own space.
struct Fact {
  std::string subject;
  std::string predicate;
  std::string object;
  std::string space;
};

// A script-side assertion, routed to the first open episode of the script.
struct ScriptEvent {
  std::string script;
  script::Event event;
};

using Assertion = std::variant<Fact, ScriptEvent>;

enum class TellStatus { Accepted, Skipped, Rejected };

struct TellResult {
  TellStatus status = TellStatus::Accepted;
  std::string reason;               // Rejected only
  std::optional<ErrCode> error;     // Rejected only
  bool ok() const { return status != TellStatus::Rejected; }
};

// Acquisition: duplicates are skipped (TELL is idempotent), structural
// problems are reported as Rejected with the underlying store's error, and
// the assertion form decides the route (net vs open episode). Never throws.
TellResult tell(hybrid::HybridKb& kb, const Assertion& assertion);

struct ConfidenceConfig {
  double decay = 0.9;    // per inheritance hop
  double gapfill = 0.7;  // base factor of an inferred script event
};

enum class StepSource { Asserted, Inherited, ScriptInferred };

struct TraceStep {
  StepSource source = StepSource::Asserted;
  int depth = 0;       // Inherited only
  std::string detail;  // rendered fact, edge or event
  double cumulative = 1.0;
};

std::string render(const TraceStep& step);

enum class Verdict { Yes, No, Unknown, Bindings };

// Confidence is absent iff Unknown, equals 1.0 iff every trace step is an
// assertion, and for multi-step answers is the minimum cumulative value.
struct Answer {
  Verdict verdict = Verdict::Unknown;
  std::vector<std::string> bindings;  // Bindings verdict, sorted
  std::optional<double> confidence;
  std::vector<TraceStep> trace;
};

struct YesNoQuery {
  script::Pattern pattern;
};
struct WhQuery {
  script::Pattern pattern;  // exactly one "?", in subject or object
};
struct RoleDetailQuery {
  std::string script;
  std::string role;
};
struct DidHappenQuery {
  std::string script;
  script::Event event;  // empty actor/object match anything
};

using Query =
    std::variant<YesNoQuery, WhQuery, RoleDetailQuery, DidHappenQuery>;

// Pure read over the snapshot. Open-world: no support means Unknown, never
// No. Throws MalformedQuery for structurally bad queries.
Answer ask(const hybrid::HybridKb& kb, const Query& query,
           const ConfidenceConfig& config = {});

// One line per inference step. Throws NothingToExplain unless the verdict
// is Yes or Bindings.
std::string explain(const Answer& answer);

// Commits an open episode: asserts each result pattern (roles substituted)
// through tell and flips the status. Returns one result per pattern. Throws
// UnknownEpisode / AlreadyCompleted / NoAlignment (empty scene path).
std::vector<TellResult> complete(hybrid::HybridKb& kb,
                                 std::size_t episode_index);

}  // namespace hkr::kbsl
