// dsl.hpp - the textual KB language: parser with positioned diagnostics and
// the canonical serializer used as the persistence format.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hkr/hybrid.hpp"
#include "hkr/kbsl.hpp"

namespace hkr::dsl {

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string message;
  int line = 1;
  int column = 1;
};

std::string render(const Diagnostic& d);

inline bool has_error(const std::vector<Diagnostic>& ds) {
  for (const auto& d : ds)
    if (d.severity == Diagnostic::Severity::Error) return true;
  return false;
}

// Parsing is total: any input yields diagnostics, never a crash. Forms are
// applied in order; the first error aborts application (the kb is absent
// whenever an error diagnostic exists) but every syntax diagnostic is still
// reported.
struct ParseResult {
  std::optional<hybrid::HybridKb> kb;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return kb.has_value(); }
};

ParseResult parse(std::string_view text);

// Canonical form: forms sorted by (kind, name), two-space indent, lowercase
// heads, LF endings. parse(serialize(kb)) rebuilds an identical KB and a
// second serialization is byte-identical. Value nodes are represented
// through the attr
// and has forms that introduce them, so a value node with no incoming link
// cannot be expressed.
std::string serialize(const hybrid::HybridKb& kb);

// One TELL command in the same grammar. Fact heads (isa/has/rel/attr) and
// the event head go through the TELL pipeline with its dedup semantics;
// declaration heads (space/class/instance/script/link/episode) are applied
// atomically and report Accepted or Rejected.
struct TellOutcome {
  std::vector<Diagnostic> diagnostics;     // parse problems; nothing applied
  std::optional<kbsl::TellResult> result;  // set when the form was routed
};
TellOutcome tell_text(hybrid::HybridKb& kb, std::string_view form_text);

// One query form: (yesno s p o), (wh ...) with one wildcard,
// (roledetail script role), (didhappen script action [object]).
struct QueryParse {
  std::vector<Diagnostic> diagnostics;
  std::optional<kbsl::Query> query;
};
QueryParse parse_query_text(std::string_view form_text);

// Observation forms for gap filling: (action), (action object) or
// (actor action object).
struct EventsParse {
  std::vector<Diagnostic> diagnostics;
  std::vector<script::Event> events;
};
EventsParse parse_event_text(std::string_view text);

}  // namespace hkr::dsl
