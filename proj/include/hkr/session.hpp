// session.hpp - command-line front end shared by one-shot and REPL modes
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hkr/dsl.hpp"
#include "hkr/hybrid.hpp"
#include "hkr/kbsl.hpp"

namespace hkr::cli {

// The interactive state: the current snapshot (replaced wholesale on every
// successful mutation, so it is always store-valid), the command history and
// the confidence configuration.
struct Session {
  hybrid::HybridKb kb;
  kbsl::ConfidenceConfig config;
  bool has_kb = false;  // set by load or a first successful tell
  std::vector<std::string> history;
};

// Exit codes: 0 success, 1 usage error, 2 KB/content error. Results go to
// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err);

}  // namespace hkr::cli
