#include "hkr/session.hpp"

#include <unistd.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "hkr/dot_export.hpp"

namespace hkr::cli {

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kKbError = 2;

const char* kUsageText =
    "usage: hybridkr [--set key=value]... [--config <file>] <command>...\n"
    "commands:\n"
    "  load <file.kb>                    load a knowledge base\n"
    "  save <file.kb>                    write the canonical serialization\n"
    "  tell \"<form>\"                     assert one form\n"
    "  ask \"<query-form>\"                (yesno ...), (wh ...),\n"
    "                                    (roledetail ...), (didhappen ...)\n"
    "  gapfill <script> \"(event)\"...     fill gaps around observed events\n"
    "  export-dot <file.dot>             write a Graphviz rendering\n"
    "  repl                              interactive session\n"
    "config keys: confidence.decay, confidence.gapfill (defaults 0.9, 0.7)\n";

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

bool set_config(kbsl::ConfidenceConfig& cfg, const std::string& kv,
                std::ostream& err) {
  auto eq = kv.find('=');
  if (eq == std::string::npos) {
    err << "error: expected key=value, got '" << kv << "'\n";
    return false;
  }
  std::string key = kv.substr(0, eq);
  std::string val = kv.substr(eq + 1);
  double* slot = nullptr;
  if (key == "confidence.decay") slot = &cfg.decay;
  else if (key == "confidence.gapfill") slot = &cfg.gapfill;
  if (!slot) {
    err << "error: unknown config key '" << key << "'\n";
    return false;
  }
  try {
    std::size_t pos = 0;
    double v = std::stod(val, &pos);
    if (pos != val.size() || v <= 0.0 || v > 1.0) throw std::out_of_range("");
    *slot = v;
  } catch (...) {
    err << "error: config value for " << key
        << " must be a number in (0,1], got '" << val << "'\n";
    return false;
  }
  return true;
}

bool load_config_file(kbsl::ConfidenceConfig& cfg, const std::string& path,
                      std::ostream& err) {
  std::ifstream f(path);
  if (!f) {
    err << "error: cannot open config file '" << path << "'\n";
    return false;
  }
  std::string line;
  while (std::getline(f, line)) {
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::string kv;
    for (char c : line.substr(first))
      if (c != ' ' && c != '\t') kv += c;
    if (!set_config(cfg, kv, err)) return false;
  }
  return true;
}

void print_diagnostics(const std::vector<dsl::Diagnostic>& ds,
                       const std::string& where, std::ostream& err) {
  for (const auto& d : ds) err << where << ":" << dsl::render(d) << "\n";
}

void print_answer(const kbsl::Answer& a, std::ostream& out) {
  switch (a.verdict) {
    case kbsl::Verdict::Yes:
      out << "yes " << fmt2(a.confidence.value_or(0.0)) << "\n";
      break;
    case kbsl::Verdict::No:
      out << "no " << fmt2(a.confidence.value_or(0.0)) << "\n";
      break;
    case kbsl::Verdict::Unknown:
      out << "unknown\n";
      return;
    case kbsl::Verdict::Bindings: {
      if (a.bindings.empty()) out << "none ";
      for (const std::string& b : a.bindings) out << b << " ";
      out << fmt2(a.confidence.value_or(0.0)) << "\n";
      break;
    }
  }
  for (const kbsl::TraceStep& s : a.trace) out << "  " << render(s) << "\n";
}

struct CommandIo {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

// One command against the session. Returns an exit code; kOk means continue.
int execute(Session& s, const std::string& cmd,
            const std::vector<std::string>& args, CommandIo io) {
  s.history.push_back(cmd);
  if (cmd == "load") {
    if (args.size() != 1) {
      io.err << "error: load takes one file argument\n";
      return kUsage;
    }
    std::ifstream f(args[0]);
    if (!f) {
      io.err << "error: cannot open '" << args[0] << "'\n";
      return kKbError;
    }
    std::stringstream buf;
    buf << f.rdbuf();
    dsl::ParseResult res = dsl::parse(buf.str());
    print_diagnostics(res.diagnostics, args[0], io.err);
    if (!res.ok()) return kKbError;
    s.kb = std::move(*res.kb);
    s.has_kb = true;
    return kOk;
  }
  if (cmd == "tell") {
    if (args.size() != 1) {
      io.err << "error: tell takes one form argument\n";
      return kUsage;
    }
    dsl::TellOutcome o = dsl::tell_text(s.kb, args[0]);
    if (!o.result) {
      print_diagnostics(o.diagnostics, "tell", io.err);
      return kUsage;
    }
    switch (o.result->status) {
      case kbsl::TellStatus::Accepted:
        io.out << "accepted\n";
        s.has_kb = true;
        return kOk;
      case kbsl::TellStatus::Skipped:
        io.out << "skipped\n";
        return kOk;
      case kbsl::TellStatus::Rejected:
        io.out << "rejected " << o.result->reason << "\n";
        return kKbError;
    }
    return kOk;
  }
  if (cmd == "ask" || cmd == "save" || cmd == "export-dot" ||
      cmd == "gapfill") {
    if (!s.has_kb) {
      io.err << "error: no knowledge base; run load or tell first\n";
      return kUsage;
    }
  }
  if (cmd == "ask") {
    if (args.size() != 1) {
      io.err << "error: ask takes one query form\n";
      return kUsage;
    }
    dsl::QueryParse q = dsl::parse_query_text(args[0]);
    if (!q.query) {
      print_diagnostics(q.diagnostics, "ask", io.err);
      return kUsage;
    }
    try {
      kbsl::Answer a = kbsl::ask(s.kb, *q.query, s.config);
      print_answer(a, io.out);
      return kOk;
    } catch (const KbError& e) {
      io.err << "error: " << e.what() << "\n";
      return kKbError;
    }
  }
  if (cmd == "save") {
    if (args.size() != 1) {
      io.err << "error: save takes one file argument\n";
      return kUsage;
    }
    std::ofstream f(args[0]);
    if (!f) {
      io.err << "error: cannot write '" << args[0] << "'\n";
      return kKbError;
    }
    f << dsl::serialize(s.kb);
    return kOk;
  }
  if (cmd == "export-dot") {
    if (args.size() != 1) {
      io.err << "error: export-dot takes one file argument\n";
      return kUsage;
    }
    std::ofstream f(args[0]);
    if (!f) {
      io.err << "error: cannot write '" << args[0] << "'\n";
      return kKbError;
    }
    f << export_dot(s.kb);
    return kOk;
  }
  if (cmd == "gapfill") {
    if (args.size() < 2) {
      io.err << "error: gapfill takes a script name and event forms\n";
      return kUsage;
    }
    std::string forms;
    for (std::size_t i = 1; i < args.size(); ++i) forms += args[i] + " ";
    dsl::EventsParse ev = dsl::parse_event_text(forms);
    if (dsl::has_error(ev.diagnostics)) {
      print_diagnostics(ev.diagnostics, "gapfill", io.err);
      return kUsage;
    }
    auto sit = s.kb.scripts.find(args[0]);
    if (sit == s.kb.scripts.end()) {
      io.err << "error: unknown script '" << args[0] << "'\n";
      return kKbError;
    }
    try {
      script::Episode ep = script::gap_fill_episode(sit->second, ev.events);
      hybrid::add_episode(s.kb, ep);
      io.out << "path";
      for (int n : ep.scene_path) io.out << " " << n;
      io.out << "\n";
      for (const script::Event& e : ep.inferred)
        io.out << "  inferred " << script::render(e) << "\n";
      return kOk;
    } catch (const KbError& e) {
      io.err << "error: " << e.what() << "\n";
      return kKbError;
    }
  }
  if (cmd == "set") {
    if (args.size() != 1 || !set_config(s.config, args[0], io.err))
      return kUsage;
    return kOk;
  }
  io.err << "error: unknown command '" << cmd << "'\n" << kUsageText;
  return kUsage;
}

// Splits a REPL line into command word and arguments. Parenthesized forms
// keep their spaces; everything else splits on whitespace.
std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] == '(') {
      int depth = 0;
      std::size_t start = i;
      bool in_str = false;
      for (; i < line.size(); ++i) {
        char c = line[i];
        if (in_str) {
          if (c == '\\') ++i;
          else if (c == '"') in_str = false;
          continue;
        }
        if (c == '"') in_str = true;
        else if (c == '(') ++depth;
        else if (c == ')' && --depth == 0) {
          ++i;
          break;
        }
      }
      out.push_back(line.substr(start, i - start));
      continue;
    }
    std::size_t start = i;
    while (i < line.size() &&
           !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    out.push_back(line.substr(start, i - start));
  }
  return out;
}

int repl(Session& s, CommandIo io) {
  bool tty = (&io.in == &std::cin) && isatty(0);
  std::string line;
  while (true) {
    if (tty) io.out << "hkr> " << std::flush;
    if (!std::getline(io.in, line)) break;
    std::vector<std::string> words = split_line(line);
    if (words.empty()) continue;
    std::string cmd = words[0];
    if (cmd == "quit" || cmd == "exit") break;
    std::vector<std::string> args(words.begin() + 1, words.end());
    execute(s, cmd, args, io);  // errors are reported and the loop continues
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err) {
  Session s;
  CommandIo io{in, out, err};
  std::size_t i = 0;
  bool ran_command = false;
  while (i < args.size()) {
    const std::string& a = args[i];
    if (a == "--help" || a == "-h") {
      out << kUsageText;
      return kOk;
    }
    if (a == "--set") {
      if (i + 1 >= args.size()) {
        err << "error: --set needs key=value\n";
        return kUsage;
      }
      if (!set_config(s.config, args[i + 1], err)) return kUsage;
      i += 2;
      continue;
    }
    if (a == "--config") {
      if (i + 1 >= args.size()) {
        err << "error: --config needs a file\n";
        return kUsage;
      }
      if (!load_config_file(s.config, args[i + 1], err)) return kUsage;
      i += 2;
      continue;
    }
    if (a == "repl") {
      ran_command = true;
      repl(s, io);
      ++i;
      continue;
    }
    // a command plus its arguments: forms are single argv entries, other
    // arguments run to the next known command word
    static const std::set<std::string> commands{
        "load", "save", "tell", "ask", "gapfill", "export-dot", "set"};
    if (!commands.count(a)) {
      err << "error: unknown command '" << a << "'\n" << kUsageText;
      return kUsage;
    }
    std::vector<std::string> cmd_args;
    std::size_t j = i + 1;
    for (; j < args.size(); ++j) {
      if (commands.count(args[j]) || args[j] == "repl" ||
          args[j].rfind("--", 0) == 0)
        break;
      cmd_args.push_back(args[j]);
    }
    int rc = execute(s, a, cmd_args, io);
    ran_command = true;
    if (rc != kOk) return rc;
    i = j;
  }
  if (!ran_command) {
    err << kUsageText;
    return kUsage;
  }
  return kOk;
}

}  // namespace hkr::cli
