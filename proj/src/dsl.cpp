#include "hkr/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace hkr::dsl {

std::string render(const Diagnostic& d) {
  std::string sev =
      d.severity == Diagnostic::Severity::Error ? "error" : "warning";
  return std::to_string(d.line) + ":" + std::to_string(d.column) + ": " +
         sev + ": " + d.message;
}

namespace {

// ---------------------------------------------------------------------------
// lexer / reader

struct Token {
  enum class Kind { LParen, RParen, Ident, Int, Str, Wild, End };
  Kind kind = Kind::End;
  std::string text;
  long num = 0;
  int line = 1, col = 1;
};

struct SExpr {
  enum class Kind { List, Ident, Int, Str, Wild };
  Kind kind = Kind::List;
  std::string text;
  long num = 0;
  int line = 1, col = 1;
  std::vector<SExpr> items;
};

void diag(std::vector<Diagnostic>& out, Diagnostic::Severity sev,
          const std::string& msg, int line, int col) {
  out.push_back({sev, msg, line, col});
}

std::vector<Token> lex(std::string_view text, std::vector<Diagnostic>& diags) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](char c) {
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ';') {  // comment to end of line
      while (i < text.size() && text[i] != '\n') advance(text[i++]);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(c);
      ++i;
      continue;
    }
    int tl = line, tc = col;
    if (c == '(') {
      out.push_back({Token::Kind::LParen, "(", 0, tl, tc});
      advance(c);
      ++i;
      continue;
    }
    if (c == ')') {
      out.push_back({Token::Kind::RParen, ")", 0, tl, tc});
      advance(c);
      ++i;
      continue;
    }
    if (c == '?') {
      out.push_back({Token::Kind::Wild, "?", 0, tl, tc});
      advance(c);
      ++i;
      continue;
    }
    if (c == '"') {
      advance(c);
      ++i;
      std::string s;
      bool closed = false;
      while (i < text.size()) {
        char d = text[i];
        if (d == '\n') break;  // strings do not span lines
        if (d == '\\' && i + 1 < text.size() &&
            (text[i + 1] == '"' || text[i + 1] == '\\')) {
          advance(d);
          ++i;
          s += text[i];
          advance(text[i]);
          ++i;
          continue;
        }
        if (d == '"') {
          closed = true;
          advance(d);
          ++i;
          break;
        }
        s += d;
        advance(d);
        ++i;
      }
      if (!closed)
        diag(diags, Diagnostic::Severity::Error, "unterminated string", tl,
             tc);
      out.push_back({Token::Kind::Str, s, 0, tl, tc});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string n;
      while (i < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[i]))) {
        n += text[i];
        advance(text[i]);
        ++i;
      }
      out.push_back({Token::Kind::Int, n, std::stol(n), tl, tc});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::string id;
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) ||
              text[i] == '-')) {
        id += static_cast<char>(
            std::tolower(static_cast<unsigned char>(text[i])));
        advance(text[i]);
        ++i;
      }
      out.push_back({Token::Kind::Ident, id, 0, tl, tc});
      continue;
    }
    diag(diags, Diagnostic::Severity::Error,
         std::string("unexpected character '") + c + "'", tl, tc);
    advance(c);
    ++i;
  }
  out.push_back({Token::Kind::End, "", 0, line, col});
  return out;
}

std::vector<SExpr> read_forms(const std::vector<Token>& tokens,
                              std::vector<Diagnostic>& diags) {
  std::vector<SExpr> top;
  std::vector<SExpr> stack;  // open lists
  auto emit = [&](SExpr e) {
    if (stack.empty())
      top.push_back(std::move(e));
    else
      stack.back().items.push_back(std::move(e));
  };
  for (const Token& t : tokens) {
    switch (t.kind) {
      case Token::Kind::LParen: {
        SExpr l;
        l.kind = SExpr::Kind::List;
        l.line = t.line;
        l.col = t.col;
        stack.push_back(std::move(l));
        break;
      }
      case Token::Kind::RParen:
        if (stack.empty()) {
          diag(diags, Diagnostic::Severity::Error, "unbalanced ')'", t.line,
               t.col);
          break;
        }
        {
          SExpr done = std::move(stack.back());
          stack.pop_back();
          emit(std::move(done));
        }
        break;
      case Token::Kind::Ident:
        emit({SExpr::Kind::Ident, t.text, 0, t.line, t.col, {}});
        break;
      case Token::Kind::Int:
        emit({SExpr::Kind::Int, t.text, t.num, t.line, t.col, {}});
        break;
      case Token::Kind::Str:
        emit({SExpr::Kind::Str, t.text, 0, t.line, t.col, {}});
        break;
      case Token::Kind::Wild:
        emit({SExpr::Kind::Wild, "?", 0, t.line, t.col, {}});
        break;
      case Token::Kind::End:
        break;
    }
  }
  while (!stack.empty()) {
    diag(diags, Diagnostic::Severity::Error, "unbalanced '(': missing ')'",
         stack.back().line, stack.back().col);
    stack.pop_back();
  }
  return top;
}

// ---------------------------------------------------------------------------
// form application

struct FormError {
  std::string message;
  int line, col;
};

[[noreturn]] void form_fail(const SExpr& at, const std::string& msg) {
  throw FormError{msg, at.line, at.col};
}

const std::set<std::string>& reserved_words() {
  static const std::set<std::string> words{
      "space", "class", "instance", "isa",    "has",   "rel",
      "attr",  "script", "track",   "props",  "role",  "entry",
      "result", "scene", "event",   "goto",   "link",  "episode"};
  return words;
}

std::string head_of(const SExpr& form) {
  if (form.kind != SExpr::Kind::List || form.items.empty() ||
      form.items[0].kind != SExpr::Kind::Ident)
    form_fail(form, "expected a parenthesized form with an identifier head");
  return form.items[0].text;
}

std::string as_ident(const SExpr& e, const char* what) {
  if (e.kind != SExpr::Kind::Ident)
    form_fail(e, std::string("expected ") + what);
  return e.text;
}

std::string as_new_ident(const SExpr& e, const char* what) {
  std::string id = as_ident(e, what);
  if (reserved_words().count(id))
    form_fail(e, "reserved word '" + id + "' cannot name a " + what);
  return id;
}

std::string as_text(const SExpr& e, const char* what) {
  if (e.kind == SExpr::Kind::Str || e.kind == SExpr::Kind::Ident)
    return e.text;
  form_fail(e, std::string("expected ") + what);
}

int as_int(const SExpr& e, const char* what) {
  if (e.kind != SExpr::Kind::Int)
    form_fail(e, std::string("expected ") + what);
  return static_cast<int>(e.num);
}

std::string as_pattern_atom(const SExpr& e, bool allow_wild) {
  if (e.kind == SExpr::Kind::Ident) return e.text;
  if (allow_wild && e.kind == SExpr::Kind::Wild) return script::kWildcard;
  form_fail(e, allow_wild ? "expected an identifier or '?'"
                          : "expected an identifier");
}

// Positional atoms first, then named sub-forms. Returns the atom count.
std::size_t count_atoms(const SExpr& form) {
  std::size_t n = 1;
  while (n < form.items.size() &&
         form.items[n].kind != SExpr::Kind::List)
    ++n;
  return n - 1;
}

const SExpr* find_sub(const SExpr& form, const std::string& head,
                      const std::set<std::string>& allowed) {
  const SExpr* found = nullptr;
  for (std::size_t i = 1; i < form.items.size(); ++i) {
    const SExpr& e = form.items[i];
    if (e.kind != SExpr::Kind::List) continue;
    std::string h = head_of(e);
    if (!allowed.count(h))
      form_fail(e, "unknown sub-form '" + h + "' in (" + head_of(form) +
                       " ...)");
    if (h == head) {
      if (found) form_fail(e, "duplicate sub-form '" + h + "'");
      found = &e;
    }
  }
  return found;
}

std::string sub_ident(const SExpr& form, const std::string& head,
                      const std::set<std::string>& allowed,
                      const std::string& fallback) {
  const SExpr* s = find_sub(form, head, allowed);
  if (!s) return fallback;
  if (s->items.size() != 2) form_fail(*s, "(" + head + " <id>) takes one id");
  return as_ident(s->items[1], "an identifier");
}

script::Pattern read_pattern(const SExpr& e, bool allow_wild_object) {
  if (e.kind != SExpr::Kind::List || e.items.size() != 4)
    form_fail(e, "expected (head subject predicate object)");
  script::Pattern p;
  p.subject = as_pattern_atom(e.items[1], false);
  p.predicate = as_pattern_atom(e.items[2], false);
  p.object = as_pattern_atom(e.items[3], allow_wild_object);
  return p;
}

script::Event read_event(const SExpr& e) {
  if (e.kind != SExpr::Kind::List || e.items.size() < 3 ||
      e.items.size() > 4 || head_of(e) != "event")
    form_fail(e, "expected (event actor action [object])");
  script::Event ev;
  ev.actor = as_ident(e.items[1], "a role symbol");
  ev.action = as_ident(e.items[2], "an action");
  if (e.items.size() == 4)
    ev.object = as_ident(e.items[3], "an object identifier");
  return ev;
}

void check_relation_name(const SExpr& at, const std::string& name) {
  if (name == semnet::kIsA || name == semnet::kInstanceOf ||
      name == semnet::kHas || name == "isa")
    form_fail(at, "reserved relation name '" + name +
                      "'; use the dedicated form instead");
  if (reserved_words().count(name))
    form_fail(at, "reserved word '" + name + "' cannot name a relation");
}

struct LinkSpec {
  semnet::NodeId from, to;
  std::string label;
  std::optional<std::string> space;        // explicit link space
  std::optional<std::string> value_space;  // space for a created value node
  bool create_value = false;               // attr/has may introduce the value
};

void apply_link_spec(hybrid::HybridKb& kb, const SExpr& at,
                     const LinkSpec& spec) {
  if (!kb.net.has_node(spec.from))
    fail(ErrCode::UnknownNode, "unknown node '" + spec.from + "'");
  std::string space =
      spec.space ? *spec.space : kb.net.node(spec.from).space;
  if (!kb.net.has_node(spec.to)) {
    if (!spec.create_value)
      fail(ErrCode::UnknownNode, "unknown node '" + spec.to + "'");
    std::string vspace = spec.value_space ? *spec.value_space : space;
    kb.net.add_node({spec.to, semnet::NodeKind::Value, "", vspace});
  } else if (spec.value_space &&
             kb.net.node(spec.to).space != *spec.value_space) {
    form_fail(at, "value '" + spec.to + "' already lives in space '" +
                      kb.net.node(spec.to).space + "'");
  }
  kb.net.add_link({spec.from, spec.label, spec.to, space});
}

void apply_space(hybrid::HybridKb& kb, const SExpr& form) {
  static const std::set<std::string> allowed{"parent", "kind", "agent"};
  if (count_atoms(form) != 1)
    form_fail(form, "expected (space <id> ...)");
  std::string id = as_ident(form.items[1], "a space id");
  if (id == semnet::kRootSpace && kb.net.has_space(id)) {
    if (form.items.size() != 2)
      form_fail(form, "the root space takes no sub-forms");
    return;  // preamble for the built-in root
  }
  as_new_ident(form.items[1], "space");
  semnet::Space s;
  s.id = id;
  s.parent = sub_ident(form, "parent", allowed, semnet::kRootSpace);
  if (const SExpr* k = find_sub(form, "kind", allowed)) {
    if (k->items.size() != 2)
      form_fail(*k, "(kind ...) takes one value");
    std::string v = as_ident(k->items[1], "a space kind");
    if (v == "general-statement")
      s.kind = semnet::SpaceKind::GeneralStatement;
    else if (v == "ordinary")
      s.kind = semnet::SpaceKind::Ordinary;
    else
      form_fail(k->items[1], "unknown space kind '" + v + "'");
  }
  if (const SExpr* a = find_sub(form, "agent", allowed)) {
    if (a->items.size() != 2) form_fail(*a, "(agent <node>) takes one id");
    s.agent = as_ident(a->items[1], "an agent node id");
  }
  kb.net.add_space(s);
}

void apply_node_decl(hybrid::HybridKb& kb, const SExpr& form,
                     semnet::NodeKind kind) {
  static const std::set<std::string> allowed{"space", "label", "link-space"};
  std::size_t atoms = count_atoms(form);
  bool is_instance = kind == semnet::NodeKind::Instance;
  if (atoms < 1 || atoms > (is_instance ? 2u : 1u))
    form_fail(form, is_instance ? "expected (instance <id> [<class>] ...)"
                                : "expected (class <id> ...)");
  std::string id = as_ident(form.items[1], "a node id");
  std::optional<std::string> cls;
  if (is_instance && atoms == 2)
    cls = as_ident(form.items[2], "a class id");

  const SExpr* space_sub = find_sub(form, "space", allowed);
  const SExpr* label_sub = find_sub(form, "label", allowed);
  std::string link_space = sub_ident(form, "link-space", allowed, "");
  if (!is_instance && !link_space.empty())
    form_fail(form, "(link-space ...) applies to instance forms only");

  if (kb.net.has_node(id)) {
    // Re-mention of an existing instance adds another instance-of link.
    if (!is_instance || !cls)
      fail(ErrCode::DuplicateNode, "node '" + id + "' already defined");
    if (kb.net.node(id).kind != semnet::NodeKind::Instance)
      fail(ErrCode::KindMismatch, "node '" + id + "' is not an instance");
    if (space_sub || label_sub)
      form_fail(form,
                "node '" + id + "' exists; only (link-space) may follow");
  } else {
    as_new_ident(form.items[1], "node");
    semnet::Node n;
    n.id = id;
    n.kind = kind;
    n.space = space_sub ? sub_ident(form, "space", allowed, "")
                        : std::string(semnet::kRootSpace);
    if (label_sub) {
      if (label_sub->items.size() != 2)
        form_fail(*label_sub, "(label \"...\") takes one string");
      n.label = as_text(label_sub->items[1], "a label string");
    }
    kb.net.add_node(n);
  }
  if (cls) {
    std::string ls = link_space.empty() ? kb.net.node(id).space : link_space;
    kb.net.add_link({id, semnet::kInstanceOf, *cls, ls});
  }
}

void apply_edge(hybrid::HybridKb& kb, const SExpr& form) {
  static const std::set<std::string> allowed{"space", "value-space"};
  std::string head = head_of(form);
  LinkSpec spec;
  if (head == "isa" || head == "has") {
    if (count_atoms(form) != 2)
      form_fail(form, "expected (" + head + " <from> <to> ...)");
    spec.from = as_ident(form.items[1], "a node id");
    spec.to = as_ident(form.items[2], "a node id");
    spec.label = head == "isa" ? semnet::kIsA : semnet::kHas;
    spec.create_value = head == "has";
  } else {  // rel / attr
    if (count_atoms(form) != 3)
      form_fail(form, "expected (" + head + " <from> <name> <to> ...)");
    spec.from = as_ident(form.items[1], "a node id");
    spec.label = as_ident(form.items[2], "a relation name");
    check_relation_name(form.items[2], spec.label);
    spec.to = as_ident(form.items[3], "a node id");
    spec.create_value = head == "attr";
  }
  std::string sp = sub_ident(form, "space", allowed, "");
  if (!sp.empty()) spec.space = sp;
  std::string vs = sub_ident(form, "value-space", allowed, "");
  if (!vs.empty()) {
    if (!spec.create_value)
      form_fail(form, "(value-space ...) applies to attr and has forms");
    spec.value_space = vs;
  }
  apply_link_spec(kb, form, spec);
}

void apply_script(hybrid::HybridKb& kb, const SExpr& form) {
  if (count_atoms(form) != 1)
    form_fail(form, "expected (script <name> ...)");
  script::Script s;
  s.name = as_new_ident(form.items[1], "script");
  for (std::size_t i = 2; i < form.items.size(); ++i) {
    const SExpr& e = form.items[i];
    if (e.kind != SExpr::Kind::List)
      form_fail(e, "expected a sub-form inside (script ...)");
    std::string h = head_of(e);
    if (h == "track") {
      if (e.items.size() != 2) form_fail(e, "(track \"...\") takes one string");
      s.track = as_text(e.items[1], "a track string");
    } else if (h == "props") {
      for (std::size_t j = 1; j < e.items.size(); ++j)
        s.props.push_back(as_new_ident(e.items[j], "prop"));
    } else if (h == "role") {
      if (e.items.size() != 3)
        form_fail(e, "expected (role <symbol> <description>)");
      std::string sym = as_new_ident(e.items[1], "role");
      if (s.roles.count(sym)) form_fail(e, "duplicate role '" + sym + "'");
      s.roles[sym] = as_text(e.items[2], "a role description");
    } else if (h == "entry") {
      s.entry_conditions.push_back(read_pattern(e, true));
    } else if (h == "result") {
      s.results.push_back(read_pattern(e, false));
    } else if (h == "scene") {
      if (e.items.size() < 3)
        form_fail(e, "expected (scene <number> \"<name>\" ...)");
      script::Scene sc;
      sc.number = as_int(e.items[1], "a scene number");
      sc.name = as_text(e.items[2], "a scene name");
      for (std::size_t j = 3; j < e.items.size(); ++j) {
        const SExpr& item = e.items[j];
        if (item.kind != SExpr::Kind::List)
          form_fail(item, "expected (event ...) or (goto ...)");
        std::string ih = head_of(item);
        if (ih == "event") {
          sc.events.push_back(read_event(item));
        } else if (ih == "goto") {
          if (item.items.size() != 3)
            form_fail(item, "expected (goto <scene> (when s p o))");
          script::Transition t;
          t.target = as_int(item.items[1], "a scene number");
          if (item.items[2].kind != SExpr::Kind::List ||
              head_of(item.items[2]) != "when")
            form_fail(item.items[2], "expected (when s p o)");
          t.condition = read_pattern(item.items[2], true);
          sc.transitions.push_back(t);
        } else {
          form_fail(item, "unknown sub-form '" + ih + "' in (scene ...)");
        }
      }
      s.scenes.push_back(std::move(sc));
    } else {
      form_fail(e, "unknown sub-form '" + h + "' in (script ...)");
    }
  }
  std::stable_sort(
      s.scenes.begin(), s.scenes.end(),
      [](const script::Scene& a, const script::Scene& b) {
        return a.number < b.number;
      });
  hybrid::add_script(kb, std::move(s));
}

void apply_hybrid_link(hybrid::HybridKb& kb, const SExpr& form) {
  if (form.items.size() != 4 || form.items[2].kind != SExpr::Kind::List)
    form_fail(form, "expected (link <script> (role|prop|event ...) <node>)");
  hybrid::HybridLink l;
  l.from.script = as_ident(form.items[1], "a script name");
  const SExpr& el = form.items[2];
  std::string eh = head_of(el);
  if (eh == "role" || eh == "prop") {
    if (el.items.size() != 2)
      form_fail(el, "expected (" + eh + " <symbol>)");
    l.from.kind = eh == "role" ? hybrid::ElementKind::Role
                               : hybrid::ElementKind::Prop;
    l.from.symbol = as_ident(el.items[1], "a symbol");
  } else if (eh == "event") {
    if (el.items.size() != 3)
      form_fail(el, "expected (event <scene> <index>)");
    l.from.kind = hybrid::ElementKind::EventObject;
    l.from.scene = as_int(el.items[1], "a scene number");
    l.from.event = as_int(el.items[2], "an event index");
  } else {
    form_fail(el, "unknown script element '" + eh + "'");
  }
  l.to = as_ident(form.items[3], "a node id");
  hybrid::add_hybrid_link(kb, l);
}

void apply_episode(hybrid::HybridKb& kb, const SExpr& form) {
  if (count_atoms(form) != 1)
    form_fail(form, "expected (episode <script> ...)");
  script::Episode ep;
  ep.script = as_ident(form.items[1], "a script name");
  auto sit = kb.scripts.find(ep.script);
  if (sit == kb.scripts.end())
    fail(ErrCode::UnknownScript, "unknown script '" + ep.script + "'");
  const script::Script& s = sit->second;
  for (std::size_t i = 2; i < form.items.size(); ++i) {
    const SExpr& e = form.items[i];
    if (e.kind != SExpr::Kind::List)
      form_fail(e, "expected a sub-form inside (episode ...)");
    std::string h = head_of(e);
    if (h == "bind") {
      if (e.items.size() != 3) form_fail(e, "expected (bind <role> <node>)");
      std::string role = as_ident(e.items[1], "a role symbol");
      if (!s.roles.count(role))
        form_fail(e, "script '" + ep.script + "' declares no role '" + role +
                         "'");
      ep.bindings[role] = as_ident(e.items[2], "a node id");
    } else if (h == "observed" || h == "inferred") {
      auto& dst = h == "observed" ? ep.observed : ep.inferred;
      for (std::size_t j = 1; j < e.items.size(); ++j)
        dst.push_back(read_event(e.items[j]));
    } else if (h == "path") {
      for (std::size_t j = 1; j < e.items.size(); ++j) {
        int n = as_int(e.items[j], "a scene number");
        if (!s.scene(n))
          form_fail(e.items[j], "script '" + ep.script + "' has no scene " +
                                    std::to_string(n));
        ep.scene_path.push_back(n);
      }
    } else if (h == "status") {
      if (e.items.size() != 2) form_fail(e, "expected (status open|completed)");
      std::string v = as_ident(e.items[1], "open or completed");
      if (v == "open")
        ep.status = script::EpisodeStatus::Open;
      else if (v == "completed")
        ep.status = script::EpisodeStatus::Completed;
      else
        form_fail(e.items[1], "unknown status '" + v + "'");
    } else {
      form_fail(e, "unknown sub-form '" + h + "' in (episode ...)");
    }
  }
  hybrid::add_episode(kb, std::move(ep));
}

void apply_form(hybrid::HybridKb& kb, const SExpr& form) {
  std::string head = head_of(form);
  if (head == "space")
    apply_space(kb, form);
  else if (head == "class")
    apply_node_decl(kb, form, semnet::NodeKind::GenericClass);
  else if (head == "instance")
    apply_node_decl(kb, form, semnet::NodeKind::Instance);
  else if (head == "isa" || head == "has" || head == "rel" || head == "attr")
    apply_edge(kb, form);
  else if (head == "script")
    apply_script(kb, form);
  else if (head == "link")
    apply_hybrid_link(kb, form);
  else if (head == "episode")
    apply_episode(kb, form);
  else
    form_fail(form, "unknown form head '" + head + "'");
}

void warn_unknown_agents(const hybrid::HybridKb& kb,
                         std::vector<Diagnostic>& diags) {
  for (const auto& [id, sp] : kb.net.spaces())
    if (sp.agent && !kb.net.has_node(*sp.agent))
      diag(diags, Diagnostic::Severity::Warning,
           "agent '" + *sp.agent + "' of space '" + id + "' is not a node",
           1, 1);
}

}  // namespace

ParseResult parse(std::string_view text) {
  ParseResult res;
  std::vector<Token> tokens = lex(text, res.diagnostics);
  std::vector<SExpr> forms = read_forms(tokens, res.diagnostics);
  bool syntax_clean = !has_error(res.diagnostics);

  hybrid::HybridKb kb;
  bool applied_all = true;
  for (const SExpr& form : forms) {
    try {
      apply_form(kb, form);
    } catch (const FormError& e) {
      diag(res.diagnostics, Diagnostic::Severity::Error, e.message, e.line,
           e.col);
      applied_all = false;
    } catch (const KbError& e) {
      diag(res.diagnostics, Diagnostic::Severity::Error, e.what(), form.line,
           form.col);
      applied_all = false;
    }
    if (!applied_all) break;  // first error aborts application
  }
  if (syntax_clean && applied_all) {
    warn_unknown_agents(kb, res.diagnostics);
    res.kb = std::move(kb);
  }
  return res;
}

// ---------------------------------------------------------------------------
// canonical serializer

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

int space_depth(const semnet::Kb& net, const semnet::SpaceId& id) {
  int d = 0;
  const semnet::Space* cur = &net.space(id);
  while (cur->parent) {
    ++d;
    cur = &net.space(*cur->parent);
  }
  return d;
}

std::string event_text(const script::Event& e) {
  std::string out = "(event " + e.actor + " " + e.action;
  if (!e.object.empty()) out += " " + e.object;
  return out + ")";
}

std::string pattern_text(const script::Pattern& p) {
  return p.subject + " " + p.predicate + " " + p.object;
}

// Which form introduces each value node under canonical ordering: the first
// attr form targeting it, else the first has form. The creator carries the
// (value-space) sub when its link space differs from the node's space.
std::map<semnet::NodeId, semnet::Link> value_creators(
    const semnet::Kb& net) {
  std::map<semnet::NodeId, semnet::Link> creators;  // value -> creator link
  auto is_value = [&](const semnet::NodeId& id) {
    return net.node(id).kind == semnet::NodeKind::Value;
  };
  std::vector<semnet::Link> attrs, hases;
  for (const semnet::Link& l : net.links()) {
    if (!is_value(l.to)) continue;
    switch (semnet::link_kind(l.label)) {
      case semnet::LinkKind::Named:
        attrs.push_back(l);
        break;
      case semnet::LinkKind::Has:
        hases.push_back(l);
        break;
      default:
        break;
    }
  }
  auto claim = [&](const std::vector<semnet::Link>& ls) {
    for (const semnet::Link& l : ls)
      if (!creators.count(l.to)) creators.emplace(l.to, l);
  };
  // attr forms sort by (from, label, to); net.links() is already in that
  // order, and attr forms precede has forms in the file.
  claim(attrs);
  std::sort(hases.begin(), hases.end(),
            [](const semnet::Link& a, const semnet::Link& b) {
              return std::tie(a.from, a.to) < std::tie(b.from, b.to);
            });
  claim(hases);
  return creators;
}

}  // namespace

std::string serialize(const hybrid::HybridKb& kb) {
  const semnet::Kb& net = kb.net;
  std::ostringstream o;

  // spaces by (depth, id) so parents precede children
  std::vector<const semnet::Space*> spaces;
  for (const auto& [id, sp] : net.spaces()) spaces.push_back(&sp);
  std::sort(spaces.begin(), spaces.end(),
            [&](const semnet::Space* a, const semnet::Space* b) {
              int da = space_depth(net, a->id), db = space_depth(net, b->id);
              return da != db ? da < db : a->id < b->id;
            });
  for (const semnet::Space* sp : spaces) {
    o << "(space " << sp->id;
    if (sp->parent) o << " (parent " << *sp->parent << ")";
    if (sp->kind == semnet::SpaceKind::GeneralStatement)
      o << " (kind general-statement)";
    if (sp->agent) o << " (agent " << *sp->agent << ")";
    o << ")\n";
  }

  auto node_subs = [&](const semnet::Node& n) {
    std::string out;
    if (n.space != semnet::kRootSpace) out += " (space " + n.space + ")";
    if (n.label != n.id) out += " (label " + quote(n.label) + ")";
    return out;
  };

  for (const auto& [id, n] : net.nodes()) {
    if (n.kind != semnet::NodeKind::GenericClass) continue;
    o << "(class " << id << node_subs(n) << ")\n";
  }

  for (const auto& [id, n] : net.nodes()) {
    if (n.kind != semnet::NodeKind::Instance) continue;
    std::vector<const semnet::Link*> classes;
    for (const semnet::Link& l : net.outgoing(id))
      if (semnet::link_kind(l.label) == semnet::LinkKind::InstanceOf)
        classes.push_back(&l);
    if (classes.empty()) {
      o << "(instance " << id << node_subs(n) << ")\n";
      continue;
    }
    for (std::size_t i = 0; i < classes.size(); ++i) {
      o << "(instance " << id << " " << classes[i]->to;
      if (i == 0) o << node_subs(n);
      if (classes[i]->space != n.space)
        o << " (link-space " << classes[i]->space << ")";
      o << ")\n";
    }
  }

  auto creators = value_creators(net);
  auto edge_subs = [&](const semnet::Link& l, bool creatable) {
    std::string out;
    if (l.space != net.node(l.from).space) out += " (space " + l.space + ")";
    if (creatable) {
      // the creating form carries (value-space) when the node does not live
      // in the link's space, so replay recreates it where it belongs
      auto it = creators.find(l.to);
      if (it != creators.end() && it->second == l &&
          net.node(l.to).space != l.space)
        out += " (value-space " + net.node(l.to).space + ")";
    }
    return out;
  };

  std::vector<semnet::Link> all = net.links();
  auto emit_edges = [&](semnet::LinkKind kind, bool value_targets,
                        const char* head, bool with_label, bool creatable) {
    std::vector<semnet::Link> sel;
    for (const semnet::Link& l : all) {
      if (semnet::link_kind(l.label) != kind) continue;
      bool tv = net.node(l.to).kind == semnet::NodeKind::Value;
      if (kind == semnet::LinkKind::Named && tv != value_targets) continue;
      sel.push_back(l);
    }
    std::sort(sel.begin(), sel.end());
    for (const semnet::Link& l : sel) {
      o << "(" << head << " " << l.from;
      if (with_label) o << " " << l.label;
      o << " " << l.to << edge_subs(l, creatable) << ")\n";
    }
  };
  // named-to-value links are attr forms and precede everything that could
  // reference the values they introduce
  emit_edges(semnet::LinkKind::Named, true, "attr", true, true);
  emit_edges(semnet::LinkKind::IsA, false, "isa", false, false);
  emit_edges(semnet::LinkKind::Has, false, "has", false, true);
  emit_edges(semnet::LinkKind::Named, false, "rel", true, false);

  for (const auto& [name, s] : kb.scripts) {
    o << "(script " << name << "\n";
    if (!s.track.empty()) o << "  (track " << quote(s.track) << ")\n";
    if (!s.props.empty()) {
      o << "  (props";
      for (const std::string& p : s.props) o << " " << p;
      o << ")\n";
    }
    for (const auto& [sym, desc] : s.roles)
      o << "  (role " << sym << " " << quote(desc) << ")\n";
    for (const script::Pattern& p : s.entry_conditions)
      o << "  (entry " << pattern_text(p) << ")\n";
    for (const script::Pattern& p : s.results)
      o << "  (result " << pattern_text(p) << ")\n";
    for (std::size_t i = 0; i < s.scenes.size(); ++i) {
      const script::Scene& sc = s.scenes[i];
      o << "  (scene " << sc.number << " " << quote(sc.name);
      for (const script::Event& e : sc.events) o << "\n    " << event_text(e);
      for (const script::Transition& t : sc.transitions)
        o << "\n    (goto " << t.target << " (when "
          << pattern_text(t.condition) << "))";
      o << ")";
      o << (i + 1 == s.scenes.size() ? ")\n" : "\n");
    }
    if (s.scenes.empty()) o << ")\n";
  }

  for (const hybrid::HybridLink& l : kb.links) {
    o << "(link " << l.from.script << " ";
    switch (l.from.kind) {
      case hybrid::ElementKind::Role:
        o << "(role " << l.from.symbol << ")";
        break;
      case hybrid::ElementKind::Prop:
        o << "(prop " << l.from.symbol << ")";
        break;
      case hybrid::ElementKind::EventObject:
        o << "(event " << l.from.scene << " " << l.from.event << ")";
        break;
    }
    o << " " << l.to << ")\n";
  }

  std::vector<std::string> episode_blocks;
  for (const script::Episode& ep : kb.episodes) {
    std::ostringstream b;
    b << "(episode " << ep.script << "\n";
    for (const auto& [role, node] : ep.bindings)
      b << "  (bind " << role << " " << node << ")\n";
    auto emit_events = [&](const char* head,
                           const std::vector<script::Event>& events) {
      if (events.empty()) return;
      b << "  (" << head;
      for (const script::Event& e : events) b << "\n    " << event_text(e);
      b << ")\n";
    };
    emit_events("observed", ep.observed);
    emit_events("inferred", ep.inferred);
    if (!ep.scene_path.empty()) {
      b << "  (path";
      for (int n : ep.scene_path) b << " " << n;
      b << ")\n";
    }
    b << "  (status "
      << (ep.status == script::EpisodeStatus::Open ? "open" : "completed")
      << "))\n";
    episode_blocks.push_back(b.str());
  }
  std::sort(episode_blocks.begin(), episode_blocks.end());
  for (const std::string& blk : episode_blocks) o << blk;

  return o.str();
}

// ---------------------------------------------------------------------------
// single-form entry points

namespace {

std::optional<SExpr> read_single_form(std::string_view text,
                                      std::vector<Diagnostic>& diags) {
  std::vector<Token> tokens = lex(text, diags);
  std::vector<SExpr> forms = read_forms(tokens, diags);
  if (has_error(diags)) return std::nullopt;
  if (forms.size() != 1 || forms[0].kind != SExpr::Kind::List) {
    diag(diags, Diagnostic::Severity::Error, "expected exactly one form", 1,
         1);
    return std::nullopt;
  }
  return forms[0];
}

}  // namespace

TellOutcome tell_text(hybrid::HybridKb& kb, std::string_view form_text) {
  TellOutcome out;
  auto form = read_single_form(form_text, out.diagnostics);
  if (!form) return out;
  try {
    std::string head = head_of(*form);
    if (head == "isa" || head == "has" || head == "rel" || head == "attr") {
      kbsl::Fact f;
      if (head == "isa" || head == "has") {
        if (count_atoms(*form) != 2)
          form_fail(*form, "expected (" + head + " <subject> <object>)");
        f.subject = as_ident(form->items[1], "a node id");
        f.predicate = head == "isa" ? semnet::kIsA : semnet::kHas;
        f.object = as_ident(form->items[2], "a node id");
      } else {
        if (count_atoms(*form) != 3)
          form_fail(*form,
                    "expected (" + head + " <subject> <name> <object>)");
        f.subject = as_ident(form->items[1], "a node id");
        f.predicate = as_ident(form->items[2], "a relation name");
        check_relation_name(form->items[2], f.predicate);
        f.object = as_ident(form->items[3], "a node id");
      }
      static const std::set<std::string> allowed{"space"};
      f.space = sub_ident(*form, "space", allowed, "");
      out.result = kbsl::tell(kb, f);
      return out;
    }
    if (head == "event") {
      if (form->items.size() < 4 || form->items.size() > 5)
        form_fail(*form,
                  "expected (event <script> <actor> <action> [<object>])");
      kbsl::ScriptEvent se;
      se.script = as_ident(form->items[1], "a script name");
      se.event.actor = as_ident(form->items[2], "a role symbol");
      se.event.action = as_ident(form->items[3], "an action");
      if (form->items.size() == 5)
        se.event.object = as_ident(form->items[4], "an object identifier");
      out.result = kbsl::tell(kb, se);
      return out;
    }
    // declaration heads apply atomically: work on a copy, swap on success
    hybrid::HybridKb copy = kb;
    apply_form(copy, *form);
    kb = std::move(copy);
    out.result = kbsl::TellResult{kbsl::TellStatus::Accepted, "", {}};
  } catch (const FormError& e) {
    diag(out.diagnostics, Diagnostic::Severity::Error, e.message, e.line,
         e.col);
  } catch (const KbError& e) {
    out.result = kbsl::TellResult{kbsl::TellStatus::Rejected, e.what(),
                                  e.code()};
  }
  return out;
}

QueryParse parse_query_text(std::string_view form_text) {
  QueryParse out;
  auto form = read_single_form(form_text, out.diagnostics);
  if (!form) return out;
  try {
    std::string head = head_of(*form);
    if (head == "yesno") {
      kbsl::YesNoQuery q;
      q.pattern = read_pattern(*form, false);
      out.query = q;
    } else if (head == "wh") {
      if (form->items.size() != 4)
        form_fail(*form, "expected (wh <subject|?> <predicate> <object|?>)");
      kbsl::WhQuery q;
      q.pattern.subject = as_pattern_atom(form->items[1], true);
      q.pattern.predicate = as_pattern_atom(form->items[2], false);
      q.pattern.object = as_pattern_atom(form->items[3], true);
      out.query = q;
    } else if (head == "roledetail") {
      if (form->items.size() != 3)
        form_fail(*form, "expected (roledetail <script> <role>)");
      kbsl::RoleDetailQuery q;
      q.script = as_ident(form->items[1], "a script name");
      q.role = as_ident(form->items[2], "a role symbol");
      out.query = q;
    } else if (head == "didhappen") {
      if (form->items.size() < 3 || form->items.size() > 4)
        form_fail(*form, "expected (didhappen <script> <action> [<object>])");
      kbsl::DidHappenQuery q;
      q.script = as_ident(form->items[1], "a script name");
      q.event.action = as_ident(form->items[2], "an action");
      if (form->items.size() == 4)
        q.event.object = as_ident(form->items[3], "an object identifier");
      out.query = q;
    } else {
      form_fail(*form, "unknown query head '" + head + "'");
    }
  } catch (const FormError& e) {
    diag(out.diagnostics, Diagnostic::Severity::Error, e.message, e.line,
         e.col);
  }
  return out;
}

EventsParse parse_event_text(std::string_view text) {
  EventsParse out;
  std::vector<Token> tokens = lex(text, out.diagnostics);
  std::vector<SExpr> forms = read_forms(tokens, out.diagnostics);
  if (has_error(out.diagnostics)) return out;
  try {
    for (const SExpr& form : forms) {
      if (form.kind != SExpr::Kind::List || form.items.empty() ||
          form.items.size() > 3)
        form_fail(form, "expected (action), (action object) or "
                        "(actor action object)");
      script::Event ev;
      if (form.items.size() == 3) {
        ev.actor = as_ident(form.items[0], "an actor");
        ev.action = as_ident(form.items[1], "an action");
        ev.object = as_ident(form.items[2], "an object identifier");
      } else {
        ev.action = as_ident(form.items[0], "an action");
        if (form.items.size() == 2)
          ev.object = as_ident(form.items[1], "an object identifier");
      }
      out.events.push_back(ev);
    }
    if (out.events.empty())
      diag(out.diagnostics, Diagnostic::Severity::Error,
           "expected at least one event form", 1, 1);
  } catch (const FormError& e) {
    diag(out.diagnostics, Diagnostic::Severity::Error, e.message, e.line,
         e.col);
    out.events.clear();
  }
  return out;
}

}  // namespace hkr::dsl
