#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "hkr/dot_export.hpp"
#include "hkr/session.hpp"
#include "test_support.hpp"

using namespace hkr;

namespace {

struct RunResult {
  int code = 0;
  std::string out, err;
};

RunResult run_cli(const std::vector<std::string>& args,
              const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  RunResult r;
  r.code = hkr::cli::run(args, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::size_t count_sub(const std::string& text, const std::string& needle) {
  std::size_t n = 0, pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++n;
    pos += needle.size();
  }
  return n;
}

std::string tmp_file(const std::string& name) {
  return "/tmp/hkr_test_" + name;
}

}  // namespace

TEST_CASE("load then ask prints the verdict with its trace") {
  RunResult r = run_cli({"load", testsup::fixture_path("ramnavami.kb"), "ask",
                     "(yesno rama son-of dasharatha)"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("yes 1.00\n", 0) == 0);
  CHECK(r.out.find("  asserted (rama son-of dasharatha) confidence 1.00") !=
        std::string::npos);
}

TEST_CASE("wh answers list every binding") {
  RunResult r = run_cli({"load", testsup::fixture_path("ramnavami.kb"), "ask",
                     "(wh rama son-of ?)"});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("dasharatha kaushalya 1.00\n", 0) == 0);
}

TEST_CASE("ask before load is a usage error") {
  RunResult r = run_cli({"ask", "(yesno a b c)"});
  CHECK(r.code == 1);
  CHECK(r.err.find("no knowledge base") != std::string::npos);
  CHECK(r.out.empty());
}

TEST_CASE("usage and unknown commands") {
  CHECK(run_cli({}).code == 1);
  CHECK(run_cli({"--help"}).code == 0);
  CHECK(run_cli({"frobnicate"}).code == 1);
  CHECK(run_cli({"load"}).code == 1);                    // missing argument
  CHECK(run_cli({"load", "/no/such/file.kb"}).code == 2);
  CHECK(run_cli({"--set", "confidence.decay=2"}).code == 1);
  CHECK(run_cli({"--set", "confidence.decay"}).code == 1);
  CHECK(run_cli({"--set", "nope=0.5"}).code == 1);
}

TEST_CASE("tell starts a KB and save round-trips it") {
  std::string path = tmp_file("built.kb");
  RunResult r = run_cli({"tell", "(class deity)", "tell",
                     "(instance rama deity)", "tell",
                     "(rel rama incarnation-of rama)", "save", path});
  CHECK(r.code == 0);
  CHECK(count_sub(r.out, "accepted\n") == 3);

  RunResult again = run_cli({"load", path, "ask",
                         "(yesno rama incarnation-of rama)"});
  CHECK(again.code == 0);
  CHECK(again.out.rfind("yes 1.00\n", 0) == 0);

  // re-telling and saving leaves the canonical file unchanged
  std::string path2 = tmp_file("built2.kb");
  RunResult retell = run_cli({"load", path, "tell",
                          "(rel rama incarnation-of rama)", "save", path2});
  CHECK(retell.code == 0);
  CHECK(retell.out == "skipped\n");
  CHECK(testsup::read_file(path) == testsup::read_file(path2));
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("rejected tell exits with a KB error") {
  RunResult r = run_cli({"tell", "(class a)", "tell", "(class b)", "tell",
                     "(isa a b)", "tell", "(isa b a)"});
  CHECK(r.code == 2);
  CHECK(r.out.find("rejected") != std::string::npos);
}

TEST_CASE("gapfill then didhappen reports the gap-filled confidence") {
  RunResult r = run_cli({"load", testsup::fixture_path("restaurant.kb"),
                     "gapfill", "restaurant", "(enter restaurant)",
                     "(eat pastries)", "ask", "(didhappen restaurant pay)"});
  CHECK(r.code == 0);
  CHECK(r.out.find("path 1 2 3 4 5\n") != std::string::npos);
  CHECK(r.out.find("inferred (c order pastries)") != std::string::npos);
  CHECK(r.out.find("yes 0.70\n") != std::string::npos);
}

TEST_CASE("configured gap-fill factor changes the answer") {
  RunResult r = run_cli({"--set", "confidence.gapfill=0.5", "load",
                     testsup::fixture_path("restaurant.kb"), "gapfill",
                     "restaurant", "(enter restaurant)", "ask",
                     "(didhappen restaurant pay)"});
  CHECK(r.code == 0);
  CHECK(r.out.find("yes 0.50\n") != std::string::npos);
}

TEST_CASE("config file provides defaults") {
  std::string cfg = tmp_file("conf");
  {
    std::ofstream f(cfg);
    f << "# comment\nconfidence.gapfill = 0.6\n";
  }
  RunResult r = run_cli({"--config", cfg, "load",
                     testsup::fixture_path("restaurant.kb"), "gapfill",
                     "restaurant", "(enter restaurant)", "ask",
                     "(didhappen restaurant pay)"});
  CHECK(r.code == 0);
  CHECK(r.out.find("yes 0.60\n") != std::string::npos);
  std::remove(cfg.c_str());

  CHECK(run_cli({"--config", "/no/such/conf"}).code == 1);
}

TEST_CASE("export-dot writes a deterministic rendering") {
  std::string p1 = tmp_file("a.dot");
  std::string p2 = tmp_file("b.dot");
  RunResult r1 = run_cli({"load", testsup::fixture_path("ramnavami.kb"),
                      "export-dot", p1});
  RunResult r2 = run_cli({"load", testsup::fixture_path("ramnavami.kb"),
                      "export-dot", p2});
  CHECK(r1.code == 0);
  CHECK(r2.code == 0);
  std::string d1 = testsup::read_file(p1);
  CHECK(d1 == testsup::read_file(p2));

  auto kb = testsup::load_fixture("ramnavami.kb");
  std::size_t rendered = count_sub(d1, "shape=box") +
                         count_sub(d1, "shape=ellipse") +
                         count_sub(d1, "shape=note");
  CHECK(rendered == kb.net.node_count());
  CHECK(d1.find("subgraph \"cluster_s0\"") != std::string::npos);
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("empty KB still renders a valid cluster") {
  hybrid::HybridKb kb;
  std::string dot = hkr::cli::export_dot(kb);
  CHECK(dot.find("digraph kb {") == 0);
  CHECK(dot.find("subgraph \"cluster_s0\"") != std::string::npos);
  CHECK(count_sub(dot, "shape=") == 0);
}

TEST_CASE("belief fixture renders its space as a nested cluster") {
  auto kb = testsup::load_fixture("belief.kb");
  std::string dot = hkr::cli::export_dot(kb);
  auto outer = dot.find("subgraph \"cluster_s0\"");
  auto inner = dot.find("subgraph \"cluster_space1\"");
  REQUIRE(outer != std::string::npos);
  REQUIRE(inner != std::string::npos);
  CHECK(outer < inner);
  CHECK(dot.find("\"n_earth\"") > inner);
}

TEST_CASE("one-shot and REPL sessions answer identically") {
  std::vector<std::string> one_shot{
      "load", testsup::fixture_path("restaurant.kb"),
      "tell", "(rel rohan likes pastries)",
      "ask",  "(yesno rohan likes pastries)",
      "gapfill", "restaurant", "(enter restaurant)", "(eat pastries)",
      "ask",  "(didhappen restaurant pay)"};
  RunResult a = run_cli(one_shot);

  std::string script;
  script += "load " + testsup::fixture_path("restaurant.kb") + "\n";
  script += "tell (rel rohan likes pastries)\n";
  script += "ask (yesno rohan likes pastries)\n";
  script += "gapfill restaurant (enter restaurant) (eat pastries)\n";
  script += "ask (didhappen restaurant pay)\n";
  script += "quit\n";
  RunResult b = run_cli({"repl"}, script);

  CHECK(a.code == 0);
  CHECK(b.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("REPL reports errors and keeps going") {
  std::string script =
      "ask (yesno a b c)\n"          // no KB yet
      "tell (class deity)\n"
      "tell (class deity)\n"         // duplicate: rejected, loop continues
      "ask (yesno deity divine yes)\n"
      "quit\n";
  RunResult r = run_cli({"repl"}, script);
  CHECK(r.code == 0);
  CHECK(r.err.find("no knowledge base") != std::string::npos);
  CHECK(r.out.find("accepted\n") != std::string::npos);
  CHECK(r.out.find("rejected") != std::string::npos);
  CHECK(r.out.find("unknown\n") != std::string::npos);
}
