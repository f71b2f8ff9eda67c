#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "sosim/cli.hpp"

using namespace sosim;
namespace fs = std::filesystem;

namespace {

struct Call {
  int code;
  std::string out;
  std::string err;
};

Call cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"sosim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("sosim_cli_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("fixtures then validate") {
  TempDir dir;
  CHECK(cli({"fixtures", "--name", "block", "--out", dir / "b.gml"}).code == 0);
  const Call v = cli({"validate", "--network", dir / "b.gml"});
  CHECK(v.code == 0);
  CHECK(v.out.find("14 agents") != std::string::npos);
}

TEST_CASE("validate rejects broken files") {
  TempDir dir;
  std::ofstream(dir / "bad.gml") << "graph [ resources \"a\" node [ id 0 ] edge [ source 0 target 0 cost \"1\" ] ]";
  CHECK(cli({"validate", "--network", dir / "bad.gml"}).code == 1);
  std::ofstream(dir / "junk.gml") << "graph [ resources \"a\" node [ id 0 ";
  CHECK(cli({"validate", "--network", dir / "junk.gml"}).code == 1);
  CHECK(cli({"validate", "--network", dir / "missing.gml"}).code == 1);
}

TEST_CASE("usage errors exit 1") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"run", "--bogus"}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"fixtures", "--name", "nope"}).code == 1);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("run writes identical bytes for identical inputs") {
  TempDir dir;
  cli({"fixtures", "--name", "block", "--out", dir / "b.gml"});
  std::ofstream(dir / "s.json") << R"({"name": "g", "horizon": 5,
    "generators": [{"type": "LinkCostScale", "targets": [0, 1, 2], "onset_prob": 0.3,
                    "magnitude": [1, 4],
                    "duration": {"kind": "geometric", "p": 0.5}}]})";
  for (const char* f : {"a.csv", "b.csv"}) {
    REQUIRE(cli({"run", "--network", dir / "b.gml", "--scenario", dir / "s.json", "--seed", "4",
                 "--out", dir / f})
                .code == 0);
  }
  const std::string a = slurp(dir / "a.csv");
  CHECK(a == slurp(dir / "b.csv"));
  CHECK(std::count(a.begin(), a.end(), '\n') == 4 + 1 + 5);
  CHECK(a.find("# seed: 4") != std::string::npos);
}

TEST_CASE("run that strands demand exits 2") {
  TempDir dir;
  cli({"fixtures", "--name", "block", "--out", dir / "b.gml"});
  // A0 is the only petrol source; cutting its three links strands petrol demand.
  std::ofstream(dir / "s.json") << R"({"horizon": 2, "events": [
    {"start": 2, "type": "LinkBreak", "link": 0}, {"start": 2, "type": "LinkBreak", "link": 1},
    {"start": 2, "type": "LinkBreak", "link": 2}]})";
  const Call c = cli({"run", "--network", dir / "b.gml", "--scenario", dir / "s.json"});
  CHECK(c.code == 2);
  CHECK(c.err.find("UnpricedDemand") != std::string::npos);
  CHECK(c.err.find("t=2") != std::string::npos);
}

TEST_CASE("run with an absent link exits 2") {
  TempDir dir;
  cli({"fixtures", "--name", "3node", "--out", dir / "n.gml"});
  std::ofstream(dir / "s.json") << R"({"events": [{"type": "LinkBreak", "link": 17}]})";
  const Call c = cli({"run", "--network", dir / "n.gml", "--scenario", dir / "s.json"});
  CHECK(c.code == 2);
  CHECK(c.err.find("UnresolvedTarget") != std::string::npos);
}

TEST_CASE("run takes its default seed from the environment") {
  TempDir dir;
  cli({"fixtures", "--name", "3node", "--out", dir / "n.gml"});
  ::setenv("SOSIM_SEED", "31", 1);
  const Call c = cli({"run", "--network", dir / "n.gml", "--out", "-"});
  ::unsetenv("SOSIM_SEED");
  CHECK(c.code == 0);
  CHECK(c.out.find("# seed: 31") != std::string::npos);
}

TEST_CASE("command-line seed beats the file seed for generators too") {
  TempDir dir;
  cli({"fixtures", "--name", "3node", "--out", dir / "n.gml"});
  std::ofstream(dir / "s.json") << R"({"seed": 42, "horizon": 30, "generators": [
    {"type": "LinkCostScale", "targets": [0, 2], "onset_prob": 0.3, "magnitude": [1.2, 2.0]}]})";
  auto body = [&](std::vector<std::string> extra) {
    std::vector<std::string> args{"run", "--network", dir / "n.gml", "--scenario", dir / "s.json",
                                  "--out", "-"};
    args.insert(args.end(), extra.begin(), extra.end());
    const Call c = cli(args);
    REQUIRE(c.code == 0);
    return c.out.substr(c.out.find("timestep,"));
  };
  const std::string file = body({});
  CHECK(body({"--seed", "42"}) == file);
  CHECK(body({"--seed", "7"}) != file);
  CHECK(body({"--seed", "7"}) == body({"--seed", "7"}));
}

TEST_CASE("sweep and generate") {
  TempDir dir;
  CHECK(cli({"generate", "--nodes", "20", "--p", "0.2", "--seed", "3", "--out", dir / "g.gml"}).code == 0);
  CHECK(cli({"validate", "--network", dir / "g.gml"}).code == 0);
  const Call s = cli({"sweep", "--network", dir / "g.gml", "--scales", "0.5,1,2"});
  CHECK(s.code == 0);
  CHECK(s.out.find("quantity,cost") != std::string::npos);
  CHECK(cli({"sweep", "--network", dir / "g.gml", "--scales", "1,x"}).code == 1);
  CHECK(cli({"generate", "--nodes", "50", "--p", "0", "--out", dir / "d.gml"}).code == 2);
}

TEST_CASE("paper-suite writes nine curves and a cost table") {
  TempDir dir;
  const Call c = cli({"paper-suite", "--out", dir / "suite"});
  REQUIRE(c.code == 0);
  int curves = 0;
  for (const auto& e : fs::directory_iterator(dir.path / "suite")) {
    if (e.path().filename().string().rfind("curve_", 0) == 0) ++curves;
  }
  CHECK(curves == 9);
  const std::string costs = slurp(dir.path / "suite" / "costs.csv");
  CHECK(std::count(costs.begin(), costs.end(), '\n') == 2 + 9);
}
