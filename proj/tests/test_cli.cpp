#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dirtrace/cli.hpp"
#include "dirtrace/common.hpp"
#include "dirtrace/verify.hpp"

using namespace dirtrace;
using cli::RunConfig;
using cli::parse_thetas;

namespace {

// Scratch directory shared by all subprocess cases.
const std::string& tmp_dir() {
  static const std::string dir = [] {
    char tmpl[] = "/tmp/dirtrace_cli_XXXXXX";
    const char* d = mkdtemp(tmpl);
    if (!d) std::abort();
    return std::string(d);
  }();
  return dir;
}

struct CliRun {
  int code = -1;
  std::string output;  // stdout and stderr, interleaved
};

// Run the installed binary with `args`, capturing output and the exit code.
CliRun run_cli(const std::string& args) {
  static int counter = 0;
  const std::string log = tmp_dir() + "/log" + std::to_string(counter++) + ".txt";
  const std::string cmd = std::string(DIRTRACE_CLI_PATH) + " " + args + " >" + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliRun r;
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
  std::ifstream in(log);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(bool(in));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(bool(in));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("parse_thetas: right angles land exactly on the axes") {
  auto dirs = parse_thetas("0,90,180,270", 2);
  REQUIRE(dirs.size() == 4);
  CHECK(dirs[0][0] == 1.0);
  CHECK(dirs[0][1] == 0.0);
  CHECK(dirs[1][0] == 0.0);
  CHECK(dirs[1][1] == 1.0);
  CHECK(dirs[2][0] == -1.0);
  CHECK(dirs[2][1] == 0.0);
  CHECK(dirs[3][0] == 0.0);
  CHECK(dirs[3][1] == -1.0);

  // multiples of 90 snap exactly even outside [0,360)
  auto wrap = parse_thetas("450, -90", 2);
  REQUIRE(wrap.size() == 2);
  CHECK(wrap[0][0] == 0.0);
  CHECK(wrap[0][1] == 1.0);
  CHECK(wrap[1][0] == 0.0);
  CHECK(wrap[1][1] == -1.0);
}

TEST_CASE("parse_thetas: degrees, deg suffix, components, and 1-D signs") {
  auto d30 = parse_thetas("30", 2);
  REQUIRE(d30.size() == 1);
  CHECK(d30[0][0] == doctest::Approx(std::cos(M_PI / 6.0)).epsilon(1e-15));
  CHECK(d30[0][1] == doctest::Approx(0.5).epsilon(1e-15));

  auto suffixed = parse_thetas("45deg, 45 deg, 45", 2);
  REQUIRE(suffixed.size() == 3);
  CHECK(suffixed[0][0] == suffixed[2][0]);
  CHECK(suffixed[1][1] == suffixed[2][1]);
  CHECK(suffixed[0][0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));

  // raw components are normalized
  auto comp = parse_thetas("(3,4),(0,-2)", 2);
  REQUIRE(comp.size() == 2);
  CHECK(comp[0][0] == 0.6);
  CHECK(comp[0][1] == 0.8);
  CHECK(comp[1][0] == 0.0);
  CHECK(comp[1][1] == -1.0);

  auto line = parse_thetas("+1,-1", 1);
  REQUIRE(line.size() == 2);
  CHECK(line[0][0] == 1.0);
  CHECK(line[1][0] == -1.0);
}

TEST_CASE("parse_thetas: malformed lists are rejected") {
  CHECK_THROWS_AS(parse_thetas("", 2), BadParameter);
  CHECK_THROWS_AS(parse_thetas("0,,90", 2), BadParameter);
  CHECK_THROWS_AS(parse_thetas("(1,0", 2), BadParameter);
  CHECK_THROWS_AS(parse_thetas("(1,2,3)", 2), BadParameter);
  CHECK_THROWS_AS(parse_thetas("()", 2), BadParameter);
  CHECK_THROWS_AS(parse_thetas("(0,0)", 2), BadParameter);
  CHECK_THROWS_AS(parse_thetas("abc", 2), BadParameter);
  CHECK_THROWS_AS(parse_thetas("45degg", 2), BadParameter);
  CHECK_THROWS_AS(parse_thetas("0.5", 1), BadParameter);     // 1-D wants +1/-1
  CHECK_THROWS_AS(parse_thetas("30deg", 1), BadParameter);   // no angles on the line
  CHECK_THROWS_AS(parse_thetas("30", 3), BadParameter);      // no bare angles in 3-D
}

TEST_CASE("run config survives the JSON round trip") {
  RunConfig a;
  a.subcommand = "verify";
  a.domain = "lshape";
  a.fields = {"x1*x2", "sin(x1)"};
  a.thetas = "0,45";
  a.mode = "mc";
  a.samples = 777;
  a.seed = 123456789ull;
  a.suite = "bounds";
  a.out = "/tmp/r.json";
  a.out_density = "/tmp/d.json";
  a.nodes = "/tmp/n.csv";
  a.emit = "/tmp/e.json";
  a.name = "cusp";
  a.rho = 0.25;
  a.depth = 7;
  a.alpha = 0.9;
  a.teeth = 5;
  a.tol = 1e-6;

  const RunConfig b = RunConfig::from_json(a.to_json());
  CHECK(b.subcommand == a.subcommand);
  CHECK(b.domain == a.domain);
  CHECK(b.fields == a.fields);
  CHECK(b.thetas == a.thetas);
  CHECK(b.mode == a.mode);
  CHECK(b.samples == a.samples);
  CHECK(b.seed == a.seed);
  CHECK(b.suite == a.suite);
  CHECK(b.out == a.out);
  CHECK(b.out_density == a.out_density);
  CHECK(b.nodes == a.nodes);
  CHECK(b.emit == a.emit);
  CHECK(b.name == a.name);
  CHECK(b.rho == a.rho);
  CHECK(b.depth == a.depth);
  CHECK(b.alpha == a.alpha);
  CHECK(b.teeth == a.teeth);
  CHECK(b.tol == a.tol);

  // missing keys fall back to the documented defaults
  const RunConfig d = RunConfig::from_json(nlohmann::json::object());
  CHECK(d.mode == "exact");
  CHECK(d.samples == 20000);
  CHECK(d.seed == 20260814ull);
  CHECK(d.suite == "default");
  CHECK(d.rho == -1.0);
  CHECK(d.depth == -1);
  CHECK(d.tol == 1e-8);
}

TEST_CASE("cli: gallery export feeds measure on the gap family") {
  const std::string spec = tmp_dir() + "/cantor10.json";
  const CliRun g = run_cli("gallery cantor_complement --rho 0.25 --depth 10 --emit " + spec);
  CHECK(g.code == 0);
  CHECK(contains(g.output, "gallery cantor_complement"));

  const std::string csv = tmp_dir() + "/cantor10_mu.csv";
  const CliRun m = run_cli("measure --domain " + spec + " --theta +1 --out " + csv);
  CHECK(m.code == 0);
  CHECK(contains(m.output, "atoms=2047"));

  const auto rows = read_csv(csv);
  REQUIRE(rows.size() == 2048);  // header + one atom per gap
  REQUIRE(rows[0].size() == 4);
  CHECK(rows[0][0] == "x");
  CHECK(rows[0][2] == "weight");
  StableSum mass;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 4);
    CHECK(!rows[i][3].empty());
    mass.add(std::stod(rows[i][2]));
  }
  // truncated gap mass: sum over levels k<=10 of 2^k * 0.25^(k+1)
  CHECK(mass.value() == doctest::Approx(0.499755859375).epsilon(1e-12));

  // the short name "cantor" is an accepted alias
  const CliRun alias = run_cli("gallery cantor --rho 0.25 --depth 2 --emit " + tmp_dir() +
                               "/cantor2.json");
  CHECK(alias.code == 0);
}

TEST_CASE("cli: exact measure CSV and density export on the square") {
  const std::string csv = tmp_dir() + "/square_mu.csv";
  const std::string dens = tmp_dir() + "/square_density.json";
  const CliRun m = run_cli("measure --domain square --theta 30 --out " + csv +
                           " --out-density " + dens);
  CHECK(m.code == 0);
  CHECK(contains(m.output, "mode=exact"));

  const auto rows = read_csv(csv);
  REQUIRE(rows.size() > 1);
  StableSum mass;
  for (std::size_t i = 1; i < rows.size(); ++i) mass.add(std::stod(rows[i][2]));
  CHECK(mass.value() == doctest::Approx(1.0).epsilon(1e-9));  // pushforward keeps the area

  nlohmann::json dj;
  {
    std::ifstream in(dens);
    REQUIRE(bool(in));
    in >> dj;
  }
  CHECK(dj["domain"] == "square");
  CHECK(dj["mode"] == "exact");
  CHECK(double(dj["total_mass"]) == doctest::Approx(1.0).epsilon(1e-12));
  REQUIRE(dj["densities"].is_array());
  CHECK(!dj["densities"].empty());
}

TEST_CASE("cli: monte carlo measures are seed-deterministic") {
  const std::string base = "measure --domain lshape --theta 30 --mode mc --samples 2000 ";
  const std::string f1 = tmp_dir() + "/mc1.csv";
  const std::string f2 = tmp_dir() + "/mc2.csv";
  const std::string f3 = tmp_dir() + "/mc3.csv";
  CHECK(run_cli(base + "--seed 7 --out " + f1).code == 0);
  CHECK(run_cli(base + "--seed 7 --out " + f2).code == 0);
  CHECK(run_cli(base + "--seed 8 --out " + f3).code == 0);
  CHECK(slurp(f1) == slurp(f2));
  CHECK(slurp(f1) != slurp(f3));
}

TEST_CASE("cli: trace streams boundary values to CSV") {
  const std::string out = tmp_dir() + "/trace_square.csv";
  const CliRun t = run_cli("trace --domain square --field x1 --theta 0 --out " + out);
  CHECK(t.code == 0);
  CHECK(contains(t.output, "anchor_failures=0"));

  const auto rows = read_csv(out);
  REQUIRE(rows.size() == 17);  // header + 16 nodes on the x1=1 face
  REQUIRE(rows[0].size() == 8);
  CHECK(rows[0][0] == "x");
  CHECK(rows[0][4] == "value");
  CHECK(rows[0][7] == "quad_error");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 8);
    CHECK(std::stod(rows[i][0]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::stod(rows[i][4]) == doctest::Approx(1.0).epsilon(1e-7));   // u = x1 at exit
    CHECK(std::stod(rows[i][5]) == doctest::Approx(0.0).scale(1).epsilon(1e-7));
    CHECK(std::stod(rows[i][6]) == doctest::Approx(1.0).epsilon(1e-12));  // chord length
  }
}

TEST_CASE("cli: off-chord nodes are flagged and fail the run") {
  const std::string nodes = tmp_dir() + "/hand_nodes.csv";
  {
    std::ofstream out(nodes);
    out << "x,y,weight,provenance\n";
    out << "1,0.5,1,hand\n";
    out << "0.5,0.5,1,interior\n";  // not a boundary exit point for theta = e1
  }
  const std::string out = tmp_dir() + "/trace_hand.csv";
  const CliRun t =
      run_cli("trace --domain square --field x1 --theta 0 --nodes " + nodes + " --out " + out);
  CHECK(t.code == 1);
  CHECK(contains(t.output, "anchor_failures=1"));

  const auto rows = read_csv(out);
  REQUIRE(rows.size() == 3);
  CHECK(std::stod(rows[1][4]) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(rows[2][3] == "interior+anchor_failed");
  CHECK(std::isnan(std::stod(rows[2][4])));
}

TEST_CASE("cli: the default verify suite writes a parseable all-green report") {
  const std::string rep = tmp_dir() + "/report.json";
  const CliRun v = run_cli("verify --domain square --field 'x1*x2' --field 'sin(x1)'"
                           " --thetas 0,90 --out " + rep);
  CHECK(v.code == 0);
  CHECK(contains(v.output, "[ ok ]"));
  CHECK(!contains(v.output, "FAIL"));

  nlohmann::json arr;
  {
    std::ifstream in(rep);
    REQUIRE(bool(in));
    in >> arr;
  }
  REQUIRE(arr.is_array());
  REQUIRE(arr.size() == 9);  // (green + 3 bounds) per direction + consistency

  std::map<std::string, int> names;
  for (const auto& el : arr) {
    const VerificationReport r = VerificationReport::from_json(el);
    CAPTURE(r.name);
    CHECK(r.pass);
    CHECK(r.domain_id == "square");
    names[r.name]++;
  }
  CHECK(names["green"] == 2);
  CHECK(names["trace_bound"] == 2);
  CHECK(names["sum_bound"] == 2);
  CHECK(names["diff_bound"] == 2);
  CHECK(names["consistency"] == 1);
}

TEST_CASE("cli: usage problems exit 2, io problems exit 3") {
  // usage
  CHECK(run_cli("").code == 2);                     // a subcommand is required
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("measure --domain square").code == 2);  // missing --theta/--out
  CHECK(run_cli("gallery nope --emit " + tmp_dir() + "/x.json").code == 2);
  CHECK(run_cli("gallery cusp --alpha 0.3 --emit " + tmp_dir() + "/x.json").code == 2);
  CHECK(run_cli("measure --domain square --theta 0,90 --out " + tmp_dir() + "/x.csv").code == 2);
  CHECK(run_cli("measure --domain square --theta bogus --out " + tmp_dir() + "/x.csv").code == 2);
  CHECK(run_cli("measure --domain square --theta 0 --mode guess --out " + tmp_dir() +
                "/x.csv").code == 2);
  CHECK(run_cli("trace --domain square --field 'x1+' --theta 0 --out " + tmp_dir() +
                "/x.csv").code == 2);

  // io
  CHECK(run_cli("measure --domain /no/such/spec.json --theta 0 --out " + tmp_dir() +
                "/x.csv").code == 3);
  CHECK(run_cli("gallery square --emit /no/such/dir/out.json").code == 3);
  CHECK(run_cli("measure --domain square --theta 0 --out /no/such/dir/out.csv").code == 3);

  // help is not an error
  CHECK(run_cli("--help").code == 0);
}
