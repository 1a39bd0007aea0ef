#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "cyclelab/io.hpp"
#include "json.hpp"

// CYCLELAB_BIN is injected by the build: the full path of the command line
// tool under test. The io layer is tested in-process; the tool end to end.

namespace fs = std::filesystem;
using cyclelab::io::Config;
using cyclelab::io::Csv;

namespace {

struct RunResult {
  int rc = -1;
  std::string out;
  std::string err;
};

fs::path scratch_root() {
  return fs::temp_directory_path() / "cyclelab_cli_tests";
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = scratch_root() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunResult run_tool(const std::string& args) {
  fs::path out_log = scratch_root() / "stdout.log";
  fs::path err_log = scratch_root() / "stderr.log";
  fs::create_directories(scratch_root());
  std::string cmd = std::string("\"") + CYCLELAB_BIN + "\" " + args + " > \"" +
                    out_log.string() + "\" 2> \"" + err_log.string() + "\"";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = cyclelab::io::read_file(out_log.string());
  r.err = cyclelab::io::read_file(err_log.string());
  return r;
}

void write_text(const fs::path& p, const std::string& text) {
  cyclelab::io::write_file_atomic(p.string(), text);
}

// cell lookup by header name, first data row
std::string first_cell(const Csv& csv, const std::string& column) {
  for (std::size_t j = 0; j < csv.header.size(); ++j)
    if (csv.header[j] == column) return csv.rows.at(0).at(j);
  throw std::runtime_error("column not found: " + column);
}

}  // namespace

TEST_CASE("doubles survive a format/parse round trip byte-exactly") {
  std::vector<double> samples{0.0,
                              -0.0,
                              0.1,
                              1.0 / 3.0,
                              2.612375348685488,
                              -17.25,
                              6.02214076e23,
                              1e-300,
                              5e-324,
                              3.14159265358979323846};
  for (double x : samples) {
    std::string s = cyclelab::io::format_double(x);
    double y = std::strtod(s.c_str(), nullptr);
    CHECK(y == x);
  }
  CHECK(cyclelab::io::format_int(-12345678901234LL) == "-12345678901234");
}

TEST_CASE("csv serialization round trips and enforces row width") {
  Csv t;
  t.header = {"a", "b", "c"};
  t.add_row({"1", "x", "-0.5"});
  t.add_row({"2", "", "0.25"});
  std::string text = t.serialize();
  CHECK(text == "a,b,c\n1,x,-0.5\n2,,0.25\n");
  Csv back = Csv::parse(text);
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK_THROWS(t.add_row({"only", "two"}));
  CHECK_THROWS(Csv::parse(""));
}

TEST_CASE("config files parse strictly") {
  Config cfg = Config::parse(
      "# comment\n"
      "alpha = 1.5\n"
      "\n"
      "name= grid # trailing comment\n"
      "count =42\n");
  CHECK(cfg.get_double("alpha") == 1.5);
  CHECK(cfg.get("name") == "grid");
  CHECK(cfg.get_int("count") == 42);
  CHECK(cfg.get_bool_or("missing", true));
  CHECK(cfg.unused_keys().empty());

  Config partial = Config::parse("used=1\nunused=2\n");
  (void)partial.get_int("used");
  REQUIRE(partial.unused_keys().size() == 1);
  CHECK(partial.unused_keys()[0] == "unused");

  CHECK_THROWS_AS(Config::parse("no equals sign here\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(Config::parse("dup=1\ndup=2\n"), std::invalid_argument);
  Config bad = Config::parse("v=1.5x\nw=zz\n");
  CHECK_THROWS_AS(bad.get_double("v"), std::invalid_argument);
  CHECK_THROWS_AS(bad.get_double("w"), std::invalid_argument);
  CHECK_THROWS_AS(bad.get_int("v"), std::invalid_argument);
}

TEST_CASE("content digests match the reference vectors") {
  CHECK(cyclelab::io::fnv1a("") == 14695981039346656037ull);
  CHECK(cyclelab::io::fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(cyclelab::io::hex_digest("") == "cbf29ce484222325");
  CHECK(cyclelab::io::hex_digest("a").size() == 16);
}

TEST_CASE("atomic writes leave the target and nothing else") {
  fs::path dir = fresh_dir("atomic");
  fs::path target = dir / "data.txt";
  write_text(target, "first");
  write_text(target, "second");
  CHECK(cyclelab::io::read_file(target.string()) == "second");
  int entries = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    ++entries;
    CHECK(e.path().filename() == "data.txt");
  }
  CHECK(entries == 1);
}

TEST_CASE("helium table validates and reruns byte-identically") {
  fs::path a = fresh_dir("helium_a");
  fs::path b = fresh_dir("helium_b");
  auto r1 = run_tool("helium-table --out \"" + a.string() + "\"");
  CHECK(r1.rc == 0);
  CHECK(r1.err.empty());
  auto r2 = run_tool("helium-table --out \"" + b.string() + "\"");
  CHECK(r2.rc == 0);
  for (const char* f : {"helium_table.csv", "helium_table.json",
                        "manifest.json"}) {
    CAPTURE(f);
    CHECK(cyclelab::io::read_file((a / f).string()) ==
          cyclelab::io::read_file((b / f).string()));
  }
  Csv t = Csv::parse(cyclelab::io::read_file((a / "helium_table.csv").string()));
  REQUIRE(t.rows.size() == 6);
  // every row carries |relative deviation| < 1% against its reference
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j] != "rel_deviation") continue;
    for (const auto& row : t.rows)
      CHECK(std::fabs(std::strtod(row[j].c_str(), nullptr)) < 0.01);
  }
}

TEST_CASE("ideal scan reproduces the frozen ladder head") {
  fs::path dir = fresh_dir("scan");
  fs::path cfgp = dir / "scan.cfg";
  write_text(cfgp, "ladder=64,216\n");
  auto r = run_tool("ideal-scan --config \"" + cfgp.string() + "\" --out \"" +
                    dir.string() + "\"");
  CHECK(r.rc == 0);
  Csv t = Csv::parse(cyclelab::io::read_file((dir / "ideal_scan.csv").string()));
  REQUIRE(t.rows.size() == 2);
  double tail64 = std::strtod(first_cell(t, "tail_fraction").c_str(), nullptr);
  CHECK(std::fabs(tail64 - 0.63743455412583949) < 1e-14);
  double n64 = std::strtod(first_cell(t, "n_particles").c_str(), nullptr);
  CHECK(n64 == 64.0);

  // the manifest records the complete effective configuration
  auto manifest = nlohmann::json::parse(
      cyclelab::io::read_file((dir / "manifest.json").string()));
  CHECK(manifest["tool"] == "cyclelab");
  CHECK(manifest["subcommand"] == "ideal-scan");
  auto config = manifest["config"];
  for (const char* key : {"dim", "ladder", "rho_lambda_d", "tail_eps",
                          "head_exponent", "limit_terms"}) {
    CAPTURE(key);
    CHECK(config.contains(key));
  }
  CHECK(config["ladder"] == "64,216");
  bool manifest_lists_csv = false;
  for (const auto& entry : manifest["outputs"])
    if (entry["file"] == "ideal_scan.csv") manifest_lists_csv = true;
  CHECK(manifest_lists_csv);
}

TEST_CASE("unknown config keys are usage errors that name the key") {
  fs::path dir = fresh_dir("badkey");
  fs::path cfgp = dir / "bad.cfg";
  write_text(cfgp, "bogus_key=1\n");
  auto r = run_tool("helium-table --config \"" + cfgp.string() + "\" --out \"" +
                    dir.string() + "\"");
  CHECK(r.rc == 2);
  CHECK(r.err.find("unknown config key 'bogus_key'") != std::string::npos);
}

TEST_CASE("malformed config lines are usage errors") {
  fs::path dir = fresh_dir("badline");
  fs::path cfgp = dir / "broken.cfg";
  write_text(cfgp, "this line has no equals sign\n");
  auto r = run_tool("cycle-dist --config \"" + cfgp.string() + "\" --out \"" +
                    dir.string() + "\"");
  CHECK(r.rc == 2);
  CHECK(r.err.find("usage error") != std::string::npos);
  CHECK(r.err.find("key=value") != std::string::npos);

  fs::path badnum = dir / "badnum.cfg";
  write_text(badnum, "n_particles=12monkeys\n");
  auto r2 = run_tool("cycle-dist --config \"" + badnum.string() +
                     "\" --out \"" + dir.string() + "\"");
  CHECK(r2.rc == 2);
  CHECK(r2.err.find("n_particles") != std::string::npos);

  auto r3 = run_tool("cycle-dist --format pdf --out \"" + dir.string() + "\"");
  CHECK(r3.rc != 0);
}

TEST_CASE("sampler runs repeat under one seed and move under another") {
  fs::path a = fresh_dir("mc_a");
  fs::path b = fresh_dir("mc_b");
  fs::path c = fresh_dir("mc_c");
  fs::path cfgp = scratch_root() / "mc.cfg";
  write_text(cfgp,
             "n_particles=2\nslices=8\nbox=1.0\nlambda=0.9\n"
             "sweeps=2000\nbatches=16\n");
  std::string base = "pimc --config \"" + cfgp.string() + "\" --seed 7 ";
  auto r1 = run_tool(base + "--out \"" + a.string() + "\"");
  REQUIRE(r1.rc == 0);
  auto r2 = run_tool(base + "--out \"" + b.string() + "\"");
  REQUIRE(r2.rc == 0);
  for (const char* f : {"pimc_cycles.csv", "pimc_summary.csv",
                        "worldlines.bin", "manifest.json"}) {
    CAPTURE(f);
    CHECK(cyclelab::io::read_file((a / f).string()) ==
          cyclelab::io::read_file((b / f).string()));
  }
  auto r3 = run_tool("pimc --config \"" + cfgp.string() +
                     "\" --seed 8 --out \"" + c.string() + "\"");
  REQUIRE(r3.rc == 0);
  CHECK(cyclelab::io::read_file((a / "pimc_cycles.csv").string()) !=
        cyclelab::io::read_file((c / "pimc_cycles.csv").string()));

  // probabilities sum to one exactly as written
  Csv t = Csv::parse(cyclelab::io::read_file((a / "pimc_cycles.csv").string()));
  double total = 0.0;
  for (const auto& row : t.rows) total += std::strtod(row[1].c_str(), nullptr);
  CHECK(std::fabs(total - 1.0) < 1e-12);
}

TEST_CASE("csv-only format suppresses the json mirrors") {
  fs::path dir = fresh_dir("csvonly");
  auto r = run_tool("cycle-dist --format csv --out \"" + dir.string() + "\"");
  CHECK(r.rc == 0);
  CHECK(fs::exists(dir / "cycle_dist.csv"));
  CHECK_FALSE(fs::exists(dir / "cycle_dist.json"));
  CHECK(fs::exists(dir / "manifest.json"));

  fs::path jd = fresh_dir("jsononly");
  auto rj = run_tool("cycle-dist --format json --out \"" + jd.string() + "\"");
  CHECK(rj.rc == 0);
  CHECK_FALSE(fs::exists(jd / "cycle_dist.csv"));
  CHECK(fs::exists(jd / "cycle_dist.json"));
}
