#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "emm/cli.hpp"
#include "emm/io.hpp"
#include "emm/report.hpp"
#include "support.hpp"

using namespace emm;
using namespace emm::test;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run emm_run(std::vector<std::string> args) {
  args.insert(args.begin(), "emm");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Fresh scratch directory per test case, removed afterwards.
class Scratch {
 public:
  Scratch() {
    static int serial = 0;
    dir_ = fs::temp_directory_path() / ("emm_unit_" + std::to_string(::getpid()) + "_" + std::to_string(serial++));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  Scratch(const Scratch&) = delete;
  Scratch& operator=(const Scratch&) = delete;

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    write_text(dir_ / name, text);
    return path(name);
  }
  std::string config(const std::string& name, const json& j) const { return write(name, j.dump(2)); }

 private:
  fs::path dir_;
};

json cube_box(int n, double half) {
  return {{"low", std::vector<double>(static_cast<std::size_t>(n), -half)},
          {"high", std::vector<double>(static_cast<std::size_t>(n), half)}};
}

json analytic(const std::string& name, int n, double half, int nodes) {
  return {{"name", name}, {"box", cube_box(n, half)}, {"nodes_per_axis", nodes}};
}

// Sets an environment variable for the lifetime of the object.
class EnvVar {
 public:
  EnvVar(const char* name, const char* value) : name_(name) {
    if (const char* old = std::getenv(name)) old_ = old;
    ::setenv(name, value, 1);
  }
  ~EnvVar() {
    if (old_)
      ::setenv(name_, old_->c_str(), 1);
    else
      ::unsetenv(name_);
  }

 private:
  const char* name_;
  std::optional<std::string> old_;
};

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    Scratch s;
    const std::string p = s.write("a.txt", "abc");
    CHECK(sha256_file(p) == sha256_hex("abc"));
    CHECK_ERROR_CODE(sha256_file(s.path("missing")), ErrorCode::IoError);
  }

  TEST_CASE("provenance") {
    Scratch s;
    const std::string p = s.write("in.json", "{}");
    Provenance prov;
    prov.command = "scan";
    prov.parameters = {{"rho_scan", 0.2}};
    prov.add_input(p);
    const json j = prov.to_json();
    CHECK(j["tool"] == "emm");
    CHECK(j["version"] == std::string(kVersion));
    CHECK(j["inputs"][p] == sha256_hex("{}"));
    CHECK(prov.input_sha256().size() == 64u);

    Provenance other = prov;
    other.parameters["rho_scan"] = 0.3;
    CHECK(other.input_sha256() != prov.input_sha256());
    const std::string header = prov.csv_header();
    CHECK(header.rfind("# tool: emm ", 0) == 0);
    CHECK(header.find("# input: " + p + " " + sha256_hex("{}")) != std::string::npos);
    CHECK(header.find("timestamp") == std::string::npos);
  }

  TEST_CASE("csv table") {
    CsvTable t({"rho", "scaled_energy"});
    t.add_numbers({0.1, 1.0 / 3.0});
    t.add_row({"x", "y"});
    Provenance prov;
    prov.command = "density";
    const std::string text = t.str(prov);
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line) && line.rfind("#", 0) == 0) {
    }
    CHECK(line == "rho,scaled_energy");
    std::getline(is, line);
    const auto comma = line.find(',');
    CHECK(std::stod(line.substr(comma + 1)) == 1.0 / 3.0);
    std::getline(is, line);
    CHECK(line == "x,y");
  }
}

TEST_SUITE("cli") {
  TEST_CASE("solve writes field, trace and summary") {
    Scratch s;
    const std::string cfg = s.config("solve.json", {{"box", cube_box(2, 1.0)},
                                                    {"nodes_per_axis", 21},
                                                    {"boundary", {{"analytic", "smooth_b"}}}});
    const Run r = emm_run({"solve", "--config", cfg, "--out", s.path("out")});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("solve:") != std::string::npos);
    const json doc = json::parse(read_text(s.path("out/solve.json")));
    CHECK(doc["converged"] == true);
    CHECK(doc["field_sha256"] == sha256_file(s.path("out/field.emmf")));
    CHECK(doc["provenance"]["inputs"].contains(cfg));
    const GridField u = load_emmf(s.path("out/field.emmf"));
    CHECK(u.domain.shape == std::vector<int>{21, 21});
    CHECK(read_text(s.path("out/energy_trace.csv")).find("step,energy\n") != std::string::npos);
  }

  TEST_CASE("solve with constant boundary data is exact") {
    Scratch s;
    const std::string cfg = s.config("solve.json", {{"box", cube_box(3, 1.0)},
                                                    {"nodes_per_axis", 10},
                                                    {"boundary", {{"analytic", "constant"}}}});
    REQUIRE(emm_run({"solve", "--config", cfg, "--out", s.path("out")}).code == 0);
    CHECK(json::parse(read_text(s.path("out/solve.json")))["final_energy"] == 0.0);
  }

  TEST_CASE("outputs are reproducible across runs and thread counts") {
    Scratch s;
    const std::string cfg = s.config("solve.json", {{"box", cube_box(3, 1.0)},
                                                    {"nodes_per_axis", 12},
                                                    {"boundary", {{"analytic", "radial"}}},
                                                    {"seed", 3}});
    REQUIRE(emm_run({"solve", "--config", cfg, "--out", s.path("a"), "--threads", "1"}).code == 0);
    {
      EnvVar env("EMM_THREADS", "2");
      REQUIRE(emm_run({"solve", "--config", cfg, "--out", s.path("b")}).code == 0);
    }
    for (const char* f : {"field.emmf", "energy_trace.csv", "solve.json"})
      CHECK_MESSAGE(read_text(s.path(std::string("a/") + f)) == read_text(s.path(std::string("b/") + f)), f);
  }

  TEST_CASE("configuration errors exit with status 1") {
    Scratch s;
    const Run missing = emm_run({"scan", "--config", s.path("nope.json"), "--out", s.path("o")});
    CHECK(missing.code == 1);
    CHECK_FALSE(missing.err.empty());

    const Run bad = emm_run({"scan", "--config", s.write("bad.json", "{\"analytic\": "), "--out", s.path("o")});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("malformed JSON") != std::string::npos);

    json j = {{"analytic", analytic("radial", 3, 0.975, 20)}, {"rho_scn", 0.2}};
    const Run unknown = emm_run({"scan", "--config", s.config("u.json", j), "--out", s.path("o")});
    CHECK(unknown.code == 1);
    CHECK(unknown.err.find("rho_scn") != std::string::npos);

    CHECK(emm_run({"scan", "--out", s.path("o")}).code == 1);
    CHECK(emm_run({"frobnicate"}).code == 1);

    const Run suite = emm_run({"verify", "bogus", "--out", s.path("o")});
    CHECK(suite.code == 1);
    CHECK(suite.err.find("bogus") != std::string::npos);

    EnvVar env("EMM_THREADS", "zero");
    CHECK(emm_run({"verify", "--check", s.write("x.json", "{}"), "--out", s.path("o")}).code == 1);
  }

  TEST_CASE("global flags may follow the subcommand") {
    Scratch s;
    const std::string cfg = s.config("d.json", {{"cantor", {{"level", 8}}}});
    CHECK(emm_run({"dimension", "--config", cfg, "--out", s.path("o"), "--seed", "4"}).code == 0);
    CHECK(emm_run({"--config", cfg, "--out", s.path("p"), "--seed", "4", "dimension"}).code == 0);
    CHECK(read_text(s.path("o/dimension.json")) == read_text(s.path("p/dimension.json")));
  }

  TEST_CASE("density of analytic maps") {
    Scratch s;
    const std::string rad = s.config(
        "r.json", {{"analytic", analytic("radial", 3, 0.98, 50)}, {"radii", {0.8, 0.4, 0.2}}, {"monotonicity", {{0.2, 0.4}}}});
    REQUIRE(emm_run({"density", "--config", rad, "--out", s.path("r")}).code == 0);
    const json doc = json::parse(read_text(s.path("r/density.json")));
    for (const json& v : doc["scaled_energies"]) CHECK(rel_err(v.get<double>(), 8 * kPi) < 0.03);
    CHECK(doc["defects"].size() == 1u);

    const std::string flat = s.config("c.json", {{"analytic", analytic("constant", 3, 1.0, 20)}});
    REQUIRE(emm_run({"density", "--config", flat, "--out", s.path("c")}).code == 0);
    CHECK(json::parse(read_text(s.path("c/density.json")))["theta"] == 0.0);
  }

  TEST_CASE("scan, tangent and stratify on x/|x|") {
    Scratch s;
    const json src = analytic("radial", 3, 0.975, 40);
    REQUIRE(emm_run({"scan", "--config", s.config("s.json", {{"analytic", src}}), "--out", s.path("o")}).code == 0);
    const json scan = json::parse(read_text(s.path("o/scan.json")));
    CHECK(scan["singular_points"].size() == 1u);

    REQUIRE(emm_run({"tangent", "--config", s.config("t.json", {{"analytic", src}}), "--out", s.path("o")}).code == 0);
    CHECK(fs::exists(s.path("o/tangent.emmf")));
    CHECK(fs::exists(s.path("o/gaps.csv")));

    REQUIRE(emm_run({"stratify", "--config", s.config("st.json", {{"analytic", src}}), "--out", s.path("o")}).code == 0);
    const json st = json::parse(read_text(s.path("o/stratification.json")));
    CHECK(st.dump().find("\"stratum\":0") != std::string::npos);
  }

  TEST_CASE("scan of a planar minimizer finds nothing") {
    Scratch s;
    const std::string solve = s.config("solve.json", {{"box", cube_box(2, 0.975)},
                                                      {"nodes_per_axis", 40},
                                                      {"boundary", {{"analytic", "smooth_a"}}}});
    REQUIRE(emm_run({"solve", "--config", solve, "--out", s.path("o")}).code == 0);
    const std::string scan = s.config("scan.json", {{"field", s.path("o/field.emmf")}});
    REQUIRE(emm_run({"scan", "--config", scan, "--out", s.path("o")}).code == 0);
    CHECK(json::parse(read_text(s.path("o/scan.json")))["singular_points"].empty());
  }

  TEST_CASE("dimension of the cantor set") {
    Scratch s;
    REQUIRE(emm_run({"dimension", "--config", s.config("d.json", {{"cantor", {{"level", 12}}}}), "--out", s.path("o")})
                .code == 0);
    const json doc = json::parse(read_text(s.path("o/dimension.json")));
    CHECK(std::abs(doc["slope"].get<double>() - std::log(2.0) / std::log(3.0)) < 0.02);
    CHECK(doc["degenerate"] == false);
  }

  TEST_CASE("verify re-checks recorded input hashes") {
    Scratch s;
    const std::string cfg = s.config("d.json", {{"cantor", {{"level", 6}}}});
    REQUIRE(emm_run({"dimension", "--config", cfg, "--out", s.path("o")}).code == 0);
    for (const char* artifact : {"o/dimension.json", "o/dimension.csv"}) {
      const Run ok = emm_run({"verify", "--check", s.path(artifact), "--out", s.path("v")});
      CHECK_MESSAGE(ok.code == 0, ok.out, ok.err);
    }
    s.config("d.json", {{"cantor", {{"level", 7}}}});
    CHECK(emm_run({"verify", "--check", s.path("o/dimension.json"), "--out", s.path("v")}).code == 1);
    const json doc = json::parse(read_text(s.path("v/verify.json")));
    CHECK(doc["passed"] == false);
  }

  TEST_CASE("hausdorff suite") {
    const auto rows = run_suite("hausdorff");
    bool cantor = false;
    for (const CheckResult& r : rows) {
      CHECK_MESSAGE(r.pass, r.name);
      cantor = cantor || r.name == "cantor_slope_error";
    }
    CHECK(cantor);
    CHECK_ERROR_CODE(run_suite("bogus"), ErrorCode::UnknownSuite);
  }
}
