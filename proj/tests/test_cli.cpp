#include <catch_amalgamated.hpp>

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using Catch::Matchers::WithinAbs;

namespace {

const fs::path& scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / ("wplab_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Runs the CLI with stdout and stderr captured into <out>.log; returns the exit status.
int run(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const fs::path log = scratch() / ("run" + std::to_string(counter++) + ".log");
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + WPLAB_EXE + "' " + args + " > '" + log.string() + "' 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

fs::path write_config(const std::string& name, const json& j) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

std::string out_arg(const fs::path& dir) { return "--out '" + dir.string() + "'"; }

const json kSmall = {{"basis_size", 50},
                     {"wigner_grid", {{"x", {{"lo", -4}, {"hi", 6}, {"count", 41}}}, {"p", {{"lo", -5}, {"hi", 5}, {"count", 41}}}}},
                     {"profile", {{"x", {{"lo", -3}, {"hi", 5}, {"samples", 401}}}, {"p", {{"lo", -4}, {"hi", 4}, {"samples", 401}}}}},
                     {"density", {{"lo", -4}, {"hi", 6}, {"samples", 101}}}};

}  // namespace

TEST_CASE("solve: harmonic spectrum and file layout") {
  const fs::path out = scratch() / "solve_harmonic";
  REQUIRE(run("solve --potential 0,0,0.5 --states 0,1,2 --basis 12 " + out_arg(out)) == 0);
  const auto rows = csv_rows(out / "eigenvalues.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"s", "energy"});
  for (int s = 0; s < 3; ++s) CHECK_THAT(std::stod(rows[static_cast<std::size_t>(s) + 1][1]), WithinAbs(s + 0.5, 1e-8));
  CHECK(csv_rows(out / "coefficients.csv")[0] == std::vector<std::string>{"s", "k", "c"});
  CHECK(csv_rows(out / "density_s1.csv")[0] == std::vector<std::string>{"x", "density"});
  CHECK(fs::exists(out / "solve.json"));
  CHECK(fs::exists(out / "density.svg"));
  CHECK(fs::exists(out / "config.json"));
  CHECK_FALSE(fs::exists(out / ".wplab.lock"));
}

TEST_CASE("solve: default cubic well, single state, format filter") {
  const fs::path all = scratch() / "solve_cubic";
  REQUIRE(run("solve " + out_arg(all)) == 0);
  const auto rows = csv_rows(all / "eigenvalues.csv");
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 2; i < rows.size(); ++i) CHECK(std::stod(rows[i][1]) > std::stod(rows[i - 1][1]));

  const fs::path one = scratch() / "solve_one";
  REQUIRE(run("solve --states 0 --format csv " + out_arg(one)) == 0);
  CHECK(fs::exists(one / "density_s0.csv"));
  CHECK_FALSE(fs::exists(one / "density_s1.csv"));
  CHECK_FALSE(fs::exists(one / "solve.json"));
  CHECK_FALSE(fs::exists(one / "density.svg"));
  CHECK(fs::exists(one / "config.json"));
}

TEST_CASE("configuration errors exit with status 2") {
  const fs::path out = scratch() / "bad";
  CHECK(run("solve --frame 1,0,1 " + out_arg(out)) == 2);
  CHECK(run("solve --format xml " + out_arg(out)) == 2);
  CHECK(run("solve --states 0,0 " + out_arg(out)) == 2);
  CHECK(run("solve --states 1.5 " + out_arg(out)) == 2);
  CHECK(run("solve --config '" + (scratch() / "missing.json").string() + "' " + out_arg(out)) == 2);
  CHECK(run("solve --config '" + write_config("typo.json", {{"basis", 20}}).string() + "' " + out_arg(out)) == 2);
  CHECK(run("--states 0 " + out_arg(out)) == 2);
  CHECK(run("verify --max-nk 30 " + out_arg(out)) == 2);
}

TEST_CASE("config.json round-trips and flags override the file") {
  const fs::path first = scratch() / "rt_first";
  const auto cfg = write_config("rt.json", kSmall);
  REQUIRE(run("solve --config '" + cfg.string() + "' --states 1,2 " + out_arg(first)) == 0);
  const json saved = json::parse(slurp(first / "config.json"));
  CHECK(saved["basis_size"] == 50);
  CHECK(saved["states"] == json::array({1, 2}));
  const fs::path second = scratch() / "rt_second";
  REQUIRE(run("solve --config '" + (first / "config.json").string() + "' " + out_arg(second)) == 0);
  CHECK(slurp(first / "eigenvalues.csv") == slurp(second / "eigenvalues.csv"));
  CHECK(slurp(first / "coefficients.csv") == slurp(second / "coefficients.csv"));
}

TEST_CASE("a held lock refuses the run") {
  const fs::path out = scratch() / "locked";
  fs::create_directories(out);
  std::ofstream(out / ".wplab.lock") << "held";
  CHECK(run("solve --states 0 " + out_arg(out)) == 2);
  CHECK_FALSE(fs::exists(out / "eigenvalues.csv"));
  fs::remove(out / ".wplab.lock");
  CHECK(run("solve --states 0 " + out_arg(out)) == 0);
}

TEST_CASE("wigner-grid: layout, harmonic negativity, thread independence") {
  const auto cfg = write_config("grid.json", kSmall);
  const fs::path a = scratch() / "grid_a";
  const fs::path b = scratch() / "grid_b";
  REQUIRE(run("wigner-grid --config '" + cfg.string() + "' --states 0,2 --potential 0,0,0.5 " + out_arg(a),
              "WPLAB_THREADS=1") == 0);
  REQUIRE(run("wigner-grid --config '" + cfg.string() + "' --states 0,2 --potential 0,0,0.5 " + out_arg(b),
              "WPLAB_THREADS=4") == 0);
  const auto rows = csv_rows(a / "wigner_s0.csv");
  CHECK(rows[0] == std::vector<std::string>{"x", "p", "W"});
  CHECK(rows.size() == 41 * 41 + 1);
  CHECK(slurp(a / "wigner_s2.csv") == slurp(b / "wigner_s2.csv"));
  const json neg0 = json::parse(slurp(a / "negativity_s0.json"));
  CHECK(neg0["x_slice"].empty());
  CHECK(neg0["p_slice"].empty());
  const json neg2 = json::parse(slurp(a / "negativity_s2.json"));
  CHECK(neg2["x_slice"].size() == 2);
  CHECK(neg2["p_slice"].size() == 2);
  CHECK(fs::exists(a / "wigner_s2.svg"));
}

TEST_CASE("energy-profile: harmonic s = 2 profile is symmetric") {
  json j = kSmall;
  j["profile"]["x"] = {{"lo", -4}, {"hi", 4}, {"samples", 401}};
  const auto cfg = write_config("prof.json", j);
  const fs::path out = scratch() / "profile";
  REQUIRE(run("energy-profile --config '" + cfg.string() + "' --states 2 --potential 0,0,0.5 " + out_arg(out)) == 0);
  const auto rows = csv_rows(out / "profile_x_s2.csv");
  REQUIRE(rows.size() == 402);
  CHECK(rows[0] == std::vector<std::string>{"coord", "energy", "denominator", "is_gap"});
  for (std::size_t i = 1; i <= 200; ++i) {
    const auto& l = rows[i];
    const auto& r = rows[402 - i];
    if (l[3] == "1" || r[3] == "1") continue;
    CHECK_THAT(std::stod(l[1]), WithinAbs(std::stod(r[1]), 1e-9 * std::abs(std::stod(r[1]))));
  }
  const json prof = json::parse(slurp(out / "profile_x_s2.json"));
  REQUIRE(prof["poles"].size() == 2);
  CHECK_THAT(prof["poles"][0].get<double>(), WithinAbs(-prof["poles"][1].get<double>(), 1e-9));
  CHECK(fs::exists(out / "profile_p_s2.svg"));
}

TEST_CASE("poles and report on the cubic well") {
  const auto cfg = write_config("rep.json", kSmall);
  const fs::path out = scratch() / "report";
  REQUIRE(run("report --config '" + cfg.string() + "' " + out_arg(out)) == 0);
  const json rep = json::parse(slurp(out / "report.json"));
  REQUIRE(rep["states"].size() == 4);
  for (int s = 0; s < 4; ++s) CHECK(rep["states"][s]["x"]["poles"] == s);
  const json s3 = json::parse(slurp(out / "report_s3.json"));
  CHECK(s3["x"]["bijection"] == true);
  CHECK(s3["x"]["matching"].size() == 3);
  CHECK(fs::exists(out / "report_s3.svg"));

  const fs::path poles = scratch() / "poles";
  REQUIRE(run("poles --config '" + cfg.string() + "' --states 2 " + out_arg(poles)) == 0);
  CHECK(json::parse(slurp(poles / "poles.json"))["states"][0]["x"]["poles"].size() == 2);
}

TEST_CASE("report with no states is empty and succeeds") {
  const fs::path out = scratch() / "empty";
  REQUIRE(run("report --states '' " + out_arg(out)) == 0);
  CHECK(json::parse(slurp(out / "report.json"))["states"].empty());
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(out)) {
    (void)e;
    ++files;
  }
  CHECK(files == 2);
}

TEST_CASE("identical configurations give byte-identical outputs") {
  const auto cfg = write_config("det.json", kSmall);
  const fs::path a = scratch() / "det_a";
  const fs::path b = scratch() / "det_b";
  REQUIRE(run("energy-profile --config '" + cfg.string() + "' --states 1,3 " + out_arg(a), "WPLAB_THREADS=1") == 0);
  REQUIRE(run("energy-profile --config '" + cfg.string() + "' --states 1,3 " + out_arg(b), "WPLAB_THREADS=3") == 0);
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto name = e.path().filename();
    if (name == "config.json") continue;  // records the output directory
    CHECK(slurp(e.path()) == slurp(b / name));
    ++compared;
  }
  CHECK(compared == 12);
}

TEST_CASE("verify: pass, bounded pass, and injected fault") {
  const fs::path ok = scratch() / "verify_ok";
  REQUIRE(run("verify --max-nk 6 --states 0,1 --basis 30 " + out_arg(ok)) == 0);
  const json v = json::parse(slurp(ok / "verify.json"));
  CHECK(v["pass"] == true);
  CHECK(v["suites"].size() == 5);
  const fs::path bad = scratch() / "verify_bad";
  CHECK(run("verify --max-nk 4 --states 0 --basis 30 --perturb-g 1e-3 " + out_arg(bad)) == 1);
  const json f = json::parse(slurp(bad / "verify.json"));
  CHECK(f["pass"] == false);
  CHECK(f["suites"][0]["suite"] == "gtable");
  CHECK(f["suites"][0]["pass"] == false);
}
