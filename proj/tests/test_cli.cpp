#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

Result sh(const std::string& cmd) {
  Result r{0, {}};
  FILE* p = popen((cmd + " 2>&1").c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string cli() { return BASINLAB_CLI; }
std::string configs() { return BASINLAB_CONFIGS; }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("basinlab_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const auto path = dir / "run.ini";
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("presets lists every preset with its parameters") {
  const auto r = sh(cli() + " presets");
  CHECK(r.code == 0);
  for (const char* n : {"kan", "thm2_walk", "thm3_flowtime", "thm4_multi", "thm5_ifs", "thick41", "thick42_walk",
                        "thick431_alt", "thick432_product", "flow_example7", "flow_thm8"}) {
    CHECK(r.out.find(n) != std::string::npos);
  }
  CHECK(r.out.find("c0 = 0.1") != std::string::npos);
}

TEST_CASE("validate distinguishes success, construction failure and bad input") {
  CHECK(sh(cli() + " validate " + configs() + "/kan_basin.ini").code == 0);
  const auto bad = sh(cli() + " validate " + configs() + "/thick41_bad.ini");
  CHECK(bad.code == 2);
  CHECK(bad.out.find("f0'(0) f1'(0) > 1") != std::string::npos);
  const auto dir = scratch("validate");
  const auto cfg = write_config(dir, "[run]\npreset = kan\nseed = x\n");
  CHECK(sh(cli() + " validate " + cfg.string()).code == 1);
  CHECK(sh(cli() + " validate /nonexistent.ini").code == 1);
  CHECK(sh(cli() + " frobnicate").code == 1);
}

TEST_CASE("a Kan basin run writes one CSV, one PGM and a manifest") {
  const auto out = scratch("kan");
  const auto r = sh(cli() + " run " + configs() + "/kan_small.ini --out " + out.string());
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "basin.csv"));
  CHECK(fs::exists(out / "basin.pgm"));
  CHECK(fs::exists(out / "manifest.json"));
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["config"]["preset"] == "kan");
  CHECK(manifest["version"].is_string());
  CHECK(manifest["wall_seconds"].is_number());
  int data_files = 0;
  for (const auto& f : manifest["files"]) data_files += f["name"] == "basin.csv" || f["name"] == "basin.pgm";
  CHECK(data_files == 2);
  const auto csv = slurp(out / "basin.csv");
  CHECK(csv.rfind("# preset=kan seed=7", 0) == 0);
  CHECK(slurp(out / "basin.pgm").rfind("P2\n", 0) == 0);
}

TEST_CASE("--seed overrides the config and is echoed") {
  const auto out = scratch("seed");
  CHECK(sh(cli() + " run " + configs() + "/kan_small.ini --seed 99 --out " + out.string()).code == 0);
  CHECK(slurp(out / "basin.csv").rfind("# preset=kan seed=99", 0) == 0);
}

TEST_CASE("runs are byte-identical across repeats and worker counts") {
  const auto a = scratch("rep_a"), b = scratch("rep_b"), c = scratch("rep_c");
  const auto cfg = configs() + "/kan_small.ini";
  REQUIRE(sh("BASINLAB_THREADS=1 " + cli() + " run " + cfg + " --out " + a.string()).code == 0);
  REQUIRE(sh("BASINLAB_THREADS=1 " + cli() + " run " + cfg + " --out " + b.string()).code == 0);
  REQUIRE(sh("BASINLAB_THREADS=2 " + cli() + " run " + cfg + " --out " + c.string()).code == 0);
  for (const char* f : {"basin.csv", "basin.pgm", "run.log"}) {
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / f) == slurp(c / f));
  }
  const auto ma = nlohmann::json::parse(slurp(a / "manifest.json"));
  const auto mc = nlohmann::json::parse(slurp(c / "manifest.json"));
  CHECK(ma["files"] == mc["files"]);
}

TEST_CASE("the thm2 walk CSV carries Monte Carlo and linear-solve columns") {
  const auto dir = scratch("walk");
  const auto cfg = write_config(dir, "[run]\npreset = thm2_walk\nanalysis = walk\nsamples = 400\noutput = " +
                                         (dir / "out").string() + "\n[analysis]\nstarts = 0.25\n");
  CHECK(sh(cli() + " run " + cfg.string()).code == 0);
  const auto csv = slurp(dir / "out" / "walk.csv");
  CHECK(csv.find("mc_basin_frequency") != std::string::npos);
  CHECK(csv.find("mc_orbit_frequency") != std::string::npos);
  CHECK(csv.find("solve_probability") != std::string::npos);
}

TEST_CASE("an undecided grid exits as inconclusive") {
  const auto dir = scratch("inconclusive");
  const auto cfg = write_config(dir, "[run]\npreset = kan\nsamples = 50\nhorizon = 100\noutput = " +
                                         (dir / "out").string() + "\n[grid]\naxis0 = x 0.4 0.6 2\n");
  const auto r = sh(cli() + " run " + cfg.string());
  CHECK(r.code == 3);
  CHECK(r.out.find("inconclusive") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("construction failure at run time exits with the construction code") {
  CHECK(sh(cli() + " run " + configs() + "/thick41_bad.ini --out " + scratch("bad").string()).code == 2);
}

TEST_CASE("every shipped config validates") {
  for (const auto& e : fs::directory_iterator(configs())) {
    if (e.path().extension() != ".ini" || e.path().filename() == "thick41_bad.ini") continue;
    CAPTURE(e.path().string());
    CHECK(sh(cli() + " validate " + e.path().string()).code == 0);
  }
}
