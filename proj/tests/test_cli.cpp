#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "mmnet/dataset.hpp"
#include "mmnet/detector.hpp"
#include "mmnet/image_io.hpp"
#include "mmnet/sidecar.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace mmnet;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MMNET_CLI_PATH) + " " + args + " > cli_tmp/stdout.txt 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("cli end to end") {
  fs::remove_all("cli_tmp");
  fs::create_directories("cli_tmp");

  SUBCASE("help exits zero and lists subcommands") {
    CHECK(run_cli("--help") == 0);
    const std::string out = slurp("cli_tmp/stdout.txt");
    for (const char* sub : {"gen", "encode", "train", "infer", "eval", "bench", "ablate",
                            "viz-motion", "viz-memory"})
      CHECK(out.find(sub) != std::string::npos);
  }

  SUBCASE("subcommand help lists flags with defaults") {
    CHECK(run_cli("gen --help") == 0);
    const std::string out = slurp("cli_tmp/stdout.txt");
    for (const char* flag : {"--seed", "--clips", "--frames", "--height", "--width", "--objects",
                             "--speed-min", "--speed-max", "--size-min", "--size-max", "--noise"})
      CHECK(out.find(flag) != std::string::npos);
    CHECK(out.find("[7]") != std::string::npos);  // default for --seed
  }

  SUBCASE("unknown flags are rejected with exit code 1") {
    CHECK(run_cli("gen --out cli_tmp/x --definitely-not-a-flag 3") == 1);
  }

  SUBCASE("missing input file maps to exit code 2") {
    Model m = make_model({}, 3);
    save_model("cli_tmp/m.bin", m);
    CHECK(run_cli("infer cli_tmp/nope.mmgp --ckpt cli_tmp/m.bin --out cli_tmp/d.txt") == 2);
  }

  SUBCASE("gen then encode round-trips losslessly and infer is deterministic") {
    REQUIRE(run_cli("gen --seed 7 --clips 2 --frames 6 --height 48 --width 48 --objects 1 "
                    "--size-min 16 --size-max 22 --out cli_tmp/data") == 0);
    REQUIRE(fs::exists("cli_tmp/data/clip000/frame_0000.ppm"));
    REQUIRE(fs::exists("cli_tmp/data/clip001.truth.txt"));

    REQUIRE(run_cli("encode cli_tmp/data --gop 3 --range 4") == 0);
    REQUIRE(fs::exists("cli_tmp/data/clip000.mmgp"));

    // Decoded frames reproduce the PPM inputs exactly.
    auto gops = load_gops("cli_tmp/data/clip000.mmgp");
    int fi = 0;
    char buf[64];
    for (const Gop& gop : gops) {
      for (const RawFrame& frame : decode_reconstruct(gop)) {
        std::snprintf(buf, sizeof(buf), "cli_tmp/data/clip000/frame_%04d.ppm", fi);
        RawFrame want = read_ppm(buf);
        CHECK(oracle::max_abs_diff(frame, want) == 0.0);
        ++fi;
      }
    }
    CHECK(fi == 6);

    // Truth file loads and covers every frame.
    auto truth = load_truth("cli_tmp/data/clip000.truth.txt");
    CHECK(truth.size() == 6);

    Model m = make_model({}, 3);
    save_model("cli_tmp/m.bin", m);
    REQUIRE(run_cli("infer cli_tmp/data/clip000.mmgp --ckpt cli_tmp/m.bin --out cli_tmp/det1.txt "
                    "--score 0.05") == 0);
    REQUIRE(run_cli("infer cli_tmp/data/clip000.mmgp --ckpt cli_tmp/m.bin --out cli_tmp/det2.txt "
                    "--score 0.05") == 0);
    CHECK(slurp("cli_tmp/det1.txt") == slurp("cli_tmp/det2.txt"));

    REQUIRE(run_cli("viz-motion cli_tmp/data/clip000.mmgp --gop 0 --frame 1 --out cli_tmp/mv.ppm") ==
            0);
    RawFrame mv = read_ppm("cli_tmp/mv.ppm");
    CHECK(mv.h() == 3);
    CHECK(mv.w() == 3);

    REQUIRE(run_cli("viz-memory cli_tmp/data/clip000.mmgp --ckpt cli_tmp/m.bin --gop 0 "
                    "--out-dir cli_tmp/mem") == 0);
    CHECK(fs::exists("cli_tmp/mem/memory_0000.pgm"));
    CHECK(fs::exists("cli_tmp/mem/memory_0002.pgm"));

    // Ablation CSV carries one row per requested config under the shared
    // schema (epochs 0: evaluation only).
    REQUIRE(run_cli("ablate --data cli_tmp/data --eval-data cli_tmp/data --ckpt cli_tmp/m.bin "
                    "--out cli_tmp/ab.csv --configs a,c,e,f --epochs 0 --reps 0") == 0);
    std::ifstream csv("cli_tmp/ab.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line == "config,map,map_fast,map_medium,map_slow,fps_full,fps_prop,ratio");
    int rows = 0;
    std::string first;
    while (std::getline(csv, line)) {
      if (line.empty()) continue;
      if (rows == 0) first = line;
      ++rows;
    }
    CHECK(rows == 4);
    CHECK(first.substr(0, 2) == "a,");
  }
}
