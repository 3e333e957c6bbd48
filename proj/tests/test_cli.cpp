#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmvm/artifacts.hpp"
#include "mmvm/cli.hpp"

using namespace mmvm;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  int code = mmvm::cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("mmvm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::string kGeometric = MMVM_PROGRAMS_DIR "/geometric.json";

}  // namespace

TEST(Pixels, Mapping) {
  EXPECT_EQ(pixel_value(0.0), 128);
  EXPECT_EQ(pixel_value(1.0), 255);
  EXPECT_EQ(pixel_value(-1.0), 0);
  EXPECT_EQ(pixel_value(7.0), 255);
  EXPECT_EQ(pixel_value(std::nan("")), 128);
  Frame f{2, 1, {-1.0, 1.0}};
  EXPECT_EQ(encode_pgm(f), std::string("P5\n2 1\n255\n\x00\xff", 13));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(invoke({"validate", kGeometric}).code, 0);
  EXPECT_EQ(invoke({"validate", MMVM_PROGRAMS_DIR "/bad_prefix.json"}).code, 1);
  EXPECT_EQ(invoke({"validate", "/nonexistent.json"}).code, 1);
  EXPECT_EQ(invoke({"bogus"}).code, 1);
  EXPECT_EQ(invoke({"run", kGeometric}).code, 1);
  EXPECT_EQ(invoke({"run", kGeometric, "--steps", "3", "--watch", "nonsense"}).code, 1);
  EXPECT_EQ(invoke({"ca", "--width", "0"}).code, 1);
  EXPECT_EQ(invoke({"ca", "--pattern", "moore", "--steps", "1"}).code, 1);
  EXPECT_EQ(invoke({"ca", "--width", "2", "--height", "2", "--steps", "1", "--frames-dir", "/proc/nope"}).code, 2);
}

TEST(Cli, RunWritesCsv) {
  Result r = invoke({"run", kGeometric, "--steps", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "t,node,value\n0,arg1 id s,0\n1,arg1 id s,1\n2,arg1 id s,1.5\n3,arg1 id s,1.75\n");
}

TEST(Cli, RunIsDeterministic) {
  const std::string prog = MMVM_PROGRAMS_DIR "/controlled_gain.json";
  Result a = invoke({"run", prog, "--steps", "100"});
  Result b = invoke({"run", prog, "--steps", "100"});
  Result c = invoke({"run", prog, "--steps", "100", "--seed", "18"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, CaGoldenFrames) {
  // With p = 1 the shift pattern moves the initial checkerboard one column per
  // tick from the switch on; five ticks later the board is inverted.
  fs::path dir = scratch("golden");
  Result r = invoke({"ca", "--width", "4", "--height", "4", "--p", "1", "--pattern", "shift:1,0", "--init", "checker",
                  "--steps", "10", "--frame-every", "5", "--frames-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::string header = "P5\n4 4\n255\n";
  EXPECT_EQ(slurp(dir / "frame_0.pgm"), header + std::string(16, '\x80'));
  std::string checker;
  std::string inverted;
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      checker.push_back((x + y) % 2 == 0 ? '\xff' : '\x00');
      inverted.push_back((x + y) % 2 == 0 ? '\x00' : '\xff');
    }
  }
  EXPECT_EQ(slurp(dir / "frame_5.pgm"), header + checker);
  EXPECT_EQ(slurp(dir / "frame_10.pgm"), header + inverted);
  std::string stats = slurp(dir / "stats.csv");
  EXPECT_EQ(stats.substr(0, stats.find('\n')), "t,mean_abs,max_abs,rms");
}

TEST(Cli, CaIsDeterministic) {
  fs::path a = scratch("det_a");
  fs::path b = scratch("det_b");
  for (const auto& d : {a, b}) {
    Result r = invoke({"ca", "--width", "8", "--height", "8", "--steps", "30", "--frame-every", "10", "--seed", "5",
                    "--stabilize", "rms=0.25", "--frames-dir", d.string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const char* f : {"frame_10.pgm", "frame_30.pgm", "stats.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Cli, MorphWritesOneCsvPerLambda) {
  fs::path dir = scratch("morph");
  fs::path b = dir / "b.json";
  std::string text = slurp(kGeometric);
  text.replace(text.find("\"const\": 0.5"), 12, "\"const\": 0.25");
  std::ofstream(b) << text;
  Result r = invoke({"morph", kGeometric, b.string(), "--lambda-steps", "2", "--steps", "3", "--out-dir", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "lambda_0.csv"), invoke({"run", kGeometric, "--steps", "3"}).out);
  EXPECT_EQ(slurp(dir / "lambda_2.csv"), invoke({"run", b.string(), "--steps", "3"}).out);
  EXPECT_EQ(slurp(dir / "lambdas.csv"), "index,lambda,file\n0,0,lambda_0.csv\n1,0.5,lambda_1.csv\n2,1,lambda_2.csv\n");
}
