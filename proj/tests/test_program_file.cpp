#include <gtest/gtest.h>

#include <random>

#include "mmvm/program_file.hpp"
#include "support/fixtures.hpp"

using namespace mmvm;

TEST(ProgramFile, LoadsSamples) {
  ProgramFile f = load_program_file(MMVM_PROGRAMS_DIR "/geometric.json");
  EXPECT_EQ(f.program, fixtures::geometric_program());
  EXPECT_EQ(f.watch, std::vector<std::string>{"arg1 id s"});
  EXPECT_FALSE(f.has_seed);

  ProgramFile g = load_program_file(MMVM_PROGRAMS_DIR "/controlled_gain.json");
  EXPECT_TRUE(g.has_seed);
  EXPECT_EQ(g.program.seed, 17u);
  EXPECT_EQ(g.program.policy, Policy::substochastic);
}

TEST(ProgramFile, RoundTripsRandomPrograms) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    ProgramFile f{fixtures::random_program(rng, {.stochastic = i % 2 == 0}), {}, true};
    std::string text = serialize_program_file(f);
    ProgramFile back = parse_program_file(text);
    EXPECT_EQ(back, f);
    EXPECT_EQ(serialize_program_file(back), text);
  }
}

TEST(ProgramFile, Errors) {
  EXPECT_THROW(parse_program_file("{"), ProgramFileError);
  EXPECT_THROW(parse_program_file("[]"), ProgramFileError);
  EXPECT_THROW(parse_program_file(R"({"elements": []})"), ProgramFileError);
  const std::string sig = R"("signature": [{"name": "id", "arity": 1, "kind": "deterministic"}])";
  EXPECT_NO_THROW(parse_program_file("{" + sig + R"(, "elements": []})"));
  EXPECT_THROW(parse_program_file("{" + sig + R"(, "elements": [{"column": "arg1 id a", "row": "id a", "source": {"const": "x"}}]})"),
               ProgramFileError);
  EXPECT_THROW(parse_program_file("{" + sig + R"(, "elements": [
      {"column": "arg1 id a", "row": "id a", "source": {"const": 1}},
      {"column": "arg1 id a", "row": "id a", "source": {"const": 2}}]})"),
               ProgramFileError);
  EXPECT_THROW(parse_program_file("{" + sig + R"(, "elements": [{"column": "id a", "row": "id a", "source": {"const": 1}}]})"),
               std::exception);
  EXPECT_THROW(parse_program_file("{" + sig + R"(, "elements": [], "policy": "loose"})"), ProgramFileError);
  EXPECT_THROW(parse_program_file("{" + sig + R"(, "elements": [], "seed": -1})"), ProgramFileError);
  EXPECT_THROW(load_program_file(MMVM_PROGRAMS_DIR "/bad_prefix.json"), ProgramError);
  EXPECT_THROW(load_program_file("/nonexistent/program.json"), ProgramFileError);
}
