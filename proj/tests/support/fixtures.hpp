#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mmvm/program.hpp"

namespace mmvm::fixtures {

/// Signature {id/1, one/0 = 1}.
Signature unit_signature();

/// Y("arg1 id s") follows y(t+1) = 1 + 0.5 y(t): 0, 1, 1.5, 1.75, ... -> 2.
Program geometric_program();

struct RandomProgramOptions {
  bool stochastic = false;
  std::size_t max_nodes = 20;
  bool controllers = true;
  bool schedules = true;
  bool shared_groups = true;
};

/// Random program whose streams stay in [-1, 1]: every column has total
/// absolute weight at most 1 and every operation maps [-1, 1] into itself.
Program random_program(std::mt19937_64& rng, const RandomProgramOptions& options = {});

/// All nodes the program can activate, for watching everything.
std::vector<std::string> all_nodes(const Program& program);

/// Signature used by the name property tests; includes an operation name
/// containing a space.
Signature naming_signature();

/// Random valid names over naming_signature(), nesting element names up to
/// `depth` levels.
std::string random_output_name(std::mt19937_64& rng, const Signature& sig, int depth);
std::string random_input_name(std::mt19937_64& rng, const Signature& sig, int depth);

/// Number of ways the top level of `s` can be split into a name form.
int top_level_parses(const std::string& s, const Signature& sig);

}  // namespace mmvm::fixtures
