#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>

#include "mmvm/signature.hpp"

namespace mmvm {

/// Stable 64-bit key of a node name; the per-node half of a random draw.
std::uint64_t node_key(std::string_view node_name);

/// Uniform draw in [0, 1) that depends only on (seed, node key, t).
double keyed_draw(std::uint64_t master_seed, std::uint64_t key, std::int64_t t);

/// Uniform draw in [0, 1) that depends only on (seed, node name, t).
double node_draw(std::uint64_t master_seed, std::string_view node_name, std::int64_t t);

struct RngContext {
  std::uint64_t master_seed = 0;
  std::uint64_t key = 0;
  std::int64_t t = 0;

  static RngContext for_node(std::uint64_t seed, std::string_view node_name, std::int64_t t) {
    return {seed, node_key(node_name), t};
  }
  double draw() const { return keyed_draw(master_seed, key, t); }
};

class ArityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Applies the operation's rule to its arguments. Only the propagator
/// consumes a draw.
double eval_operation(const OperationDef& op, std::span<const double> args, const RngContext& rng);

/// The signature used by the cellular-automaton experiments:
/// id/1, black/0 = -1, white/0 = +1, prop(p)/1.
Signature ca_signature(double p);

}  // namespace mmvm
