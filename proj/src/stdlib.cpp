#include "mmvm/stdlib.hpp"

#include <string>

namespace mmvm {

namespace {

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t node_key(std::string_view node_name) {
  // FNV-1a, then mixed so that short names spread over all bits.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : node_name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

double keyed_draw(std::uint64_t master_seed, std::uint64_t key, std::int64_t t) {
  std::uint64_t z = mix64(master_seed ^ 0x6a09e667f3bcc909ULL);
  z = mix64(z ^ key);
  z = mix64(z ^ static_cast<std::uint64_t>(t));
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double node_draw(std::uint64_t master_seed, std::string_view node_name, std::int64_t t) {
  return keyed_draw(master_seed, node_key(node_name), t);
}

double eval_operation(const OperationDef& op, std::span<const double> args, const RngContext& rng) {
  if (args.size() != static_cast<std::size_t>(op.arity)) {
    throw ArityError("operation '" + op.name + "' expects " + std::to_string(op.arity) +
                     " arguments, got " + std::to_string(args.size()));
  }
  switch (op.rule) {
    case OpRule::identity:
      return args[0];
    case OpRule::constant:
      return op.param("value");
    case OpRule::propagator:
      return rng.draw() < op.param("p") ? args[0] : 0.0;
    case OpRule::product:
      return args[0] * args[1];
  }
  return 0.0;
}

Signature ca_signature(double p) {
  return Signature({ops::identity("id"), ops::constant("black", -1.0), ops::constant("white", 1.0),
                    ops::propagator("prop", p)},
                   "id");
}

}  // namespace mmvm
