#include "fixtures.hpp"

#include <algorithm>
#include <cmath>

namespace mmvm::fixtures {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

bool coin(std::mt19937_64& rng, double p) { return uniform(rng, 0.0, 1.0) < p; }

ElementSource weight_source(std::mt19937_64& rng, double w, bool schedules) {
  if (!schedules || coin(rng, 0.6)) return constant_source(w);
  Schedule s;
  s.mode = coin(rng, 0.5) ? Schedule::Mode::step : Schedule::Mode::linear;
  std::int64_t t = static_cast<std::int64_t>(pick(rng, 5));
  const int points = 2 + static_cast<int>(pick(rng, 3));
  for (int k = 0; k < points; ++k) {
    s.points.emplace_back(t, w * uniform(rng, -1.0, 1.0));
    t += 1 + static_cast<std::int64_t>(pick(rng, 15));
  }
  return external_source(std::move(s));
}

}  // namespace

Signature unit_signature() { return Signature({ops::identity("id"), ops::constant("one", 1.0)}, "id"); }

Program geometric_program() {
  Program p;
  p.signature = unit_signature();
  p.matrix.set("arg1 id s", "one u", constant_source(1.0));
  p.matrix.set("arg1 id s", "id s", constant_source(0.5));
  return p;
}

Program random_program(std::mt19937_64& rng, const RandomProgramOptions& opt) {
  std::vector<OperationDef> ops{ops::identity("id"), ops::constant("white", 1.0), ops::constant("black", -1.0),
                                ops::product("mul")};
  if (opt.stochastic) ops.push_back(ops::propagator("prop", uniform(rng, 0.3, 0.9)));
  Program prog;
  prog.signature = Signature(ops, "id");
  prog.seed = rng();

  // Leave room for one controller (an id output and its port).
  const std::size_t budget = opt.max_nodes - (opt.controllers ? 2 : 0);
  std::vector<std::string> outputs;
  std::vector<std::string> inputs;
  std::size_t nodes = 0;
  const std::size_t wanted = 2 + pick(rng, 7);
  for (std::size_t i = 0; i < wanted; ++i) {
    const OperationDef& op = ops[pick(rng, ops.size())];
    if (nodes + 1 + static_cast<std::size_t>(op.arity) > budget) break;
    std::string out = op.name + " n" + std::to_string(i);
    outputs.push_back(out);
    for (int k = 1; k <= op.arity; ++k) inputs.push_back("arg" + std::to_string(k) + " " + out);
    nodes += 1 + static_cast<std::size_t>(op.arity);
  }
  if (inputs.empty()) {
    outputs.push_back("id n_last");
    inputs.push_back("arg1 id n_last");
  }

  for (const auto& y : inputs) {
    if (coin(rng, 0.15)) {
      prog.matrix.set(y, outputs[pick(rng, outputs.size())], node_source(outputs[pick(rng, outputs.size())]));
      continue;
    }
    const std::size_t m = pick(rng, 4);
    std::vector<std::string> rows = outputs;
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(std::min(m, rows.size()));
    std::vector<double> w;
    double total = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      w.push_back(uniform(rng, -1.0, 1.0));
      total += std::abs(w.back());
    }
    const double scale = uniform(rng, 0.5, 1.0) / std::max(1.0, total);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      prog.matrix.set(y, rows[k], weight_source(rng, w[k] * scale, opt.schedules));
    }
  }

  if (opt.controllers) {
    std::vector<std::pair<std::string, std::string>> candidates;
    prog.matrix.for_each([&](const std::string& c, const std::string& r, const ElementSource& s) {
      if (!std::holds_alternative<NodeSource>(s)) candidates.emplace_back(c, r);
    });
    if (!candidates.empty()) {
      auto [c, r] = candidates[pick(rng, candidates.size())];
      const ElementSource& old = *prog.matrix.find(c, r);
      double bound = std::holds_alternative<ConstantSource>(old) ? std::abs(std::get<ConstantSource>(old).value)
                                                                  : std::get<ExternalSource>(old).schedule.max_abs();
      ElementName e{c, r};
      std::string controller = "id " + e.raw();
      std::string controller_in = "arg1 " + controller;
      prog.matrix.set(c, r, node_source(controller));
      // The controller's own column keeps |a_cr| within the replaced weight.
      std::vector<std::string> rows = outputs;
      rows.push_back(controller);
      std::shuffle(rows.begin(), rows.end(), rng);
      rows.resize(1 + pick(rng, 2));
      for (const auto& row : rows) {
        prog.matrix.set(controller_in, row,
                        weight_source(rng, uniform(rng, -1.0, 1.0) * bound / static_cast<double>(rows.size()),
                                      opt.schedules));
      }
    }
  }

  if (opt.shared_groups && inputs.size() >= 2 && coin(rng, 0.3)) {
    const std::string& a = inputs[pick(rng, inputs.size())];
    const std::string& b = inputs[pick(rng, inputs.size())];
    const auto* col = prog.matrix.column(a);
    bool plain = a != b && col != nullptr;
    if (plain) {
      for (const auto& [_, s] : *col) {
        if (std::holds_alternative<NodeSource>(s)) plain = false;
      }
    }
    if (plain) {
      auto copy = *col;
      if (const auto* existing = prog.matrix.column(b)) {
        auto rows = *existing;
        for (const auto& [row, _] : rows) prog.matrix.erase(b, row);
      }
      for (const auto& [row, s] : copy) prog.matrix.set(b, row, s);
      prog.shared_input_groups.push_back({a, b});
    }
  }
  return prog;
}

std::vector<std::string> all_nodes(const Program& program) {
  auto u = activation_universe(program);
  return {u.begin(), u.end()};
}

Signature naming_signature() {
  return Signature({ops::identity("id"), ops::propagator("prop", 0.5), ops::constant("white", 1.0),
                    ops::constant("black", -1.0), ops::product("mul"), ops::identity("a b")},
                   "id");
}

namespace {

std::string random_w(std::mt19937_64& rng) {
  static const std::string alphabet = [] {
    std::string a;
    for (char c = 0x20; c <= 0x7e; ++c) {
      if (in_alphabet(c)) a.push_back(c);
    }
    return a;
  }();
  std::string w;
  const std::size_t len = pick(rng, 9);
  for (std::size_t i = 0; i < len; ++i) w.push_back(alphabet[pick(rng, alphabet.size())]);
  return w;
}

}  // namespace

std::string random_output_name(std::mt19937_64& rng, const Signature& sig, int depth) {
  const auto& ops = sig.operations();
  const OperationDef& op = ops[pick(rng, ops.size())];
  if (depth <= 0 || coin(rng, 0.4)) return op.name + " " + random_w(rng);
  std::string column = random_input_name(rng, sig, depth - 1);
  std::string row = random_output_name(rng, sig, depth - 1);
  return op.name + " (" + column + ")#(" + row + ")";
}

std::string random_input_name(std::mt19937_64& rng, const Signature& sig, int depth) {
  std::vector<const OperationDef*> with_ports;
  for (const auto& op : sig.operations()) {
    if (op.arity > 0) with_ports.push_back(&op);
  }
  const OperationDef& op = *with_ports[pick(rng, with_ports.size())];
  std::string owner;
  // Draw an output of this specific operation.
  do {
    owner = random_output_name(rng, sig, depth);
  } while (!owner.starts_with(op.name + " "));
  const int k = 1 + static_cast<int>(pick(rng, static_cast<std::size_t>(op.arity)));
  return "arg" + std::to_string(k) + " " + owner;
}

int top_level_parses(const std::string& s, const Signature& sig) {
  int n = 0;
  for (const auto& op : sig.operations()) {
    if (s.starts_with(op.name + " ")) ++n;
  }
  if (s.starts_with("arg")) {
    std::size_t i = 3;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 3 && i < s.size() && s[i] == ' ') ++n;
  }
  return n;
}

}  // namespace mmvm::fixtures
