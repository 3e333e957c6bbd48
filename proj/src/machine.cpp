#include "mmvm/machine.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <unordered_map>

#include "mmvm/stdlib.hpp"

namespace mmvm {

namespace detail {

struct NodeInfo {
  bool output = false;
  const OperationDef* op = nullptr;  // outputs
  std::vector<NodeId> ports;         // outputs: arg1..argA
  NodeId owner = 0;                  // inputs
  std::int32_t column = -1;          // inputs: physical column feeding this node
  std::uint64_t key = 0;
};

struct Entry {
  enum class Kind : std::uint8_t { constant, external, node };
  NodeId row = 0;
  Kind kind = Kind::constant;
  double constant = 0.0;
  const Schedule* schedule = nullptr;
  NodeId source = 0;
};

struct Column {
  NodeId y = 0;  // representative input
  std::vector<NodeId> readers;
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
};

struct Layout {
  Program program;
  std::vector<std::string> names;
  std::unordered_map<std::string, NodeId> index;
  std::vector<NodeInfo> nodes;
  std::vector<Entry> entries;
  std::vector<Column> columns;
  std::vector<NodeId> source_nodes;

  explicit Layout(const Program& p) : program(p) {
    validate_program(program);
    const Signature& sig = program.signature;

    std::set<std::string> universe = activation_universe(program);
    names.assign(universe.begin(), universe.end());
    nodes.resize(names.size());
    index.reserve(names.size());
    for (NodeId id = 0; id < names.size(); ++id) index.emplace(names[id], id);

    for (NodeId id = 0; id < names.size(); ++id) {
      NodeName n = require_node(names[id], sig);
      NodeInfo& info = nodes[id];
      info.key = node_key(names[id]);
      if (n.is_output()) {
        info.output = true;
        info.op = sig.find(n.op);
        for (int k = 1; k <= info.op->arity; ++k) {
          info.ports.push_back(index.at("arg" + std::to_string(k) + " " + n.raw));
        }
      } else {
        info.owner = index.at(n.owner());
      }
    }

    // Members of a shared group read the column of the group's first name.
    std::map<std::string, std::vector<std::string>> readers;
    std::set<std::string> aliased;
    for (const auto& group : program.shared_input_groups) {
      const std::string& rep = *group.begin();
      for (const auto& name : group) {
        readers[rep].push_back(name);
        if (name != rep) aliased.insert(name);
      }
    }

    std::set<std::string> sources;
    for (const auto& [column_name, col] : program.matrix.columns()) {
      if (aliased.contains(column_name)) continue;
      Column c;
      c.y = index.at(column_name);
      if (auto it = readers.find(column_name); it != readers.end()) {
        for (const auto& r : it->second) c.readers.push_back(index.at(r));
      } else {
        c.readers.push_back(c.y);
      }
      c.begin = static_cast<std::uint32_t>(entries.size());
      for (const auto& [row, source] : col) {
        Entry e;
        e.row = index.at(row);
        if (const auto* cs = std::get_if<ConstantSource>(&source)) {
          e.kind = Entry::Kind::constant;
          e.constant = cs->value;
        } else if (const auto* es = std::get_if<ExternalSource>(&source)) {
          e.kind = Entry::Kind::external;
          e.schedule = &es->schedule;
        } else {
          e.kind = Entry::Kind::node;
          e.source = index.at(std::get<NodeSource>(source).node);
          sources.insert(std::get<NodeSource>(source).node);
        }
        entries.push_back(e);
      }
      c.end = static_cast<std::uint32_t>(entries.size());
      auto column_index = static_cast<std::int32_t>(columns.size());
      for (NodeId r : c.readers) nodes[r].column = column_index;
      columns.push_back(std::move(c));
    }
    for (const auto& s : sources) source_nodes.push_back(index.at(s));
  }

  const Entry* find_entry(const Column& c, NodeId row) const {
    auto first = entries.begin() + c.begin;
    auto last = entries.begin() + c.end;
    auto it = std::lower_bound(first, last, row, [](const Entry& e, NodeId r) { return e.row < r; });
    return (it != last && it->row == row) ? &*it : nullptr;
  }
};

class Engine {
 public:
  static MachineState init(const Program& program) {
    MachineState s;
    s.layout_ = std::make_shared<const Layout>(program);
    const Layout& L = *s.layout_;
    const std::size_t n = L.nodes.size();
    s.value_.assign(n, 0.0);
    s.active_.assign(n, 0);
    s.evaluated_at_.assign(n, 0);
    s.evals_.assign(n, 0);
    s.coeff_.assign(L.entries.size(), 0.0);
    s.column_active_.assign(L.columns.size(), 0);

    for (NodeId id : L.source_nodes) activate_output(s, id);
    resolve(s);
    enforce_policy(s);
    activate_nonzero(s);
    return s;
  }

  static void step(MachineState& s, const StepHook& hook) {
    const Layout& L = *s.layout_;
    const std::int64_t next = s.t_ + 1;

    // Step 1: outputs at t+1 from inputs at t. Inputs are not written here,
    // so evaluation order does not matter.
    for (NodeId id : s.active_outputs_) evaluate(s, id, next, false);
    s.t_ = next;

    // Step 2: coefficients at t+1.
    resolve(s);
    enforce_policy(s);
    s.last_activations_ = 0;
    activate_nonzero(s);

    if (hook) hook(s);

    // Step 3: inputs at t+1 as linear combinations, rows in name order.
    for (std::uint32_t ci : s.active_columns_) {
      const Column& c = L.columns[ci];
      double sum = 0.0;
      for (std::uint32_t e = c.begin; e < c.end; ++e) {
        double a = s.coeff_[e];
        if (a != 0.0) sum += a * s.value_[L.entries[e].row];
      }
      for (NodeId r : c.readers) s.value_[r] = sum;
    }
  }

  static void activate(MachineState& s, const ElementName& element) {
    const Layout& L = *s.layout_;
    if (L.program.matrix.find(element) == nullptr) {
      throw ProgramError("element " + element.raw() + " is not present in the matrix");
    }
    const NodeInfo& y = L.nodes[L.index.at(element.column)];
    const Column& c = L.columns.at(static_cast<std::size_t>(y.column));
    const Entry* e = L.find_entry(c, L.index.at(element.row));
    activate_entry(s, c, *e);
  }

 private:
  static void evaluate(MachineState& s, NodeId id, std::int64_t t, bool zero_args) {
    const NodeInfo& info = s.layout_->nodes[id];
    std::array<double, 8> small{};
    std::vector<double> big;
    std::span<double> args;
    const auto arity = info.ports.size();
    if (arity <= small.size()) {
      args = std::span<double>(small.data(), arity);
    } else {
      big.assign(arity, 0.0);
      args = big;
    }
    if (!zero_args) {
      for (std::size_t k = 0; k < arity; ++k) {
        NodeId p = info.ports[k];
        args[k] = s.active_[p] ? s.value_[p] : 0.0;
      }
    }
    s.value_[id] = eval_operation(*info.op, args, RngContext{s.seed(), info.key, t});
    s.evaluated_at_[id] = t;
    ++s.evals_[id];
  }

  static void resolve(MachineState& s) {
    const Layout& L = *s.layout_;
    for (std::size_t i = 0; i < L.entries.size(); ++i) {
      const Entry& e = L.entries[i];
      switch (e.kind) {
        case Entry::Kind::constant: s.coeff_[i] = e.constant; break;
        case Entry::Kind::external: s.coeff_[i] = e.schedule->value(s.t_); break;
        case Entry::Kind::node: s.coeff_[i] = s.value_[e.source]; break;
      }
    }
  }

  static void enforce_policy(MachineState& s) {
    const Layout& L = *s.layout_;
    const Program& p = L.program;
    if (p.policy == Policy::free) return;
    const bool clamp = p.violation_mode == ViolationMode::clamp;
    for (const Column& c : L.columns) {
      double sum = 0.0;
      for (std::uint32_t e = c.begin; e < c.end; ++e) {
        double& a = s.coeff_[e];
        if (a < 0.0 || std::isnan(a)) {
          if (!clamp) {
            throw ConstraintViolation(s.t_, L.names[c.y],
                                      "negative coefficient for row '" + L.names[L.entries[e].row] + "'");
          }
          a = 0.0;
        }
        sum += a;
      }
      if (p.policy == Policy::substochastic && sum > 1.0 + kColumnSumEpsilon) {
        if (!clamp) throw ConstraintViolation(s.t_, L.names[c.y], "column sum exceeds 1");
        for (std::uint32_t e = c.begin; e < c.end; ++e) s.coeff_[e] /= sum;
      }
    }
  }

  static void activate_nonzero(MachineState& s) {
    const Layout& L = *s.layout_;
    for (const Column& c : L.columns) {
      for (std::uint32_t e = c.begin; e < c.end; ++e) {
        if (s.coeff_[e] == 0.0) continue;
        const Entry& entry = L.entries[e];
        if (s.active_[c.y] && s.active_[entry.row]) continue;
        activate_entry(s, c, entry);
      }
    }
  }

  static void activate_entry(MachineState& s, const Column& c, const Entry& e) {
    const Layout& L = *s.layout_;
    for (NodeId r : c.readers) {
      NodeId owner = L.nodes[r].owner;
      activate_output(s, owner);
      for (NodeId port : L.nodes[owner].ports) activate_input(s, port);
    }
    activate_output(s, e.row);
    s.last_activations_ += c.readers.size();
  }

  // A node that becomes active mid-tick had inactive (zero) inputs at t-1,
  // so a zero-argument evaluation is exactly what Step 1 would have given.
  static void activate_output(MachineState& s, NodeId id) {
    if (s.active_[id]) return;
    s.active_[id] = 1;
    ++s.active_total_;
    s.active_outputs_.push_back(id);
    if (s.evaluated_at_[id] != s.t_) evaluate(s, id, s.t_, true);
  }

  static void activate_input(MachineState& s, NodeId id) {
    if (s.active_[id]) return;
    s.active_[id] = 1;
    ++s.active_total_;
    std::int32_t c = s.layout_->nodes[id].column;
    if (c >= 0 && !s.column_active_[static_cast<std::size_t>(c)]) {
      s.column_active_[static_cast<std::size_t>(c)] = 1;
      s.active_columns_.push_back(static_cast<std::uint32_t>(c));
    }
  }
};

}  // namespace detail

ConstraintViolation::ConstraintViolation(std::int64_t t, std::string column, const std::string& what)
    : std::runtime_error("constraint violation at t=" + std::to_string(t) + " in column '" + column +
                         "': " + what),
      t_(t),
      column_(std::move(column)) {}

std::uint64_t MachineState::seed() const { return layout_->program.seed; }

const Program& MachineState::program() const { return layout_->program; }

std::optional<NodeId> MachineState::find(std::string_view name) const {
  auto it = layout_->index.find(std::string(name));
  if (it == layout_->index.end()) return std::nullopt;
  return it->second;
}

const std::string& MachineState::name(NodeId id) const { return layout_->names.at(id); }

void MachineState::set_value(NodeId id, double v) {
  if (!active_.at(id) || !layout_->nodes[id].output) {
    throw std::logic_error("set_value on inactive or input node '" + layout_->names[id] + "'");
  }
  value_[id] = v;
}

bool MachineState::is_active(std::string_view name) const {
  auto id = find(name);
  return id && active_[*id];
}

std::vector<std::string> MachineState::active_nodes() const {
  std::vector<std::string> out;
  for (NodeId id = 0; id < active_.size(); ++id) {
    if (active_[id]) out.push_back(layout_->names[id]);
  }
  return out;
}

std::uint64_t MachineState::evaluations(std::string_view name) const {
  auto id = find(name);
  return id ? evals_[*id] : 0;
}

std::uint64_t MachineState::total_evaluations() const {
  std::uint64_t n = 0;
  for (auto e : evals_) n += e;
  return n;
}

double MachineState::coefficient(const std::string& column, const std::string& row) const {
  const detail::Layout& L = *layout_;
  auto c = find(column);
  auto r = find(row);
  if (!c || !r || L.nodes[*c].column < 0) return 0.0;
  const detail::Column& col = L.columns[static_cast<std::size_t>(L.nodes[*c].column)];
  const detail::Entry* e = L.find_entry(col, *r);
  return e ? coeff_[static_cast<std::size_t>(e - L.entries.data())] : 0.0;
}

std::map<ElementName, double> MachineState::coefficients() const {
  std::map<ElementName, double> out;
  layout_->program.matrix.for_each([&](const std::string& c, const std::string& r, const ElementSource&) {
    out[ElementName{c, r}] = coefficient(c, r);
  });
  return out;
}

std::size_t MachineState::nonzero_coefficients() const {
  return static_cast<std::size_t>(std::count_if(coeff_.begin(), coeff_.end(), [](double a) { return a != 0.0; }));
}

bool MachineState::same_as(const MachineState& o) const {
  auto bits_equal = [](const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
    }
    return true;
  };
  return layout_->program == o.layout_->program && t_ == o.t_ && bits_equal(value_, o.value_) &&
         bits_equal(coeff_, o.coeff_) && active_ == o.active_ && evals_ == o.evals_;
}

MachineState init_machine(const Program& program) { return detail::Engine::init(program); }

void step_in_place(MachineState& state, const StepHook& before_combine) {
  detail::Engine::step(state, before_combine);
}

MachineState step(MachineState state, const StepHook& before_combine) {
  detail::Engine::step(state, before_combine);
  return state;
}

MachineState activate_element(MachineState state, const ElementName& element) {
  detail::Engine::activate(state, element);
  return state;
}

double read_stream(const MachineState& state, std::string_view name) {
  require_node(name, state.program().signature);
  auto id = state.find(name);
  return id ? state.value(*id) : 0.0;
}

double Trajectory::at(std::int64_t t, std::string_view node) const {
  auto it = std::find(nodes.begin(), nodes.end(), node);
  if (it == nodes.end()) throw std::out_of_range("node '" + std::string(node) + "' is not watched");
  return values.at(static_cast<std::size_t>(t)).at(static_cast<std::size_t>(it - nodes.begin()));
}

Trajectory run(const Program& program, std::int64_t horizon, const std::vector<std::string>& watch,
               const StepHook& before_combine) {
  if (horizon < 0) throw std::invalid_argument("horizon must be non-negative");
  MachineState state = init_machine(program);
  std::vector<std::optional<NodeId>> ids;
  for (const auto& w : watch) {
    require_node(w, program.signature);
    ids.push_back(state.find(w));
  }
  Trajectory traj;
  traj.nodes = watch;
  auto record = [&] {
    std::vector<double> row;
    row.reserve(ids.size());
    for (const auto& id : ids) row.push_back(id ? state.value(*id) : 0.0);
    traj.values.push_back(std::move(row));
  };
  record();
  for (std::int64_t t = 0; t < horizon; ++t) {
    step_in_place(state, before_combine);
    record();
  }
  return traj;
}

}  // namespace mmvm
