#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmvm/program.hpp"
#include "mmvm/trajectory.hpp"

namespace mmvm {

/// A resolved coefficient broke the program's policy in reject mode.
class ConstraintViolation : public std::runtime_error {
 public:
  ConstraintViolation(std::int64_t t, std::string column, const std::string& what);

  std::int64_t time() const { return t_; }
  const std::string& column() const { return column_; }

 private:
  std::int64_t t_;
  std::string column_;
};

using NodeId = std::uint32_t;

namespace detail {
struct Layout;
class Engine;
}  // namespace detail

/// Machine state at time t: stream values, resolved coefficients and the set
/// of active (instantiated) nodes.
///
/// States are values. Copies share the immutable compiled program and
/// nothing else, so a copy can be stepped independently of the original.
class MachineState {
 public:
  std::int64_t time() const { return t_; }
  std::uint64_t seed() const;
  const Program& program() const;

  /// Id of a node the program can activate; nullopt for any other name.
  std::optional<NodeId> find(std::string_view name) const;
  const std::string& name(NodeId id) const;
  std::size_t node_count() const { return value_.size(); }

  /// Current value; 0 for inactive nodes.
  double value(NodeId id) const { return active_[id] ? value_[id] : 0.0; }
  /// Overwrites the current value of an active output node. Used by step
  /// hooks that adjust X values before they are combined.
  void set_value(NodeId id, double v);

  bool active(NodeId id) const { return active_[id] != 0; }
  bool is_active(std::string_view name) const;
  std::size_t active_count() const { return active_total_; }
  /// Sorted names of all active nodes.
  std::vector<std::string> active_nodes() const;

  std::uint64_t evaluations(std::string_view name) const;
  std::uint64_t total_evaluations() const;

  /// Resolved coefficient of a present entry, 0 for absent ones.
  double coefficient(const std::string& column, const std::string& row) const;
  /// Resolved coefficients of every present entry, including aliased
  /// columns of shared input groups.
  std::map<ElementName, double> coefficients() const;
  std::size_t nonzero_coefficients() const;

  /// Number of elements that went from never-nonzero to nonzero during the
  /// last step (or during init).
  std::size_t last_activations() const { return last_activations_; }

  /// Bitwise comparison of all dynamic state.
  bool same_as(const MachineState& other) const;

 private:
  friend class detail::Engine;

  std::shared_ptr<const detail::Layout> layout_;
  std::int64_t t_ = 0;
  std::vector<double> value_;
  std::vector<double> coeff_;
  std::vector<std::uint8_t> active_;
  std::vector<std::int64_t> evaluated_at_;
  std::vector<std::uint64_t> evals_;
  std::vector<NodeId> active_outputs_;
  std::vector<std::uint8_t> column_active_;
  std::vector<std::uint32_t> active_columns_;
  std::size_t active_total_ = 0;
  std::size_t last_activations_ = 0;
};

/// Called between coefficient resolution and the linear combination step.
using StepHook = std::function<void(MachineState&)>;

/// Validates and compiles the program; all streams start at 0.
MachineState init_machine(const Program& program);

/// Advances one tick. If this throws, the state is left partially updated.
void step_in_place(MachineState& state, const StepHook& before_combine = {});

/// Advances one tick, leaving the argument untouched.
MachineState step(MachineState state, const StepHook& before_combine = {});

/// Instantiates the nodes around a present element at the current time,
/// retroactively evaluating the row node with zero arguments when it has
/// not been computed yet at this time.
MachineState activate_element(MachineState state, const ElementName& element);

/// Throws NameError for names that do not parse; 0 for inactive nodes.
double read_stream(const MachineState& state, std::string_view name);

Trajectory run(const Program& program, std::int64_t horizon, const std::vector<std::string>& watch,
               const StepHook& before_combine = {});

}  // namespace mmvm
