#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmvm/program.hpp"
#include "mmvm/trajectory.hpp"

// Dense reference model of the machine for small programs. Every node the
// program could ever reach is enumerated up front and evaluated on every
// tick; there is no laziness and no activation bookkeeping.
namespace mmvm::oracle {

inline constexpr std::size_t kDefaultCapacity = 200;

struct DenseModel {
  Program program;
  std::vector<std::string> x_names;  // sorted
  std::vector<std::string> y_names;  // sorted
  std::vector<const OperationDef*> x_ops;
  std::vector<std::vector<std::size_t>> x_ports;  // indices into y_names
  /// sources[j][i]: source of cell (y_names[j], x_names[i]) or nullptr.
  std::vector<std::vector<const ElementSource*>> sources;
  /// For node sources, index into x_names of the source node (per cell).
  std::vector<std::vector<std::size_t>> source_index;
  /// Index into x_names of the output owning each input.
  std::vector<std::size_t> y_owner;
  /// Outputs named by node sources.
  std::vector<std::size_t> source_targets;

  DenseModel() = default;
  DenseModel(const DenseModel&) = delete;
  DenseModel& operator=(const DenseModel&) = delete;
};

using Vector = std::vector<double>;
using Matrix = std::vector<Vector>;

/// Throws std::length_error when the closure exceeds `capacity` nodes.
std::unique_ptr<DenseModel> build_dense_model(const Program& program,
                                              std::size_t capacity = kDefaultCapacity);

/// L_t given the output vector at t (node sources read it); policy applied.
Matrix dense_coefficients(const DenseModel& model, const Vector& x, std::int64_t t);

/// x_{t+1} = F(y_t), then y_{t+1} = L_{t+1} x_{t+1}.
std::pair<Vector, Vector> dense_step(const DenseModel& model, const Vector& x, const Vector& y,
                                     std::int64_t t);

/// Outputs whose values are observable at t: node-source targets, and the
/// rows and column owners of every element that has been nonzero at some
/// tick up to t. Everything else reads 0.
void mark_reached(const DenseModel& model, const Matrix& L, std::vector<bool>& reached);

Trajectory dense_run(const Program& program, std::int64_t horizon, const std::vector<std::string>& watch);

struct Divergence {
  std::int64_t t;
  std::string node;
  double deviation;
};

struct Report {
  std::vector<std::string> nodes;
  std::vector<double> max_deviation;  // per node
  double overall = 0.0;
  bool pass = true;
  std::optional<Divergence> first;  // earliest (t, node) above tolerance
};

/// Throws std::invalid_argument on mismatched node lists or horizons.
Report compare_trajectories(const Trajectory& sparse, const Trajectory& dense, double tol);

}  // namespace mmvm::oracle
