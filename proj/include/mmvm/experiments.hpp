#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mmvm/machine.hpp"
#include "mmvm/program.hpp"

namespace mmvm {

struct GridSpec {
  int width = 64;
  int height = 64;
  std::size_t max_cells = std::size_t{1} << 20;

  std::size_t cells() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
  /// Throws std::invalid_argument for empty or oversized grids.
  void validate() const;

  static std::string cell_name(int x, int y);
  /// The propagator output of a cell: `prop cell_<x>_<y>`.
  static std::string cell_node(int x, int y);
  /// Its input: `arg1 prop cell_<x>_<y>`.
  static std::string cell_input(int x, int y);
};

/// Per-cell weighted neighborhoods, indexed by GridSpec::index. Neighbors
/// are sorted by cell index with duplicates merged.
struct ConnectivityPattern {
  std::string kind;
  std::vector<std::vector<std::pair<std::size_t, double>>> neighbors;
};

/// Accepts `vn-avg`, `shift:<dx>,<dy>` and `random-sparse:<k>,<seed>`.
/// Offsets wrap around the grid edges.
ConnectivityPattern make_pattern(const GridSpec& grid, std::string_view spec);

enum class CellInit { none, white, black };

/// Accepts `white`, `black`, `none`, `checker` and `half` (left half white,
/// right half black).
std::vector<CellInit> make_init(const GridSpec& grid, std::string_view spec);

struct SwitchTiming {
  std::int64_t switch_at = 5;
  /// 0 switches abruptly; otherwise the constants fade out and the pattern
  /// fades in linearly over [switch_at, switch_at + ramp].
  std::int64_t ramp = 0;
};

/// One propagator per cell. Each cell input first reads its init constant
/// (`white u` or `black u`) and, from the switch on, its neighbors'
/// propagators with the pattern weights. Policy substochastic.
Program build_ca_program(const GridSpec& grid, const ConnectivityPattern& pattern, double p,
                         const std::vector<CellInit>& init, SwitchTiming timing = {}, std::uint64_t seed = 0);

/// Entrywise (1 - lambda) A + lambda B over the union of entries. Constants
/// and schedules combine exactly (schedules of the same mode, breakpoints
/// merged); node sources must be identical on both sides. lambda = 0 and 1
/// return A and B unchanged.
CoefficientMatrix morph_matrices(const CoefficientMatrix& a, const CoefficientMatrix& b, double lambda);

/// morph_matrices on the matrices; the programs must agree on signature,
/// policy and violation mode. Seed comes from A.
Program morph_programs(const Program& a, const Program& b, double lambda);

struct Frame {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

struct FrameStats {
  double mean_abs = 0.0;
  double max_abs = 0.0;
  double rms = 0.0;
};

FrameStats frame_stats(const Frame& frame);

/// Divides by max |v| when it is positive.
Frame amplify_frame(Frame frame);

/// Cell propagator values; 0 for inactive cells.
Frame frame_from_state(const MachineState& state, const GridSpec& grid);

/// Rescales cell propagator values up to `target_rms` when their RMS is
/// below it (and nonzero), then clamps to [-1, 1].
MachineState stabilize(MachineState state, const GridSpec& grid, double target_rms);

/// Cell node ids resolved once for a machine; used on hot paths.
class CellView {
 public:
  CellView(const MachineState& state, const GridSpec& grid);

  Frame frame(const MachineState& state) const;
  void stabilize(MachineState& state, double target_rms) const;

 private:
  GridSpec grid_;
  std::vector<std::optional<NodeId>> ids_;
};

struct CaRunOptions {
  std::int64_t steps = 0;
  std::int64_t frame_every = 1;
  std::optional<double> stabilize_rms;
};

/// Steps a CA program and calls `on_frame` with the raw frame at t = 0 and
/// every `frame_every` ticks.
void run_ca(const Program& program, const GridSpec& grid, const CaRunOptions& options,
            const std::function<void(std::int64_t t, const Frame& frame)>& on_frame);

}  // namespace mmvm
