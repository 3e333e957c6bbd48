#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "mmvm/experiments.hpp"
#include "mmvm/trajectory.hpp"

namespace mmvm {

/// `%.17g`: enough digits to round-trip a binary64 value.
std::string format_real(double v);

/// Header `t,node,value`, one row per (t, watched node).
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// round((clamp(v, -1, 1) + 1) / 2 * 255); NaN maps to mid-gray.
std::uint8_t pixel_value(double v);

/// Binary PGM: `P5\n<w> <h>\n255\n` followed by row-major pixels.
std::string encode_pgm(const Frame& frame);

void write_file(const std::filesystem::path& path, const std::string& bytes);

struct StatsRow {
  std::int64_t t;
  FrameStats stats;
};

/// Header `t,mean_abs,max_abs,rms`.
void write_stats_csv(std::ostream& out, const std::vector<StatsRow>& rows);

}  // namespace mmvm
