#include "mmvm/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mmvm {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,node,value\n";
  std::vector<std::string> fields;
  for (const auto& n : traj.nodes) fields.push_back(csv_field(n));
  for (std::size_t t = 0; t < traj.values.size(); ++t) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
      out << t << ',' << fields[k] << ',' << format_real(traj.values[t][k]) << '\n';
    }
  }
}

std::uint8_t pixel_value(double v) {
  if (std::isnan(v)) v = 0.0;
  double c = std::clamp(v, -1.0, 1.0);
  return static_cast<std::uint8_t>(std::lround((c + 1.0) / 2.0 * 255.0));
}

std::string encode_pgm(const Frame& frame) {
  std::string out = "P5\n" + std::to_string(frame.width) + " " + std::to_string(frame.height) + "\n255\n";
  out.reserve(out.size() + frame.values.size());
  for (double v : frame.values) out.push_back(static_cast<char>(pixel_value(v)));
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

void write_stats_csv(std::ostream& out, const std::vector<StatsRow>& rows) {
  out << "t,mean_abs,max_abs,rms\n";
  for (const auto& r : rows) {
    out << r.t << ',' << format_real(r.stats.mean_abs) << ',' << format_real(r.stats.max_abs) << ','
        << format_real(r.stats.rms) << '\n';
  }
}

}  // namespace mmvm
