#include "mmvm/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "mmvm/stdlib.hpp"

namespace mmvm {

namespace {

constexpr const char* kWhiteNode = "white u";
constexpr const char* kBlackNode = "black u";

std::vector<long long> parse_ints(std::string_view s, std::size_t expected, std::string_view what) {
  std::vector<long long> out;
  while (!s.empty()) {
    auto comma = s.find(',');
    std::string_view part = s.substr(0, comma);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || ptr != part.data() + part.size()) {
      throw std::invalid_argument("bad number '" + std::string(part) + "' in " + std::string(what));
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  if (out.size() != expected) throw std::invalid_argument("malformed pattern '" + std::string(what) + "'");
  return out;
}

int wrap(long long v, int n) { return static_cast<int>(((v % n) + n) % n); }

void normalize(std::vector<std::pair<std::size_t, double>>& nb) {
  std::map<std::size_t, double> merged;
  for (auto [i, w] : nb) merged[i] += w;
  nb.assign(merged.begin(), merged.end());
}

Schedule morph_schedule(const Schedule& a, const Schedule& b, double lambda) {
  Schedule out;
  out.mode = a.mode;
  std::set<std::int64_t> ts;
  for (const auto& p : a.points) ts.insert(p.first);
  for (const auto& p : b.points) ts.insert(p.first);
  for (std::int64_t t : ts) out.points.emplace_back(t, (1.0 - lambda) * a.value(t) + lambda * b.value(t));
  return out;
}

ElementSource morph_source(const ElementSource* a, const ElementSource* b, double lambda) {
  static const ElementSource zero = constant_source(0.0);
  if (a == nullptr) a = &zero;
  if (b == nullptr) b = &zero;
  const auto* na = std::get_if<NodeSource>(a);
  const auto* nb = std::get_if<NodeSource>(b);
  if (na || nb) {
    if (na && nb && *na == *nb) return *a;
    throw std::invalid_argument("cannot morph between different node sources");
  }
  const auto* ca = std::get_if<ConstantSource>(a);
  const auto* cb = std::get_if<ConstantSource>(b);
  if (ca && cb) return constant_source((1.0 - lambda) * ca->value + lambda * cb->value);

  auto as_schedule = [](const ElementSource& s, Schedule::Mode mode) {
    if (const auto* e = std::get_if<ExternalSource>(&s)) return e->schedule;
    Schedule sched;
    sched.mode = mode;
    sched.points = {{0, std::get<ConstantSource>(s).value}};
    return sched;
  };
  Schedule::Mode mode = std::holds_alternative<ExternalSource>(*a) ? std::get<ExternalSource>(*a).schedule.mode
                                                                   : std::get<ExternalSource>(*b).schedule.mode;
  Schedule sa = as_schedule(*a, mode);
  Schedule sb = as_schedule(*b, mode);
  if (sa.mode != sb.mode) throw std::invalid_argument("cannot morph step and linear schedules");
  return external_source(morph_schedule(sa, sb, lambda));
}

}  // namespace

void GridSpec::validate() const {
  if (width <= 0 || height <= 0) throw std::invalid_argument("grid dimensions must be positive");
  if (cells() > max_cells) {
    throw std::invalid_argument("grid of " + std::to_string(cells()) + " cells exceeds the maximum of " +
                                std::to_string(max_cells));
  }
}

std::string GridSpec::cell_name(int x, int y) { return "cell_" + std::to_string(x) + "_" + std::to_string(y); }

std::string GridSpec::cell_node(int x, int y) { return "prop " + cell_name(x, y); }

std::string GridSpec::cell_input(int x, int y) { return "arg1 " + cell_node(x, y); }

ConnectivityPattern make_pattern(const GridSpec& grid, std::string_view spec) {
  grid.validate();
  ConnectivityPattern pat;
  pat.kind = std::string(spec);
  pat.neighbors.resize(grid.cells());
  const int w = grid.width;
  const int h = grid.height;

  if (spec == "vn-avg") {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        auto& nb = pat.neighbors[grid.index(x, y)];
        nb = {{grid.index(wrap(x - 1, w), y), 0.25},
              {grid.index(wrap(x + 1, w), y), 0.25},
              {grid.index(x, wrap(y - 1, h)), 0.25},
              {grid.index(x, wrap(y + 1, h)), 0.25}};
        normalize(nb);
      }
    }
  } else if (spec.starts_with("shift:")) {
    auto v = parse_ints(spec.substr(6), 2, spec);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        pat.neighbors[grid.index(x, y)] = {{grid.index(wrap(x + v[0], w), wrap(y + v[1], h)), 1.0}};
      }
    }
  } else if (spec.starts_with("random-sparse:")) {
    auto v = parse_ints(spec.substr(14), 2, spec);
    const long long k = v[0];
    if (k < 1 || static_cast<std::size_t>(k) > grid.cells()) {
      throw std::invalid_argument("random-sparse needs 1 <= k <= number of cells");
    }
    std::mt19937_64 rng(static_cast<std::uint64_t>(v[1]));
    const double weight = 1.0 / static_cast<double>(k);
    for (auto& nb : pat.neighbors) {
      std::set<std::size_t> picked;
      while (picked.size() < static_cast<std::size_t>(k)) picked.insert(rng() % grid.cells());
      for (std::size_t i : picked) nb.emplace_back(i, weight);
    }
  } else {
    throw std::invalid_argument("unknown pattern '" + std::string(spec) + "'");
  }
  return pat;
}

std::vector<CellInit> make_init(const GridSpec& grid, std::string_view spec) {
  grid.validate();
  std::vector<CellInit> init(grid.cells(), CellInit::none);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      CellInit& c = init[grid.index(x, y)];
      if (spec == "white") {
        c = CellInit::white;
      } else if (spec == "black") {
        c = CellInit::black;
      } else if (spec == "none") {
        c = CellInit::none;
      } else if (spec == "checker") {
        c = (x + y) % 2 == 0 ? CellInit::white : CellInit::black;
      } else if (spec == "half") {
        c = x < grid.width / 2 ? CellInit::white : CellInit::black;
      } else {
        throw std::invalid_argument("unknown init '" + std::string(spec) + "'");
      }
    }
  }
  return init;
}

Program build_ca_program(const GridSpec& grid, const ConnectivityPattern& pattern, double p,
                         const std::vector<CellInit>& init, SwitchTiming timing, std::uint64_t seed) {
  grid.validate();
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("propagation probability must be in [0, 1]");
  if (pattern.neighbors.size() != grid.cells() || init.size() != grid.cells()) {
    throw std::invalid_argument("pattern or init does not match the grid");
  }
  if (timing.switch_at < 0 || timing.ramp < 0) throw std::invalid_argument("negative switch time or ramp");

  Program prog;
  prog.signature = ca_signature(p);
  prog.policy = Policy::substochastic;
  prog.seed = seed;

  const bool has_init_phase = timing.switch_at > 0 || timing.ramp > 0;
  auto fade_out = [&] {
    Schedule s;
    if (timing.ramp == 0) {
      s.mode = Schedule::Mode::step;
      s.points = {{0, 1.0}, {timing.switch_at, 0.0}};
    } else {
      s.mode = Schedule::Mode::linear;
      s.points = {{timing.switch_at, 1.0}, {timing.switch_at + timing.ramp, 0.0}};
    }
    return s;
  };
  auto fade_in = [&](double w) -> ElementSource {
    if (!has_init_phase) return constant_source(w);
    Schedule s;
    if (timing.ramp == 0) {
      s.mode = Schedule::Mode::step;
      s.points = {{0, 0.0}, {timing.switch_at, w}};
    } else {
      s.mode = Schedule::Mode::linear;
      s.points = {{timing.switch_at, 0.0}, {timing.switch_at + timing.ramp, w}};
    }
    return external_source(std::move(s));
  };

  std::vector<std::string> node_of(grid.cells());
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) node_of[grid.index(x, y)] = GridSpec::cell_node(x, y);
  }

  // Cells whose whole column coincides share one physical column.
  std::map<std::string, std::set<std::string>> by_column;
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      const std::size_t c = grid.index(x, y);
      const std::string input = GridSpec::cell_input(x, y);
      std::string key;
      if (has_init_phase && init[c] != CellInit::none) {
        const char* row = init[c] == CellInit::white ? kWhiteNode : kBlackNode;
        prog.matrix.set(input, row, external_source(fade_out()));
        key += std::string(row) + ";";
      }
      for (auto [n, w] : pattern.neighbors[c]) {
        if (w < 0.0) throw std::invalid_argument("negative pattern weight");
        prog.matrix.set(input, node_of[n], fade_in(w));
        char buf[64];
        std::snprintf(buf, sizeof buf, "%zu:%a;", n, w);
        key += buf;
      }
      by_column[key].insert(input);
    }
  }
  for (auto& [_, members] : by_column) {
    if (members.size() > 1) prog.shared_input_groups.push_back(std::move(members));
  }
  return prog;
}

CoefficientMatrix morph_matrices(const CoefficientMatrix& a, const CoefficientMatrix& b, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must be in [0, 1]");
  if (lambda == 0.0) return a;
  if (lambda == 1.0) return b;
  std::set<std::pair<std::string, std::string>> cells;
  a.for_each([&](const std::string& c, const std::string& r, const ElementSource&) { cells.emplace(c, r); });
  b.for_each([&](const std::string& c, const std::string& r, const ElementSource&) { cells.emplace(c, r); });
  CoefficientMatrix out;
  for (const auto& [c, r] : cells) out.set(c, r, morph_source(a.find(c, r), b.find(c, r), lambda));
  return out;
}

Program morph_programs(const Program& a, const Program& b, double lambda) {
  if (!(a.signature == b.signature)) throw std::invalid_argument("programs have different signatures");
  if (a.policy != b.policy || a.violation_mode != b.violation_mode) {
    throw std::invalid_argument("programs have different constraint policies");
  }
  if (lambda == 0.0) return a;
  if (lambda == 1.0) return b;
  Program out;
  out.signature = a.signature;
  out.policy = a.policy;
  out.violation_mode = a.violation_mode;
  out.seed = a.seed;
  out.matrix = morph_matrices(a.matrix, b.matrix, lambda);
  for (const auto& g : a.shared_input_groups) {
    if (std::find(b.shared_input_groups.begin(), b.shared_input_groups.end(), g) != b.shared_input_groups.end()) {
      out.shared_input_groups.push_back(g);
    }
  }
  return out;
}

FrameStats frame_stats(const Frame& frame) {
  FrameStats s;
  if (frame.values.empty()) return s;
  double sum_abs = 0.0;
  double sum_sq = 0.0;
  for (double v : frame.values) {
    sum_abs += std::abs(v);
    sum_sq += v * v;
    s.max_abs = std::max(s.max_abs, std::abs(v));
  }
  const auto n = static_cast<double>(frame.values.size());
  s.mean_abs = sum_abs / n;
  s.rms = std::sqrt(sum_sq / n);
  return s;
}

Frame amplify_frame(Frame frame) {
  double m = 0.0;
  for (double v : frame.values) m = std::max(m, std::abs(v));
  if (m > 0.0) {
    for (double& v : frame.values) v /= m;
  }
  return frame;
}

CellView::CellView(const MachineState& state, const GridSpec& grid) : grid_(grid) {
  grid_.validate();
  ids_.resize(grid_.cells());
  for (int y = 0; y < grid_.height; ++y) {
    for (int x = 0; x < grid_.width; ++x) ids_[grid_.index(x, y)] = state.find(GridSpec::cell_node(x, y));
  }
}

Frame CellView::frame(const MachineState& state) const {
  Frame f{grid_.width, grid_.height, std::vector<double>(grid_.cells(), 0.0)};
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i]) f.values[i] = state.value(*ids_[i]);
  }
  return f;
}

void CellView::stabilize(MachineState& state, double target_rms) const {
  if (!(target_rms > 0.0)) throw std::invalid_argument("target_rms must be positive");
  double sum_sq = 0.0;
  for (const auto& id : ids_) {
    if (id) sum_sq += state.value(*id) * state.value(*id);
  }
  const double rms = std::sqrt(sum_sq / static_cast<double>(ids_.size()));
  if (!(rms > 0.0) || rms >= target_rms) return;
  const double scale = target_rms / rms;
  for (const auto& id : ids_) {
    if (id && state.active(*id)) state.set_value(*id, std::clamp(state.value(*id) * scale, -1.0, 1.0));
  }
}

Frame frame_from_state(const MachineState& state, const GridSpec& grid) {
  return CellView(state, grid).frame(state);
}

MachineState stabilize(MachineState state, const GridSpec& grid, double target_rms) {
  CellView(state, grid).stabilize(state, target_rms);
  return state;
}

void run_ca(const Program& program, const GridSpec& grid, const CaRunOptions& options,
            const std::function<void(std::int64_t t, const Frame& frame)>& on_frame) {
  if (options.steps < 0 || options.frame_every < 1) throw std::invalid_argument("bad step or frame counts");
  MachineState state = init_machine(program);
  CellView view(state, grid);
  StepHook hook;
  if (options.stabilize_rms) {
    double target = *options.stabilize_rms;
    hook = [&view, target](MachineState& s) { view.stabilize(s, target); };
  }
  on_frame(0, view.frame(state));
  for (std::int64_t t = 1; t <= options.steps; ++t) {
    step_in_place(state, hook);
    if (t % options.frame_every == 0) on_frame(t, view.frame(state));
  }
}

}  // namespace mmvm
