#include "mmvm/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "mmvm/artifacts.hpp"
#include "mmvm/experiments.hpp"
#include "mmvm/machine.hpp"
#include "mmvm/program_file.hpp"

namespace mmvm::cli {

namespace fs = std::filesystem;

namespace {

/// Failure with a specific exit code.
struct CliFailure {
  int code;
  std::string message;
};

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("MM_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  std::uint64_t v = 0;
  std::string_view sv(s);
  auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
  if (ec != std::errc{} || ptr != sv.data() + sv.size()) {
    throw CliFailure{kValidationError, "MM_SEED is not an unsigned integer: '" + std::string(sv) + "'"};
  }
  return v;
}

/// --seed, then the program file's seed, then MM_SEED.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const ProgramFile* file) {
  if (flag) return *flag;
  if (file && file->has_seed) return file->program.seed;
  if (auto e = env_seed()) return *e;
  return file ? file->program.seed : 0;
}

ProgramFile load_or_fail(const std::string& path) {
  try {
    return load_program_file(path);
  } catch (const ProgramFileError& e) {
    throw CliFailure{kValidationError, e.what()};
  } catch (const ProgramError& e) {
    throw CliFailure{kValidationError, e.what()};
  } catch (const NameError& e) {
    throw CliFailure{kValidationError, e.what()};
  }
}

std::vector<std::string> split_watch(const std::vector<std::string>& flags) {
  std::vector<std::string> out;
  for (const auto& f : flags) {
    std::string_view s = f;
    while (true) {
      auto comma = s.find(',');
      std::string part(s.substr(0, comma));
      if (!part.empty()) out.push_back(part);
      if (comma == std::string_view::npos) break;
      s.remove_prefix(comma + 1);
    }
  }
  return out;
}

std::vector<std::string> default_watch(const ProgramFile& file) {
  if (!file.watch.empty()) return file.watch;
  std::vector<std::string> out;
  for (const auto& [column, _] : file.program.matrix.columns()) out.push_back(column);
  return out;
}

void check_watch(const std::vector<std::string>& watch, const Signature& sig) {
  for (const auto& w : watch) {
    ParsedName p = parse_name(w, sig);
    if (!p.valid()) throw CliFailure{kValidationError, "watch name: " + p.error};
  }
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  try {
    write_file(path, text);
  } catch (const std::exception& e) {
    throw CliFailure{kRuntimeError, e.what()};
  }
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliFailure{kRuntimeError, "cannot create '" + dir.string() + "': " + ec.message()};
}

double parse_stabilize(const std::string& spec) {
  std::string v = spec.starts_with("rms=") ? spec.substr(4) : spec;
  double r = 0.0;
  try {
    std::size_t used = 0;
    r = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
  } catch (const std::exception&) {
    throw CliFailure{kValidationError, "--stabilize expects rms=<positive number>, got '" + spec + "'"};
  }
  if (!(r > 0.0)) throw CliFailure{kValidationError, "--stabilize target must be positive"};
  return r;
}

GridSpec parse_grid(const std::string& spec) {
  auto x = spec.find('x');
  GridSpec g;
  try {
    if (x == std::string::npos) throw std::invalid_argument(spec);
    g.width = std::stoi(spec.substr(0, x));
    g.height = std::stoi(spec.substr(x + 1));
    g.validate();
  } catch (const std::exception&) {
    throw CliFailure{kValidationError, "--grid expects <width>x<height>, got '" + spec + "'"};
  }
  return g;
}

/// Runs a program, recording the watched nodes and optionally grid frames.
Trajectory simulate(const Program& program, std::int64_t steps, const std::vector<std::string>& watch,
                    const std::optional<GridSpec>& grid, std::int64_t frame_every, bool amplify,
                    const fs::path& frames_dir) {
  try {
    if (!grid) return run(program, steps, watch);
    Trajectory traj;
    traj.nodes = watch;
    MachineState state = init_machine(program);
    CellView view(state, *grid);
    auto record = [&] {
      std::vector<double> row;
      for (const auto& w : watch) row.push_back(read_stream(state, w));
      traj.values.push_back(std::move(row));
      if (state.time() % frame_every == 0) {
        Frame f = view.frame(state);
        if (amplify) f = amplify_frame(std::move(f));
        write_file(frames_dir / ("frame_" + std::to_string(state.time()) + ".pgm"), encode_pgm(f));
      }
    };
    record();
    for (std::int64_t t = 0; t < steps; ++t) {
      step_in_place(state);
      record();
    }
    return traj;
  } catch (const ConstraintViolation& e) {
    throw CliFailure{kRuntimeError, e.what()};
  } catch (const ProgramError& e) {
    throw CliFailure{kValidationError, e.what()};
  } catch (const std::exception& e) {
    throw CliFailure{kRuntimeError, e.what()};
  }
}

int cmd_validate(const std::string& path, std::ostream& out) {
  ProgramFile file = load_or_fail(path);
  const Program& p = file.program;
  out << "ok\n";
  out << "operations: " << p.signature.operations().size() << "\n";
  out << "nodes: " << activation_universe(p).size() << "\n";
  out << "elements: " << p.matrix.entry_count() << "\n";
  out << "policy: " << to_string(p.policy) << "\n";
  out << "order classes:";
  for (const auto& [cls, n] : order_histogram(p)) out << ' ' << to_string(cls) << '=' << n;
  out << "\n";
  return kOk;
}

struct RunArgs {
  std::string path;
  std::int64_t steps = 0;
  std::vector<std::string> watch;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int cmd_run(const RunArgs& a, std::ostream& out) {
  ProgramFile file = load_or_fail(a.path);
  file.program.seed = resolve_seed(a.seed, &file);
  auto watch = a.watch.empty() ? default_watch(file) : split_watch(a.watch);
  check_watch(watch, file.program.signature);
  Trajectory traj = simulate(file.program, a.steps, watch, std::nullopt, 1, false, {});
  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  write_text(a.out, csv.str(), out);
  return kOk;
}

struct CaArgs {
  int width = 64;
  int height = 64;
  double p = 0.995;
  std::string pattern = "vn-avg";
  std::string init = "white";
  std::int64_t switch_at = 5;
  std::int64_t ramp = 0;
  std::int64_t steps = 100;
  std::string frames_dir;
  std::int64_t frame_every = 10;
  bool amplify = false;
  std::string stabilize;
  std::optional<std::uint64_t> seed;
  std::string stats;
  std::string save_program;
};

int cmd_ca(const CaArgs& a, std::ostream& out) {
  GridSpec grid;
  grid.width = a.width;
  grid.height = a.height;
  Program program;
  try {
    auto pattern = make_pattern(grid, a.pattern);
    auto init = make_init(grid, a.init);
    program = build_ca_program(grid, pattern, a.p, init, SwitchTiming{a.switch_at, a.ramp},
                               resolve_seed(a.seed, nullptr));
  } catch (const std::invalid_argument& e) {
    throw CliFailure{kValidationError, e.what()};
  }
  if (a.steps < 0 || a.frame_every < 1) throw CliFailure{kValidationError, "--steps >= 0 and --frame-every >= 1"};

  if (!a.save_program.empty()) {
    ProgramFile file{program, {}, true};
    try {
      save_program_file(file, a.save_program);
    } catch (const std::exception& e) {
      throw CliFailure{kRuntimeError, e.what()};
    }
  }

  CaRunOptions opts;
  opts.steps = a.steps;
  opts.frame_every = a.frame_every;
  if (!a.stabilize.empty()) opts.stabilize_rms = parse_stabilize(a.stabilize);

  fs::path frames;
  if (!a.frames_dir.empty()) {
    frames = a.frames_dir;
    make_dir(frames);
  }
  std::vector<StatsRow> rows;
  try {
    run_ca(program, grid, opts, [&](std::int64_t t, const Frame& raw) {
      rows.push_back({t, frame_stats(raw)});
      if (frames.empty()) return;
      Frame f = a.amplify ? amplify_frame(raw) : raw;
      write_file(frames / ("frame_" + std::to_string(t) + ".pgm"), encode_pgm(f));
    });
  } catch (const ConstraintViolation& e) {
    throw CliFailure{kRuntimeError, e.what()};
  } catch (const std::exception& e) {
    throw CliFailure{kRuntimeError, e.what()};
  }

  std::ostringstream csv;
  write_stats_csv(csv, rows);
  std::string stats_path = a.stats;
  if (stats_path.empty() && !frames.empty()) stats_path = (frames / "stats.csv").string();
  write_text(stats_path, csv.str(), out);
  return kOk;
}

struct MorphArgs {
  std::string path_a;
  std::string path_b;
  int lambda_steps = 4;
  std::int64_t steps = 0;
  std::vector<std::string> watch;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string grid;
  std::int64_t frame_every = 1;
  bool amplify = false;
};

int cmd_morph(const MorphArgs& a, std::ostream& out) {
  ProgramFile fa = load_or_fail(a.path_a);
  ProgramFile fb = load_or_fail(a.path_b);
  if (a.lambda_steps < 1) throw CliFailure{kValidationError, "--lambda-steps must be at least 1"};
  if (a.steps < 0 || a.frame_every < 1) throw CliFailure{kValidationError, "--steps >= 0 and --frame-every >= 1"};
  fa.program.seed = resolve_seed(a.seed, &fa);
  fb.program.seed = resolve_seed(a.seed, &fb);
  auto watch = a.watch.empty() ? default_watch(fa) : split_watch(a.watch);
  check_watch(watch, fa.program.signature);
  std::optional<GridSpec> grid;
  if (!a.grid.empty()) grid = parse_grid(a.grid);

  const fs::path dir = a.out_dir.empty() ? fs::path(".") : fs::path(a.out_dir);
  make_dir(dir);
  std::ostringstream index;
  index << "index,lambda,file\n";
  for (int i = 0; i <= a.lambda_steps; ++i) {
    const double lambda = static_cast<double>(i) / a.lambda_steps;
    Program p;
    try {
      p = morph_programs(fa.program, fb.program, lambda);
    } catch (const std::invalid_argument& e) {
      throw CliFailure{kValidationError, e.what()};
    }
    fs::path frames;
    if (grid) {
      frames = dir / ("lambda_" + std::to_string(i));
      make_dir(frames);
    }
    Trajectory traj = simulate(p, a.steps, watch, grid, a.frame_every, a.amplify, frames);
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    const std::string name = "lambda_" + std::to_string(i) + ".csv";
    write_text((dir / name).string(), csv.str(), out);
    index << i << ',' << format_real(lambda) << ',' << name << '\n';
  }
  write_text((dir / "lambdas.csv").string(), index.str(), out);
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mmvm: dataflow programs as sparse coefficient matrices"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a program file and summarize it");
  validate->add_option("path", validate_path, "Program file")->required();

  RunArgs ra;
  std::uint64_t run_seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Run a program file and write a trajectory CSV");
  run_cmd->add_option("path", ra.path, "Program file")->required();
  run_cmd->add_option("--steps", ra.steps, "Number of ticks")->required();
  run_cmd->add_option("--watch", ra.watch, "Nodes to record (repeatable, comma separated)");
  run_cmd->add_option("--out", ra.out, "CSV output path (default stdout)");
  auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "Master seed");

  CaArgs ca;
  std::uint64_t ca_seed = 0;
  auto* ca_cmd = app.add_subcommand("ca", "Run a continuous cellular automaton");
  ca_cmd->add_option("--width", ca.width, "Grid width");
  ca_cmd->add_option("--height", ca.height, "Grid height");
  ca_cmd->add_option("--p", ca.p, "Propagation probability");
  ca_cmd->add_option("--pattern", ca.pattern, "vn-avg | shift:<dx>,<dy> | random-sparse:<k>,<seed>");
  ca_cmd->add_option("--init", ca.init, "white | black | none | checker | half");
  ca_cmd->add_option("--switch-at", ca.switch_at, "Tick at which the pattern takes over");
  ca_cmd->add_option("--ramp", ca.ramp, "Cross-fade length (0 = abrupt)");
  ca_cmd->add_option("--steps", ca.steps, "Number of ticks");
  ca_cmd->add_option("--frames-dir", ca.frames_dir, "Directory for frame_<t>.pgm");
  ca_cmd->add_option("--frame-every", ca.frame_every, "Frame interval");
  ca_cmd->add_flag("--amplify", ca.amplify, "Scale each frame so max |v| = 1");
  ca_cmd->add_option("--stabilize", ca.stabilize, "rms=<target>");
  ca_cmd->add_option("--stats", ca.stats, "Stats CSV path (default <frames-dir>/stats.csv, else stdout)");
  ca_cmd->add_option("--save-program", ca.save_program, "Also write the generated program file");
  auto* ca_seed_opt = ca_cmd->add_option("--seed", ca_seed, "Master seed");

  MorphArgs ma;
  std::uint64_t morph_seed = 0;
  auto* morph = app.add_subcommand("morph", "Run programs along the segment between two matrices");
  morph->add_option("path_a", ma.path_a, "Program at lambda = 0")->required();
  morph->add_option("path_b", ma.path_b, "Program at lambda = 1")->required();
  morph->add_option("--lambda-steps", ma.lambda_steps, "Number of lambda intervals K");
  morph->add_option("--steps", ma.steps, "Number of ticks")->required();
  morph->add_option("--watch", ma.watch, "Nodes to record");
  morph->add_option("--out-dir", ma.out_dir, "Output directory for lambda_<i>.csv");
  morph->add_option("--grid", ma.grid, "<width>x<height>: also write cell frames");
  morph->add_option("--frame-every", ma.frame_every, "Frame interval");
  morph->add_flag("--amplify", ma.amplify, "Scale each frame so max |v| = 1");
  auto* morph_seed_opt = morph->add_option("--seed", morph_seed, "Master seed");

  std::vector<std::string> argv_storage{"mmvm"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_storage) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kValidationError;
  }

  try {
    if (*validate) return cmd_validate(validate_path, out);
    if (*run_cmd) {
      if (*run_seed_opt) ra.seed = run_seed;
      return cmd_run(ra, out);
    }
    if (*ca_cmd) {
      if (*ca_seed_opt) ca.seed = ca_seed;
      return cmd_ca(ca, out);
    }
    if (*morph) {
      if (*morph_seed_opt) ma.seed = morph_seed;
      return cmd_morph(ma, out);
    }
  } catch (const CliFailure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kValidationError;
}

}  // namespace mmvm::cli
