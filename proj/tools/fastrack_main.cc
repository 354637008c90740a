#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fastrack/config.h"
#include "fastrack/error.h"
#include "fastrack/sim.h"
#include "fastrack/vf_io.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace fastrack;

namespace {

constexpr int kExitError = 1;
constexpr int kExitUnsafe = 3;

using Clock = std::chrono::steady_clock;

double Since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
}

std::string ExtentsCsv(const TrackingBound& tb, const TebQuery& q) {
  const RelativeSystem& rel = tb.system();
  const auto names = rel.state_names();
  std::string csv = "tau";
  for (std::size_t d : rel.error_dims) csv += ",half_width_" + names[d];
  csv += ",position_radius,touches_boundary\n";
  for (const TebExtents& e : ExtentTable(tb, q)) {
    csv += Fmt(e.tau);
    for (double h : e.half_width) csv += "," + Fmt(h);
    csv += "," + Fmt(e.position_radius);
    csv += e.touches_boundary ? ",1\n" : ",0\n";
  }
  return csv;
}

int Precompute(const std::string& config_path) {
  const RunConfig cfg = LoadConfig(config_path);
  const ModelInstance model = cfg.Model();
  const auto parts = cfg.Parts(model);
  if (cfg.value_files.size() != parts.size()) {
    throw Error(ErrorCode::kSchema,
                "value_files: precompute needs one output path per system");
  }
  std::vector<Grid> grids = cfg.grids;
  if (grids.empty()) {
    for (const auto& [name, sys] : parts) grids.push_back(DefaultGrid(sys));
  }
  const auto t0 = Clock::now();
  std::vector<ValueFunction> vfs;
  if (cfg.decompose) {
    vfs = solve_decomposed(model.subsystems, grids, cfg.solver).parts;
  } else {
    vfs.push_back(solve_hjvi(model.system, grids[0], cfg.solver));
  }
  const double seconds = Since(t0);
  double peak = 0.0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const ValueFunction& vf = vfs[k];
    const double nodes = static_cast<double>(vf.grid.num_nodes());
    const double bytes =
        nodes * 8.0 *
        (static_cast<double>(vf.values.size()) + 4.0 +
         static_cast<double>(parts[k].second.dim()) * 4.0);
    peak = std::max(peak, bytes);
    SaveValueFunction(cfg.value_files[k], MakeHeader(vf, model, parts[k].first),
                      vf);
    std::cout << "part " << (parts[k].first.empty() ? "-" : parts[k].first)
              << ": nodes " << vf.grid.num_nodes() << ", steps " << vf.steps
              << ", " << (vf.converged ? "converged" : "horizon reached")
              << " at " << vf.times.back() << ", V_min " << vf.min_value
              << ", epsilon " << vf.epsilon << " -> " << cfg.value_files[k]
              << "\n";
  }
  std::cout << "wall time " << seconds << " s, peak memory estimate "
            << peak / (1 << 20) << " MiB\n";
  const TrackingBound tb =
      cfg.decompose ? TrackingBound(model.system, model.subsystems, vfs)
                    : TrackingBound(model.system, vfs[0]);
  const TebQuery q = tb.Query(cfg.epsilon);
  std::cout << "TEB level " << q.level << " (V_min " << tb.min_value()
            << ", epsilon " << q.epsilon << ")\n";
  std::cout << ExtentsCsv(tb, q);
  return 0;
}

int Info(const std::string& path) {
  VfReader reader(path);
  const VfHeader& h = reader.header();
  std::cout << "model " << h.model << "\n"
            << "part " << (h.part.empty() ? "-" : h.part) << "\n"
            << "system " << h.system_id << "\n"
            << "error " << h.error_id << "\n"
            << "param_hash " << std::hex << h.param_hash << std::dec << "\n"
            << "version " << h.version << "\n";
  for (std::size_t d = 0; d < h.grid.ndims(); ++d) {
    const GridDim& g = h.grid.dim(d);
    std::cout << "dim " << d << ": [" << g.lo << ", " << g.hi << "] x "
              << g.nodes << (g.periodic ? " periodic" : "") << "\n";
  }
  std::cout << "snapshots " << h.times.size()
            << (h.converged ? " converged" : " not-converged") << "\n"
            << "steps " << h.steps << "\n"
            << "V_min " << Fmt(h.min_value) << "\n"
            << "epsilon " << Fmt(h.epsilon) << "\n";
  const double level = h.min_value + h.epsilon;
  std::vector<double> values;
  std::vector<std::size_t> idx(h.grid.ndims());
  std::cout << "horizon,min";
  for (std::size_t d = 0; d < h.grid.ndims(); ++d) {
    std::cout << ",half_width_" << d;
  }
  std::cout << "\n";
  for (std::size_t k = 0; reader.Next(values); ++k) {
    std::vector<double> hw(h.grid.ndims(), -1.0);
    double lo = INFINITY;
    for (std::size_t n = 0; n < values.size(); ++n) {
      lo = std::min(lo, values[n]);
      if (values[n] > level) continue;
      h.grid.Unflatten(n, idx);
      for (std::size_t d = 0; d < h.grid.ndims(); ++d) {
        hw[d] = std::max(hw[d], std::abs(h.grid.coord(d, idx[d])));
      }
    }
    std::cout << Fmt(h.times[k]) << "," << Fmt(lo);
    for (double w : hw) std::cout << "," << (w < 0 ? std::string("nan") : Fmt(w));
    std::cout << "\n";
  }
  return 0;
}

int Simulate(const std::string& config_path, const std::string& out_dir) {
  const RunConfig cfg = LoadConfig(config_path);
  if (!cfg.has_scenario) {
    throw Error(ErrorCode::kSchema, "config: simulate needs a 'scenario'");
  }
  const ModelInstance model = cfg.Model();
  const TrackingBound tb = LoadBound(cfg, model);
  auto planner = MakePlanner(cfg.planner, model.system.planning);
  fs::create_directories(out_dir);
  SimLog log;
  int code = 0;
  try {
    log = run_online(tb, *planner, cfg.scenario, &log);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kPlannerStuck) throw;
    std::cerr << "error: " << e.what() << "\n";
    code = kExitError;
  }
  std::ostringstream csv;
  WriteCsv(log, csv);
  WriteText((fs::path(out_dir) / "log.csv").string(), csv.str());
  const SimSummary m = metrics(log);
  const std::string json = SummaryJson(m);
  WriteText((fs::path(out_dir) / "summary.json").string(), json + "\n");
  std::cout << json << "\n";
  if (m.teb_violations > 0 || m.collisions > 0 || m.out_of_bounds > 0) {
    return kExitUnsafe;
  }
  return code;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

int ExportSlice(const std::string& file, const std::vector<std::size_t>& dims,
                const std::vector<std::string>& at, std::size_t snapshot,
                std::ostream& out) {
  VfHeader h;
  const ValueFunction vf = LoadValueFunction(file, &h);
  const Grid& g = vf.grid;
  if (dims.size() != 2 || dims[0] == dims[1] || dims[0] >= g.ndims() ||
      dims[1] >= g.ndims()) {
    throw Error(ErrorCode::kInvalidArgument,
                "--dims needs two distinct grid dimensions");
  }
  if (snapshot >= vf.values.size()) {
    throw Error(ErrorCode::kInvalidArgument, "--snapshot out of range");
  }
  std::vector<double> x(g.ndims(), 0.0);
  for (const std::string& a : at) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "--at expects dim=value");
    }
    const std::size_t d = std::stoul(a.substr(0, eq));
    if (d >= g.ndims()) {
      throw Error(ErrorCode::kInvalidArgument, "--at dimension out of range");
    }
    x[d] = std::stod(a.substr(eq + 1));
  }
  for (std::size_t d = 0; d < g.ndims(); ++d) {
    if (d == dims[0] || d == dims[1] || g.dim(d).periodic) continue;
    if (x[d] < g.dim(d).lo || x[d] > g.dim(d).hi) {
      throw Error(ErrorCode::kOutOfDomain,
                  "slice coordinate of dimension " + std::to_string(d) +
                      " lies off the grid",
                  d);
    }
  }
  out << "x" << dims[0] << ",x" << dims[1] << ",value\n";
  for (std::size_t i = 0; i < g.dim(dims[0]).nodes; ++i) {
    for (std::size_t j = 0; j < g.dim(dims[1]).nodes; ++j) {
      x[dims[0]] = g.coord(dims[0], i);
      x[dims[1]] = g.coord(dims[1], j);
      out << Fmt(x[dims[0]]) << "," << Fmt(x[dims[1]]) << ","
          << Fmt(interpolate(g, vf.values[snapshot], x)) << "\n";
    }
  }
  return 0;
}

int ExportLog(const std::string& in_path, std::ostream& out) {
  std::ifstream in(in_path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + in_path);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kCorruptFile, in_path + " is empty");
  }
  const auto header = SplitCsvLine(line);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  while (std::getline(in, line)) {
    const auto cells = SplitCsvLine(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kCorruptFile, "row width differs from header");
    }
    nlohmann::ordered_json row;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (header[k] == "mode") {
        row[header[k]] = cells[k];
      } else if (cells[k].empty()) {
        row[header[k]] = nullptr;
      } else {
        const double v = std::stod(cells[k]);
        row[header[k]] = std::isfinite(v) ? nlohmann::ordered_json(v)
                                          : nlohmann::ordered_json(nullptr);
      }
    }
    rows.push_back(std::move(row));
  }
  out << rows.dump(1) << "\n";
  return 0;
}

template <typename Fn>
int Guard(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

// Writes to a file when a path is given, else to stdout.
template <typename Fn>
int WithOutput(const std::string& path, Fn&& fn) {
  if (path.empty()) return fn(std::cout);
  std::ostringstream os;
  const int code = fn(os);
  WriteText(path, os.str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline tracking error bounds and online planning."};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::string file;
  std::string out_path;
  std::string in_path;
  std::vector<std::size_t> dims;
  std::vector<std::string> at;
  std::size_t snapshot = 0;

  auto* pre = app.add_subcommand("precompute", "Solve and store value functions");
  pre->add_option("--config", config, "Run config (JSON)")->required();

  auto* info = app.add_subcommand("info", "Summarize a value function file");
  info->add_option("file", file, "Value function file")->required();

  auto* sim = app.add_subcommand("simulate", "Run the online loop");
  sim->add_option("--config", config, "Run config (JSON)")->required();
  sim->add_option("--out", out_dir, "Output directory")->required();

  auto* exp = app.add_subcommand("export", "Export slices, extents or logs");
  exp->require_subcommand(1);
  auto* slice = exp->add_subcommand("slice", "2D value function slice as CSV");
  slice->add_option("--file", file, "Value function file")->required();
  slice->add_option("--dims", dims, "Two grid dimensions")
      ->required()
      ->delimiter(',');
  slice->add_option("--at", at, "Fixed coordinates, dim=value");
  slice->add_option("--snapshot", snapshot, "Snapshot index");
  slice->add_option("--out", out_path, "Output file");
  auto* ext = exp->add_subcommand("extents", "Extents per lookahead as CSV");
  ext->add_option("--config", config, "Run config (JSON)")->required();
  ext->add_option("--out", out_path, "Output file");
  auto* logx = exp->add_subcommand("log", "Simulation CSV log as JSON rows");
  logx->add_option("--in", in_path, "log.csv from simulate")->required();
  logx->add_option("--out", out_path, "Output file");

  CLI11_PARSE(app, argc, argv);

  if (*pre) return Guard([&] { return Precompute(config); });
  if (*info) return Guard([&] { return Info(file); });
  if (*sim) return Guard([&] { return Simulate(config, out_dir); });
  if (*slice) {
    return Guard([&] {
      return WithOutput(out_path, [&](std::ostream& os) {
        return ExportSlice(file, dims, at, snapshot, os);
      });
    });
  }
  if (*ext) {
    return Guard([&] {
      const RunConfig cfg = LoadConfig(config);
      const ModelInstance model = cfg.Model();
      const TrackingBound tb = LoadBound(cfg, model);
      return WithOutput(out_path, [&](std::ostream& os) {
        os << ExtentsCsv(tb, tb.Query(cfg.epsilon));
        return 0;
      });
    });
  }
  if (*logx) {
    return Guard([&] {
      return WithOutput(out_path,
                        [&](std::ostream& os) { return ExportLog(in_path, os); });
    });
  }
  return kExitError;
}
