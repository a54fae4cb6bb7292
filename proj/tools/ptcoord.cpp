#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ptcoord/error.hpp"
#include "ptcoord/kkt.hpp"
#include "ptcoord/mechanism.hpp"
#include "ptcoord/milp/mps.hpp"
#include "ptcoord/network.hpp"
#include "ptcoord/report.hpp"

namespace fs = std::filesystem;
using namespace ptcoord;

namespace {

struct RunConfig {
  std::string instance;
  std::string out = "out";
  std::string grid = "0:1:0.05";
  double alpha = 0.2;
  int paths_k = 0;
  int segments_n = 0;
  int cost_segments = 0;
  double gap = 1e-6;
  long node_limit = 500000;
  bool timing = true;
  bool verbose = false;
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Validation: return 1;
    case ErrorKind::Infeasible: return 2;
    case ErrorKind::SolverLimit: return 3;
    case ErrorKind::Io: return 4;
    case ErrorKind::Domain: return 1;
    case ErrorKind::Numerical: return 3;
  }
  return 1;
}

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

CoupledInstance load(const RunConfig& c) {
  CoupledInstance inst = load_instance(c.instance);
  if (c.paths_k > 0) inst.params.paths_k = c.paths_k;
  if (c.segments_n > 0) inst.params.road_segments = c.segments_n;
  if (c.cost_segments > 0) inst.params.cost_segments = c.cost_segments;
  validate_instance(inst);
  return inst;
}

MechanismOptions options(const RunConfig& c) {
  MechanismOptions o;
  o.milp.gap_tol = c.gap;
  o.milp.node_limit = c.node_limit;
  if (c.verbose) o.milp.log_interval = 1000;
  return o;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      fail(ErrorKind::Validation, "--alpha-grid: bad number '" + tok + "'");
    }
  }
  if (parts.size() != 3) fail(ErrorKind::Validation, "--alpha-grid expects a:b:step");
  return make_alpha_grid(parts[0], parts[1], parts[2]);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create output directory '" + dir + "': " + ec.message());
}

std::string in_dir(const std::string& dir, const std::string& file) { return (fs::path(dir) / file).string(); }

template <class F>
std::string render(F&& f) {
  std::ostringstream s;
  f(s);
  return s.str();
}

int cmd_validate(const RunConfig& c) {
  const CoupledInstance inst = load(c);
  const PathSet ps = enumerate_paths(inst, inst.params.paths_k);
  int ev = 0;
  for (const PathAlt& p : ps.paths) ev += p.cls == VehicleClass::Ev;
  std::cout << "instance " << inst.name << ": ok\n"
            << "  nodes " << inst.nodes.size() << ", roads " << inst.roads.size() << ", evcs " << inst.evcs.size()
            << ", od_pairs " << inst.od_pairs.size() << "\n"
            << "  buses " << inst.buses.size() << ", lines " << inst.lines.size() << ", generators "
            << inst.generators.size() << "\n"
            << "  path alternatives " << ps.paths.size() << " (GV " << ps.paths.size() - ev << ", EV " << ev
            << ", K " << ps.k << ")\n";
  return 0;
}

void write_decisions(const std::string& dir, const std::string& tag, const CoupledInstance& inst, const PathSet& ps,
                     const TrafficDecision& t, const DispatchDecision& d) {
  write_file(in_dir(dir, "loads_" + tag + ".csv"), render([&](std::ostream& o) { write_loads_csv(o, inst, t); }));
  write_file(in_dir(dir, "gen_" + tag + ".csv"), render([&](std::ostream& o) { write_gen_csv(o, inst, d); }));
  write_file(in_dir(dir, "flows_" + tag + ".csv"), render([&](std::ostream& o) { write_flows_csv(o, inst, ps, t); }));
}

int cmd_pre(const RunConfig& c) {
  const CoupledInstance inst = load(c);
  const PathSet ps = enumerate_paths(inst, inst.params.paths_k);
  ensure_dir(c.out);
  const PreScheduleResult r = pre_schedule(inst, ps, options(c));
  write_decisions(c.out, "baseline", inst, ps, r.traffic, r.dispatch);
  std::cout << "gamma0 " << g6(r.gamma0) << " CNY/h\n"
            << "eta0   " << g6(r.eta0) << " CNY/h\n"
            << "wardrop " << (r.wardrop.ok() ? "ok" : "VIOLATED") << ", big-M audit "
            << (r.big_m.clean() ? "clean" : "flagged") << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& c) {
  const CoupledInstance inst = load(c);
  const std::vector<double> grid = parse_grid(c.grid);
  const PathSet ps = enumerate_paths(inst, inst.params.paths_k);
  ensure_dir(c.out);
  const MechanismOptions opt = options(c);
  const SweepResult res = sweep(inst, ps, grid, opt, [&](const SweepPoint& p) {
    std::cerr << "alpha " << g6(p.alpha) << ": " << (p.accepted ? "optimal" : "flagged") << ", psi " << g6(p.psi)
              << (p.note.empty() ? "" : " (" + p.note + ")") << "\n";
  });
  write_decisions(c.out, "baseline", inst, ps, res.pre.traffic, res.pre.dispatch);
  write_file(in_dir(c.out, "sweep.csv"),
             render([&](std::ostream& o) { write_sweep_csv(o, res.points, CsvOptions{c.timing}); }));
  for (const SweepPoint& p : res.points)
    if (p.status == milp::SolveStatus::Optimal || p.status == milp::SolveStatus::GapLimit)
      write_decisions(c.out, "alpha_" + alpha_label(p.alpha), inst, ps, p.traffic, p.dispatch);

  std::cout << "gamma0 " << g6(res.pre.gamma0) << "  eta0 " << g6(res.pre.eta0) << "\n";
  const std::size_t best = select_alpha_star(res.points);
  std::cout << "alpha* " << g6(res.points[best].alpha) << "  psi " << g6(res.points[best].psi) << "\n";
  const Diagnostics d = diagnostics(res.points, static_cast<int>(inst.generators.size()));
  std::cout << "overall cost nonincreasing up to plateau: " << (d.overall_nonincreasing ? "yes" : "no") << "\n";
  if (d.plateau_index >= 0)
    std::cout << "plateau from alpha " << g6(d.plateau_alpha) << ", max local generation " << g6(d.max_local_generation)
              << " MW\n";
  else
    std::cout << "no plateau detected\n";
  return 0;
}

int cmd_export_mps(const RunConfig& c) {
  const CoupledInstance inst = load(c);
  const PathSet ps = enumerate_paths(inst, inst.params.paths_k);
  ensure_dir(c.out);
  const PreScheduleResult pre = pre_schedule(inst, ps, options(c));
  const SingleLevel sl = assemble_single_level(inst, ps, c.alpha, pre.eta0);
  const std::string path = in_dir(c.out, "single_level_alpha_" + alpha_label(c.alpha) + ".mps");
  milp::write_mps(sl.model, path, "RESCHED");
  std::cout << path << ": " << sl.model.num_vars() << " columns, " << sl.model.num_rows() << " rows, "
            << sl.model.num_binaries() << " binaries\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Profit-sharing coordination of traffic and power distribution networks"};
  app.require_subcommand(1);
  RunConfig c;

  auto common = [&](CLI::App* s) {
    s->add_option("--instance", c.instance, "instance JSON")->required()->check(CLI::ExistingFile);
    s->add_option("--paths-k", c.paths_k, "path alternatives per O-D pair and class")->check(CLI::Range(1, 50));
    s->add_option("--segments-n", c.segments_n, "PWL segments per delay curve")->check(CLI::Range(1, 100));
    s->add_option("--cost-segments", c.cost_segments, "PWL segments per generator cost")->check(CLI::Range(1, 50));
  };
  auto solve = [&](CLI::App* s) {
    s->add_option("--out", c.out, "output directory")->capture_default_str();
    s->add_option("--gap", c.gap, "relative MILP gap")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    s->add_option("--node-limit", c.node_limit, "branch-and-bound node limit")
        ->check(CLI::Range(1L, 100000000L))
        ->capture_default_str();
    s->add_flag("--verbose", c.verbose, "log branch-and-bound progress");
  };

  CLI::App* validate = app.add_subcommand("validate", "check an instance and print counts");
  common(validate);
  CLI::App* pre = app.add_subcommand("pre", "baseline traffic assignment and dispatch");
  common(pre);
  solve(pre);
  CLI::App* sw = app.add_subcommand("sweep", "re-scheduling sweep over the sharing ratio");
  common(sw);
  solve(sw);
  sw->add_option("--alpha-grid", c.grid, "a:b:step")->capture_default_str();
  sw->add_flag("!--no-timing", c.timing, "write 0 in wall_seconds for byte-identical output");
  CLI::App* mps = app.add_subcommand("export-mps", "write the single-level model for one sharing ratio");
  common(mps);
  solve(mps);
  mps->add_option("--alpha", c.alpha, "sharing ratio")->check(CLI::Range(0.0, 1.0))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*validate) return cmd_validate(c);
    if (*pre) return cmd_pre(c);
    if (*sw) return cmd_sweep(c);
    if (*mps) return cmd_export_mps(c);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 1;
}
