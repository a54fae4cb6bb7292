#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ptcoord/error.hpp"
#include "ptcoord/mechanism.hpp"
#include "ptcoord/milp/mps.hpp"

namespace py = pybind11;
using namespace ptcoord;

namespace {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::SolverLimit: return "solver_limit";
    case ErrorKind::Io: return "io";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Numerical: return "numerical";
  }
  return "unknown";
}

py::dict traffic_dict(const TrafficDecision& t) {
  py::dict d;
  d["path_flow"] = t.path_flow;
  d["road_flow"] = t.road_flow;
  d["station_flow"] = t.station_flow;
  d["road_toll"] = t.road_toll;
  d["station_fee"] = t.station_fee;
  d["od_cost"] = t.od_cost;
  d["charging_load"] = t.charging_load;
  d["gamma"] = t.gamma;
  return d;
}

py::dict dispatch_dict(const DispatchDecision& x) {
  py::dict d;
  d["output"] = x.output;
  d["cost"] = x.cost;
  d["line_flow"] = x.line_flow;
  d["angle"] = x.angle;
  d["eta"] = x.eta;
  return d;
}

py::dict point_dict(const SweepPoint& p) {
  py::dict d;
  d["alpha"] = p.alpha;
  d["gamma"] = p.gamma;
  d["eta"] = p.eta;
  d["delta_eta"] = p.delta_eta;
  d["delta_gamma"] = p.delta_gamma;
  d["psi"] = p.psi;
  d["h"] = p.h;
  d["overall"] = p.overall;
  d["tn_net_profit"] = p.tn_net_profit;
  d["pdn_net_profit"] = p.pdn_net_profit;
  d["status"] = milp::to_string(p.status);
  d["accepted"] = p.accepted;
  d["note"] = p.note;
  d["gap"] = p.gap;
  d["nodes"] = p.nodes;
  d["eta_oracle"] = p.eta_oracle;
  d["loads"] = p.loads;
  d["traffic"] = traffic_dict(p.traffic);
  d["dispatch"] = dispatch_dict(p.dispatch);
  return d;
}

py::dict pre_dict(const PreScheduleResult& r) {
  py::dict d;
  d["gamma0"] = r.gamma0;
  d["eta0"] = r.eta0;
  d["loads"] = r.loads;
  d["traffic"] = traffic_dict(r.traffic);
  d["dispatch"] = dispatch_dict(r.dispatch);
  d["wardrop_ok"] = r.wardrop.ok();
  d["big_m_clean"] = r.big_m.clean();
  d["fill_order_ok"] = r.fill_order_ok;
  return d;
}

// Instance plus its path set, built once and reused by every call.
struct Case {
  CoupledInstance inst;
  PathSet paths;

  Case(CoupledInstance i, int k) : inst(std::move(i)) { paths = enumerate_paths(inst, k > 0 ? k : inst.params.paths_k); }
};

MechanismOptions options(double gap, long node_limit) {
  MechanismOptions o;
  o.milp.gap_tol = gap;
  o.milp.node_limit = node_limit;
  return o;
}

}  // namespace

PYBIND11_MODULE(_ptcoord, m) {
  m.doc() = "Coupled traffic and distribution network coordination";

  // Messages carry the error kind as a prefix, e.g. "infeasible: ...".
  // Held for the life of the interpreter.
  static py::handle exc = py::exception<Error>(m, "PtcoordError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(exc.ptr(), (std::string(kind_name(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<Case>(m, "Case")
      .def_static(
          "load", [](const std::string& path, int k) { return Case(load_instance(path), k); }, py::arg("path"),
          py::arg("paths_k") = 0)
      .def_static(
          "from_json", [](const std::string& text, int k) { return Case(parse_instance(text), k); }, py::arg("text"),
          py::arg("paths_k") = 0)
      .def_property_readonly("name", [](const Case& c) { return c.inst.name; })
      .def_property_readonly("counts",
                             [](const Case& c) {
                               py::dict d;
                               d["nodes"] = c.inst.nodes.size();
                               d["roads"] = c.inst.roads.size();
                               d["evcs"] = c.inst.evcs.size();
                               d["od_pairs"] = c.inst.od_pairs.size();
                               d["buses"] = c.inst.buses.size();
                               d["lines"] = c.inst.lines.size();
                               d["generators"] = c.inst.generators.size();
                               d["paths"] = c.paths.paths.size();
                               return d;
                             })
      .def(
          "pre_schedule",
          [](const Case& c, double gap, long nodes) {
            PreScheduleResult r;
            {
              py::gil_scoped_release release;
              r = pre_schedule(c.inst, c.paths, options(gap, nodes));
            }
            return pre_dict(r);
          },
          py::arg("gap") = 1e-6, py::arg("node_limit") = 500000)
      .def(
          "sweep",
          [](const Case& c, const std::vector<double>& grid, double gap, long nodes) {
            SweepResult r;
            {
              py::gil_scoped_release release;
              r = sweep(c.inst, c.paths, grid, options(gap, nodes));
            }
            py::dict d;
            d["pre"] = pre_dict(r.pre);
            py::list pts;
            for (const SweepPoint& p : r.points) pts.append(point_dict(p));
            d["points"] = pts;
            try {
              d["alpha_star"] = r.points[select_alpha_star(r.points)].alpha;
            } catch (const Error&) {
              d["alpha_star"] = py::none();
            }
            return d;
          },
          py::arg("grid"), py::arg("gap") = 1e-6, py::arg("node_limit") = 500000)
      .def(
          "export_mps",
          [](const Case& c, double alpha, const std::string& path) {
            const PreScheduleResult pre = pre_schedule(c.inst, c.paths);
            const SingleLevel sl = assemble_single_level(c.inst, c.paths, alpha, pre.eta0);
            milp::write_mps(sl.model, path, "RESCHED");
          },
          py::arg("alpha"), py::arg("path"));

  m.def("alpha_grid", &make_alpha_grid, py::arg("first") = 0.0, py::arg("last") = 1.0, py::arg("step") = 0.05);
}
