#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ptcoord/mechanism.hpp"

namespace ptcoord {

/// Column order of sweep.csv.
extern const std::vector<std::string> kSweepColumns;

struct CsvOptions {
  bool timing = true;  // false writes 0 for wall_seconds so files are byte-identical across runs
};

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points, const CsvOptions& opt = {});
/// evcs_id, y (traffic p.u.), p_evcs (MW)
void write_loads_csv(std::ostream& out, const CoupledInstance& inst, const TrafficDecision& traffic);
/// unit, output (MW), F (CNY/h)
void write_gen_csv(std::ostream& out, const CoupledInstance& inst, const DispatchDecision& dispatch);
/// alternative, od_id, class, evcs_id, roads, flow, cost, od_cost
void write_flows_csv(std::ostream& out, const CoupledInstance& inst, const PathSet& ps, const TrafficDecision& traffic);

/// Full-precision number formatting used by every CSV.
std::string csv_number(double v);
/// Short alpha label used in file names (e.g. 0.25).
std::string alpha_label(double alpha);

void write_file(const std::string& path, const std::string& content);

}  // namespace ptcoord
