#pragma once

#include <iosfwd>
#include <string>

#include "ptcoord/milp/model.hpp"

namespace ptcoord::milp {

/// Free-format MPS. Rows and columns appear in model order; binaries are
/// declared with BV entries in BOUNDS; the objective constant is written as
/// the negated RHS of the objective row.
void write_mps(const Model& model, std::ostream& out, const std::string& name = "PTCOORD");
void write_mps(const Model& model, const std::string& path, const std::string& name = "PTCOORD");

/// Reader for the subset emitted by write_mps (no RANGES, no integer markers
/// other than BV bounds).
Model read_mps(std::istream& in);
Model read_mps_file(const std::string& path);

}  // namespace ptcoord::milp
