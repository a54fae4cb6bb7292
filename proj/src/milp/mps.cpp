#include "ptcoord/milp/mps.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "ptcoord/error.hpp"

namespace ptcoord::milp {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string objective_row_name(const Model& model) {
  std::string name = "OBJ";
  while (model.find_constraint(name) >= 0) name += "_";
  return name;
}

}  // namespace

void write_mps(const Model& model, std::ostream& out, const std::string& name) {
  const std::string obj = objective_row_name(model);
  out << "NAME " << name << "\n";
  out << "ROWS\n";
  out << " N " << obj << "\n";
  for (const Constraint& r : model.constraints()) {
    const char* tag = r.sense == RowSense::LessEqual ? "L" : r.sense == RowSense::GreaterEqual ? "G" : "E";
    out << " " << tag << " " << r.name << "\n";
  }

  std::vector<std::vector<std::pair<int, double>>> cols(model.num_vars());
  for (int i = 0; i < model.num_rows(); ++i)
    for (const Term& t : model.constraint(i).terms) cols[t.var].emplace_back(i, t.coef);
  const std::vector<double> c = model.objective_coefficients();

  out << "COLUMNS\n";
  for (int j = 0; j < model.num_vars(); ++j) {
    const std::string& vn = model.variable(j).name;
    if (c[j] != 0.0) out << " " << vn << " " << obj << " " << num(c[j]) << "\n";
    for (auto [i, a] : cols[j]) out << " " << vn << " " << model.constraint(i).name << " " << num(a) << "\n";
    if (c[j] == 0.0 && cols[j].empty()) out << " " << vn << " " << obj << " 0\n";
  }

  out << "RHS\n";
  if (model.objective_constant() != 0.0) out << " RHS " << obj << " " << num(-model.objective_constant()) << "\n";
  for (const Constraint& r : model.constraints())
    if (r.rhs != 0.0) out << " RHS " << r.name << " " << num(r.rhs) << "\n";

  out << "BOUNDS\n";
  for (const Variable& v : model.variables()) {
    if (v.kind == VarKind::Binary) {
      out << " BV BND " << v.name << "\n";
      if (v.lower == v.upper) out << " FX BND " << v.name << " " << num(v.lower) << "\n";
      continue;
    }
    const bool has_lo = std::isfinite(v.lower), has_up = std::isfinite(v.upper);
    if (has_lo && has_up && v.lower == v.upper) {
      out << " FX BND " << v.name << " " << num(v.lower) << "\n";
    } else if (!has_lo && !has_up) {
      out << " FR BND " << v.name << "\n";
    } else {
      if (!has_lo)
        out << " MI BND " << v.name << "\n";
      else if (v.lower != 0.0)
        out << " LO BND " << v.name << " " << num(v.lower) << "\n";
      if (has_up) out << " UP BND " << v.name << " " << num(v.upper) << "\n";
    }
  }
  out << "ENDATA\n";
}

void write_mps(const Model& model, const std::string& path, const std::string& name) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  write_mps(model, f, name);
  if (!f) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

Model read_mps(std::istream& in) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  enum class Section { None, Rows, Columns, Rhs, Bounds, Done } section = Section::None;
  std::string obj_name;
  std::vector<std::string> row_names;
  std::vector<RowSense> senses;
  std::unordered_map<std::string, int> row_index;
  std::vector<std::string> col_names;
  std::unordered_map<std::string, int> col_index;
  std::vector<std::vector<Term>> row_terms;
  std::vector<double> rhs, obj_coef, lower, upper;
  std::vector<VarKind> kinds;
  double obj_const = 0.0;

  auto column = [&](const std::string& name) {
    auto it = col_index.find(name);
    if (it != col_index.end()) return it->second;
    const int j = static_cast<int>(col_names.size());
    col_index.emplace(name, j);
    col_names.push_back(name);
    obj_coef.push_back(0.0);
    lower.push_back(0.0);
    upper.push_back(kInf);
    kinds.push_back(VarKind::Continuous);
    return j;
  };
  auto parse_error = [](int line, const std::string& msg) {
    fail(ErrorKind::Validation, "MPS line " + std::to_string(line) + ": " + msg);
  };
  int line_no = 0;
  auto number = [&](const std::string& tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) parse_error(line_no, "bad number '" + tok + "'");
    return v;
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '*') continue;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (line[0] != ' ' && line[0] != '\t') {
      const std::string& s = tok[0];
      if (s == "NAME") section = Section::None;
      else if (s == "ROWS") section = Section::Rows;
      else if (s == "COLUMNS") section = Section::Columns;
      else if (s == "RHS") section = Section::Rhs;
      else if (s == "BOUNDS") section = Section::Bounds;
      else if (s == "ENDATA") { section = Section::Done; break; }
      else parse_error(line_no, "unsupported section '" + s + "'");
      continue;
    }
    switch (section) {
      case Section::Rows: {
        if (tok.size() != 2) parse_error(line_no, "malformed ROWS entry");
        if (tok[0] == "N") {
          if (obj_name.empty()) obj_name = tok[1];
          continue;
        }
        RowSense sense;
        if (tok[0] == "L") sense = RowSense::LessEqual;
        else if (tok[0] == "G") sense = RowSense::GreaterEqual;
        else if (tok[0] == "E") sense = RowSense::Equal;
        else parse_error(line_no, "unknown row type '" + tok[0] + "'");
        row_index.emplace(tok[1], static_cast<int>(row_names.size()));
        row_names.push_back(tok[1]);
        senses.push_back(sense);
        row_terms.emplace_back();
        rhs.push_back(0.0);
        break;
      }
      case Section::Columns: {
        if (tok.size() != 3 && tok.size() != 5) parse_error(line_no, "malformed COLUMNS entry");
        const int j = column(tok[0]);
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          const double v = number(tok[k + 1]);
          if (tok[k] == obj_name) {
            obj_coef[j] += v;
            continue;
          }
          auto it = row_index.find(tok[k]);
          if (it == row_index.end()) parse_error(line_no, "unknown row '" + tok[k] + "'");
          row_terms[it->second].push_back({j, v});
        }
        break;
      }
      case Section::Rhs: {
        if (tok.size() != 3 && tok.size() != 5) parse_error(line_no, "malformed RHS entry");
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          const double v = number(tok[k + 1]);
          if (tok[k] == obj_name) {
            obj_const = -v;
            continue;
          }
          auto it = row_index.find(tok[k]);
          if (it == row_index.end()) parse_error(line_no, "unknown row '" + tok[k] + "'");
          rhs[it->second] = v;
        }
        break;
      }
      case Section::Bounds: {
        if (tok.size() < 3) parse_error(line_no, "malformed BOUNDS entry");
        const std::string& type = tok[0];
        const int j = column(tok[2]);
        const bool needs_value = type == "LO" || type == "UP" || type == "FX";
        if (needs_value && tok.size() < 4) parse_error(line_no, "bound without value");
        const double v = needs_value ? number(tok[3]) : 0.0;
        if (type == "LO") lower[j] = v;
        else if (type == "UP") upper[j] = v;
        else if (type == "FX") lower[j] = upper[j] = v;
        else if (type == "FR") { lower[j] = -kInf; upper[j] = kInf; }
        else if (type == "MI") lower[j] = -kInf;
        else if (type == "PL") upper[j] = kInf;
        else if (type == "BV") { kinds[j] = VarKind::Binary; lower[j] = 0.0; upper[j] = 1.0; }
        else parse_error(line_no, "unsupported bound type '" + type + "'");
        break;
      }
      default: parse_error(line_no, "data outside a section");
    }
  }
  if (section != Section::Done) parse_error(line_no, "missing ENDATA");

  Model model;
  for (std::size_t j = 0; j < col_names.size(); ++j) model.add_variable(col_names[j], lower[j], upper[j], kinds[j]);
  for (std::size_t i = 0; i < row_names.size(); ++i) {
    LinExpr e;
    for (const Term& t : row_terms[i]) e.add(t.var, t.coef);
    model.add_constraint(row_names[i], e, senses[i], rhs[i]);
  }
  LinExpr objective(obj_const);
  for (std::size_t j = 0; j < col_names.size(); ++j) objective.add(static_cast<int>(j), obj_coef[j]);
  model.set_objective(objective);
  return model;
}

Model read_mps_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::Io, "cannot open '" + path + "'");
  return read_mps(f);
}

}  // namespace ptcoord::milp
