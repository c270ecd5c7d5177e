#include "vexlab/io.hpp"

#include <fstream>

#include "vexlab/format.hpp"

namespace vexlab {

namespace {

std::string num(double v) { return format_number(v); }

void cell_prefix(std::ostream& out, const Grid& g, std::size_t c) {
  const auto [i, j] = g.cell_index(c);
  const Point x = g.cell_center(c);
  out << c << ',' << i << ',' << j << ',' << num(x[0]) << ',' << num(g.dim() == 2 ? x[1] : 0.0);
}

}  // namespace

void write_cells_csv(std::ostream& out, const CellField& f) {
  out << "cell,i,j,x,y,value\n";
  for (std::size_t c = 0; c < f.size(); ++c) {
    cell_prefix(out, f.grid(), c);
    out << ',' << num(f[c]) << '\n';
  }
}

void write_exponent_csv(std::ostream& out, const ExponentField& p) {
  out << "cell,i,j,x,y,value\n";
  for (std::size_t c = 0; c < p.size(); ++c) {
    cell_prefix(out, p.grid(), c);
    out << ',' << num(p[c]) << '\n';
  }
}

void write_function_csv(std::ostream& out, const GridFunction& u) {
  const Grid& g = u.grid();
  out << "i,j,x,y,value\n";
  const int ny = g.dim() == 2 ? g.cells(1) : 0;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= g.cells(0); ++i) {
      const Point x = g.node_point(i, j);
      out << i << ',' << j << ',' << num(x[0]) << ',' << num(g.dim() == 2 ? x[1] : 0.0) << ',' << num(u.at(i, j))
          << '\n';
    }
  }
}

void write_measure_csv(std::ostream& out, const DiscreteMeasure& m) {
  out << "cell,i,j,x,y,mass\n";
  const auto masses = m.masses();
  for (std::size_t c = 0; c < masses.size(); ++c) {
    cell_prefix(out, m.grid(), c);
    out << ',' << num(masses[c]) << '\n';
  }
}

void write_record_header(std::ostream& out) {
  out << "eps,objective,grad_norm,iterations,restarts_used,best_restart,converged,critical,failed\n";
}

void write_record_row(std::ostream& out, const ExtremalRecord& rec, bool failed) {
  out << num(rec.eps) << ',' << num(rec.objective) << ',' << num(rec.grad_norm) << ',' << rec.iterations << ','
      << rec.restarts_used << ',' << rec.best_restart << ',' << (rec.converged ? 1 : 0) << ','
      << (rec.critical ? 1 : 0) << ',' << (failed ? 1 : 0) << '\n';
}

void write_sweep_csv(std::ostream& out, const SweepReport& report, const Grid& grid) {
  out << "eps,objective,grad_norm,iterations,converged,failed,conc_ratio,argmax_i,argmax_j,limit_estimate,"
         "classification\n";
  for (const auto& e : report.entries) {
    const auto [i, j] = grid.cell_index(e.argmax_cell);
    out << num(e.eps) << ',';
    if (e.record)
      out << num(e.record->objective) << ',' << num(e.record->grad_norm) << ',' << e.record->iterations << ','
          << (e.record->converged ? 1 : 0);
    else
      out << "nan,nan,0,0";
    out << ',' << (e.failed ? 1 : 0) << ',' << num(e.conc_ratio) << ',' << i << ',' << j << ','
        << num(report.limit.limit) << ',' << to_string(report.dichotomy.classification) << '\n';
  }
}

void write_localized_csv(std::ostream& out, const LocalizedResult& result) {
  out << "center_x,center_y,radius,value,quotient,iterations,extrapolation\n";
  for (const auto& e : result.entries)
    out << num(result.center[0]) << ',' << num(result.center[1]) << ',' << num(e.radius) << ',' << num(e.value)
        << ',' << num(e.quotient) << ',' << e.record.iterations << ',' << num(result.extrapolation.limit) << '\n';
}

void write_fuzz_csv(std::ostream& out, std::span<const FuzzRow> rows) {
  out << "seed,samples,p_lo,p_hi,theta,empirical_constant\n";
  for (const auto& r : rows)
    out << r.seed << ',' << r.samples << ',' << num(r.p_lo) << ',' << num(r.p_hi) << ',' << num(r.theta) << ','
        << num(r.empirical_constant) << '\n';
}

std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name, const std::string& body) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
  const auto path = dir / name;
  std::ofstream f(path, std::ios::binary);
  f << body;
  f.close();
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return path;
}

}  // namespace vexlab
