#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>

#include "vexlab/concentration.hpp"
#include "vexlab/exponent.hpp"
#include "vexlab/extremal.hpp"
#include "vexlab/grid.hpp"

namespace vexlab {

// CSV writers. Every number goes through format_number so identical inputs
// give identical bytes.

/// cell,i,j,x,y,value
void write_cells_csv(std::ostream& out, const CellField& f);
void write_exponent_csv(std::ostream& out, const ExponentField& p);
/// i,j,x,y,value over the full node lattice (boundary rows are 0).
void write_function_csv(std::ostream& out, const GridFunction& u);
/// cell,i,j,x,y,mass
void write_measure_csv(std::ostream& out, const DiscreteMeasure& m);

void write_record_header(std::ostream& out);
void write_record_row(std::ostream& out, const ExtremalRecord& rec, bool failed = false);

/// eps,objective,grad_norm,iterations,converged,failed,conc_ratio,argmax_i,argmax_j,limit_estimate,classification
void write_sweep_csv(std::ostream& out, const SweepReport& report, const Grid& grid);

/// center_x,center_y,radius,value,quotient,iterations,extrapolation
void write_localized_csv(std::ostream& out, const LocalizedResult& result);

struct FuzzRow {
  std::uint64_t seed = 0;
  long samples = 0;
  double p_lo = 0.0;
  double p_hi = 0.0;
  double theta = 0.0;
  double empirical_constant = 0.0;
};
void write_fuzz_csv(std::ostream& out, std::span<const FuzzRow> rows);

/// Writes `body` to dir/name, throwing IoError on failure. Returns the path.
std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name, const std::string& body);

}  // namespace vexlab
