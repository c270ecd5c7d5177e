#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "vexlab/experiment.hpp"
#include "vexlab/format.hpp"
#include "vexlab/io.hpp"
#include "vexlab/modular.hpp"

namespace vexlab {

std::string RunSummary::to_text() const {
  std::ostringstream out;
  out << "tool_version = " << tool_version << "\n";
  out << "config_hash = " << config_hash << "\n";
  out << "mode = " << vexlab::to_string(mode) << "\n";
  out << "status = " << status << "\n";
  out << "exit_code = " << exit_code << "\n";
  out << "wall_time = " << format_number(std::round(wall_time * 1e3) / 1e3) << "\n";
  for (const auto& [k, v] : headline) out << k << " = " << v << "\n";
  out << "artifacts = ";
  for (std::size_t k = 0; k < artifacts.size(); ++k) out << (k ? ", " : "") << artifacts[k];
  out << "\n";
  if (!error.empty()) out << "error = " << error << "\n";
  return out.str();
}

std::optional<std::string> RunSummary::get(const std::string& key) const {
  for (const auto& [k, v] : headline)
    if (k == key) return v;
  return std::nullopt;
}

namespace {

struct Context {
  const ExperimentConfig& cfg;
  RunSummary& summary;
  std::filesystem::path dir;
  bool nonconverged = false;

  void emit(const std::string& name, const std::string& body) {
    write_file(dir, name, body);
    summary.artifacts.push_back(name);
  }
  template <class F>
  void emit_with(const std::string& name, F&& writer) {
    std::ostringstream out;
    writer(out);
    emit(name, out.str());
  }
  void put(const std::string& key, const std::string& value) { summary.headline.emplace_back(key, value); }
  void put(const std::string& key, double value) { put(key, format_number(value)); }
  void put(const std::string& key, long long value) { put(key, std::to_string(value)); }
  void put(const std::string& key, int value) { put(key, std::to_string(value)); }
  void put(const std::string& key, std::size_t value) { put(key, std::to_string(value)); }
  void put(const std::string& key, bool value) { put(key, std::string(value ? "true" : "false")); }
};

std::string cell_label(const Grid& g, std::size_t cell) {
  const auto [i, j] = g.cell_index(cell);
  return std::to_string(cell) + " (" + std::to_string(i) + " " + std::to_string(j) + ")";
}

void write_exponents(Context& ctx, const ExponentField& p, const ExponentField& q) {
  ctx.emit_with("exponent_p.csv", [&](std::ostream& o) { write_exponent_csv(o, p); });
  ctx.emit_with("exponent_q.csv", [&](std::ostream& o) { write_exponent_csv(o, q); });
}

// Smooth, non-symmetric test function for the tau-convergence probe.
double test_function(const Point& x) { return 1.0 + x[0] + x[1] * x[1]; }

double pairing(const DiscreteMeasure& m) {
  double s = 0.0;
  const auto masses = m.masses();
  for (std::size_t c = 0; c < masses.size(); ++c) s += test_function(m.grid().cell_center(c)) * masses[c];
  return s;
}

void run_norm_check(Context& ctx, const Grid& g) {
  const ExponentField p = sample_exponent(ctx.cfg.p, g);
  const CellField u = sample_cells(*ctx.cfg.u, g);
  ctx.emit_with("exponent_p.csv", [&](std::ostream& o) { write_exponent_csv(o, p); });
  ctx.emit_with("function_u.csv", [&](std::ostream& o) { write_cells_csv(o, u); });
  const LuxemburgNorm n = luxemburg_norm(u, p);
  const auto [lo, hi] = norm_modular_bounds(u, p);
  const auto [p_lo, p_hi] = bounds(p);
  ctx.put("modular", modular(u, p));
  ctx.put("luxemburg", n.value);
  ctx.put("residual", n.residual);
  ctx.put("iterations", n.iterations);
  ctx.put("norm_lower_bound", lo);
  ctx.put("norm_upper_bound", hi);
  ctx.put("p_lo", p_lo);
  ctx.put("p_hi", p_hi);
  if (g.cell_count() >= 2 && g.cell_count() <= 16384) ctx.put("log_hoelder_modulus", log_hoelder_modulus(p));
}

void run_fuzz(Context& ctx, const Grid& g) {
  const auto& cfg = ctx.cfg;
  const HoelderFuzzReport h = hoelder_fuzz(g, cfg.hoelder_trials, cfg.seed);
  ctx.put("hoelder_trials", h.trials);
  ctx.put("hoelder_violations", h.violations);
  ctx.put("hoelder_worst_ratio", h.worst_ratio);
  std::vector<FuzzRow> rows;
  for (std::size_t k = 0; k < cfg.elementary_cases.size(); ++k) {
    const auto& c = cfg.elementary_cases[k];
    double values[2];
    // The doubled run uses the next seed so the two estimates are independent.
    for (int d = 0; d < 2; ++d) {
      const long n = cfg.elementary_samples << d;
      const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(d);
      values[d] = elementary_inequality_constant(c.p_lo, c.p_hi, c.theta, n, seed);
      rows.push_back({seed, n, c.p_lo, c.p_hi, c.theta, values[d]});
    }
    const std::string key = "elementary_" + std::to_string(k);
    ctx.put(key + "_constant", values[0]);
    ctx.put(key + "_constant_doubled", values[1]);
    ctx.put(key + "_drift", values[0] > 0.0 ? std::abs(values[1] - values[0]) / values[0] : 0.0);
  }
  ctx.emit_with("fuzz.csv", [&](std::ostream& o) { write_fuzz_csv(o, rows); });
}

void run_solve(Context& ctx, const Grid& g) {
  const auto& cfg = ctx.cfg;
  const ExponentField p = sample_exponent(cfg.p, g);
  const ExponentField q = sample_exponent(cfg.q, g);
  write_exponents(ctx, p, q);
  const ExtremalProblem prob(p, q, cfg.eps, CellMask::full(g), cfg.critical_tol);
  const CriticalSetReport crit = critical_set(p, q, g.dim(), cfg.critical_tol);
  bool failed = false;
  std::optional<ExtremalRecord> rec;
  try {
    rec = solve(prob, cfg.solver);
  } catch (const SolverFailure& f) {
    failed = true;
    rec = f.best();
  }
  ctx.emit_with("record.csv", [&](std::ostream& o) {
    write_record_header(o);
    write_record_row(o, *rec, failed);
  });
  ctx.emit_with("extremal.csv", [&](std::ostream& o) { write_function_csv(o, rec->u); });
  ctx.emit_with("energy.csv", [&](std::ostream& o) { write_measure_csv(o, energy_measure(rec->u, p)); });
  ctx.put("objective", rec->objective);
  if (!rec->u.is_zero()) ctx.put("quotient_constant", quotient_constant(*rec, prob));
  ctx.put("grad_norm", rec->grad_norm);
  ctx.put("iterations", rec->iterations);
  ctx.put("converged", rec->converged);
  ctx.put("best_restart", rec->best_restart);
  const auto [mn, mx] = std::minmax_element(rec->restart_objectives.begin(), rec->restart_objectives.end());
  ctx.put("restart_spread", *mx - *mn);
  ctx.put("critical", rec->critical);
  ctx.put("critical_cells", crit.cells.size());
  if (failed) ctx.nonconverged = true;
}

void run_sweep_mode(Context& ctx, const Grid& g) {
  const auto& cfg = ctx.cfg;
  const ExponentField p = sample_exponent(cfg.p, g);
  const ExponentField q = sample_exponent(cfg.q, g);
  write_exponents(ctx, p, q);
  const ExtremalProblem family(p, q, cfg.eps_schedule.front(), CellMask::full(g), cfg.critical_tol);
  SweepOptions so;
  so.radius = cfg.dichotomy_radius;
  so.thresholds = cfg.thresholds;
  const SweepReport rep = run_sweep(family, cfg.eps_schedule, cfg.solver, so);

  ctx.emit_with("sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, rep, g); });
  ctx.emit_with("records.csv", [&](std::ostream& o) {
    write_record_header(o);
    for (const auto& e : rep.entries)
      if (e.record) write_record_row(o, *e.record, e.failed);
  });
  int failed = 0;
  for (std::size_t k = 0; k < rep.entries.size(); ++k) {
    const auto& e = rep.entries[k];
    if (e.failed) ++failed;
    if (e.record)
      ctx.emit_with("extremal_" + std::to_string(k) + ".csv",
                    [&](std::ostream& o) { write_function_csv(o, e.record->u); });
  }
  const auto [p_lo, p_hi] = bounds(p);
  const auto [q_lo, q_hi] = bounds(q);
  ctx.put("limit_estimate", rep.limit.limit);
  ctx.put("limit_fitted", rep.limit.fitted);
  ctx.put("limit_rate", rep.limit.rate);
  ctx.put("classification", std::string(to_string(rep.dichotomy.classification)));
  ctx.put("concentration_point",
          rep.dichotomy.concentration_point ? cell_label(g, *rep.dichotomy.concentration_point) : std::string("none"));
  ctx.put("conc_ratio", rep.dichotomy.conc_ratio);
  ctx.put("difference_modular", rep.dichotomy.difference_modular);
  ctx.put("dichotomy_radius", rep.dichotomy.radius);
  ctx.put("threshold_concentration", rep.dichotomy.thresholds.concentration);
  ctx.put("threshold_compactness", rep.dichotomy.thresholds.compactness);
  ctx.put("critical_cells", rep.critical.cells.size());
  ctx.put("q_lo_below_p_hi", q_lo < p_hi);
  ctx.put("failed_eps", failed);
  if (failed > 0) ctx.nonconverged = true;
}

void run_localized(Context& ctx, const Grid& g) {
  const auto& cfg = ctx.cfg;
  const ExponentField p = sample_exponent(cfg.p, g);
  const ExponentField q = sample_exponent(cfg.q, g);
  write_exponents(ctx, p, q);
  std::optional<SoblocCheck> check;
  LocalizedResult loc;
  if (cfg.eps == 0.0) {
    check = check_sobloc_identity(p, q, cfg.center, cfg.radii, cfg.solver);
    loc = check->localized;
  } else {
    loc = localized_constant(p, q, cfg.center, cfg.radii, cfg.eps, cfg.solver);
  }
  ctx.emit_with("localized.csv", [&](std::ostream& o) { write_localized_csv(o, loc); });
  ctx.put("extrapolation", loc.extrapolation.limit);
  ctx.put("extrapolation_fitted", loc.extrapolation.fitted);
  ctx.put("value_finest", loc.entries.back().value);
  bool monotone = true;
  for (std::size_t k = 1; k < loc.entries.size(); ++k)
    if (loc.entries[k].value > loc.entries[k - 1].value * (1.0 + 5e-3)) monotone = false;
  ctx.put("monotone", monotone);
  if (check) {
    ctx.put("sobloc_lhs", check->lhs);
    ctx.put("sobloc_rhs", check->rhs);
    ctx.put("sobloc_rel_gap", check->rel_gap);
    ctx.put("sobloc_rel_gap_finest", check->rel_gap_finest);
  }
}

void run_bubbles(Context& ctx, const Grid& g) {
  const auto& cfg = ctx.cfg;
  const ExponentField p = sample_exponent(cfg.p, g);
  const ExponentField q = sample_exponent(cfg.q, g);
  write_exponents(ctx, p, q);
  const double q_lo = bounds(q).first;
  auto bubble = [&](double eps) {
    switch (cfg.profile) {
      case ProfileChoice::Tent: return make_bubble(cfg.center, eps, p, cfg.target_mass, BubbleProfile::Tent);
      case ProfileChoice::Extremal: return make_extremal_bubble(cfg.center, eps, p, q, cfg.target_mass, cfg.solver);
      case ProfileChoice::Smooth: break;
    }
    return make_bubble(cfg.center, eps, p, cfg.target_mass, BubbleProfile::SmoothCompact);
  };

  std::ostringstream table;
  table << "eps,energy,lp_modular,pairing,pairing_gap,F_eps\n";
  const double psi0 = test_function(cfg.center) * cfg.target_mass;
  double last_gap = 0.0;
  double last_lp = 0.0;
  for (std::size_t k = 0; k < cfg.bubble_eps.size(); ++k) {
    const double eps = cfg.bubble_eps[k];
    const GridFunction u = bubble(eps);
    ctx.emit_with("bubble_" + std::to_string(k) + ".csv", [&](std::ostream& o) { write_function_csv(o, u); });
    const DiscreteMeasure m = energy_measure(u, p);
    const double pair = pairing(m);
    last_gap = std::abs(pair - psi0);
    last_lp = modular(u, p);
    const double f = q_lo - eps >= 1.0 + 1e-6 ? eval_F_eps(u, eps, q) : std::nan("");
    table << format_number(eps) << ',' << format_number(m.total_mass()) << ',' << format_number(last_lp) << ','
          << format_number(pair) << ',' << format_number(last_gap) << ',' << format_number(f) << '\n';
  }
  ctx.emit("bubbles.csv", table.str());
  ctx.put("bubbles", cfg.bubble_eps.size());
  ctx.put("lp_modular_smallest", last_lp);
  ctx.put("pairing_gap_smallest", last_gap);

  if (cfg.atoms.empty()) return;
  const double eps = cfg.bubble_eps.back();
  const GridFunction u = cfg.profile == ProfileChoice::Extremal
                             ? make_multi_extremal_bubble(cfg.atoms, eps, p, q, cfg.solver)
                             : make_multi_bubble(cfg.atoms, eps, p,
                                                 cfg.profile == ProfileChoice::Tent ? BubbleProfile::Tent
                                                                                    : BubbleProfile::SmoothCompact);
  ctx.emit_with("multi_bubble.csv", [&](std::ostream& o) { write_function_csv(o, u); });
  const DiscreteMeasure m = energy_measure(u, p);
  const double radius = cfg.atom_radius > 0.0 ? cfg.atom_radius : std::max(eps, 2.0 * g.max_spacing());
  const AtomicDecomposition atoms = detect_atoms(m, radius, cfg.atom_threshold);
  ctx.emit_with("atoms.csv", [&](std::ostream& o) {
    o << "cell,i,j,x,y,mass\n";
    for (const auto& a : atoms.atoms) {
      const auto [i, j] = g.cell_index(a.cell);
      const Point x = g.cell_center(a.cell);
      o << a.cell << ',' << i << ',' << j << ',' << format_number(x[0]) << ',' << format_number(x[1]) << ','
        << format_number(a.mass) << '\n';
    }
  });
  ctx.put("multi_energy", m.total_mass());
  ctx.put("multi_F_eps", q_lo - eps >= 1.0 + 1e-6 ? eval_F_eps(u, eps, q) : std::nan(""));
  ctx.put("atoms_detected", atoms.atoms.size());
  ctx.put("diffuse_mass", atoms.diffuse_mass);

  if (!cfg.radii.empty()) {
    // Sum of mu_i^(q/p) S̄_i^(-q) from localized constants at the atom centers.
    double predicted = 0.0;
    for (const auto& a : cfg.atoms) {
      const LocalizedResult loc = localized_constant(p, q, a.center, cfg.radii, 0.0, cfg.solver);
      const std::size_t c = cell_containing(g, a.center);
      const double sbar = quotient_from_modular_constant(loc.extrapolation.limit, q[c]);
      predicted += std::pow(a.mass, q[c] / p[c]) * std::pow(sbar, -q[c]);
    }
    ctx.put("multi_F_predicted", predicted);
  }
}

void run_sufficient(Context& ctx, const Grid& g) {
  const auto& cfg = ctx.cfg;
  const ExponentField p = sample_exponent(cfg.p, g);
  const ExponentField q = sample_exponent(cfg.q, g);
  write_exponents(ctx, p, q);
  const CriticalSetReport crit = critical_set(p, q, g.dim(), cfg.critical_tol);
  const ExtremalProblem prob(p, q, 0.0, CellMask::full(g), cfg.critical_tol);
  ExtremalRecord global = [&] {
    try {
      return solve(prob, cfg.solver);
    } catch (const SolverFailure& f) {
      ctx.nonconverged = true;
      return f.best();
    }
  }();
  ctx.emit_with("record.csv", [&](std::ostream& o) {
    write_record_header(o);
    write_record_row(o, global, ctx.nonconverged);
  });
  SufficientConditionOptions so;
  so.samples = cfg.samples;
  so.radii = cfg.radii;
  so.margin = cfg.margin;
  so.inclusion_slack = cfg.inclusion_slack;
  const SufficientConditionReport rep = check_sufficient_condition(p, q, crit, global.objective, so, cfg.solver);
  ctx.emit_with("sufficient.csv", [&](std::ostream& o) {
    o << "cell,i,j,x,y,local_value\n";
    for (const auto& [cell, v] : rep.samples) {
      const auto [i, j] = g.cell_index(cell);
      const Point x = g.cell_center(cell);
      o << cell << ',' << i << ',' << j << ',' << format_number(x[0]) << ',' << format_number(x[1]) << ','
        << format_number(v) << '\n';
    }
  });
  ctx.put("global", rep.global);
  ctx.put("sup_local", rep.sup_local);
  ctx.put("strict", rep.strict);
  ctx.put("inclusion", rep.inclusion);
  ctx.put("margin", cfg.margin);
  ctx.put("critical_cells", crit.cells.size());
}

}  // namespace

RunSummary run(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunSummary summary;
  summary.mode = cfg.mode;
  summary.config_hash = config_hash(cfg);
  Context ctx{cfg, summary, std::filesystem::path(cfg.output_dir)};

  try {
    auto violations = validate(cfg);
    if (!violations.empty()) throw ConfigError(ErrorKind::ValidationError, std::move(violations));
    ctx.emit("config.effective.ini", cfg.to_text());
    const Grid g = cfg.grid();
    switch (cfg.mode) {
      case Mode::NormCheck: run_norm_check(ctx, g); break;
      case Mode::InequalityFuzz: run_fuzz(ctx, g); break;
      case Mode::Solve: run_solve(ctx, g); break;
      case Mode::Sweep: run_sweep_mode(ctx, g); break;
      case Mode::Localized: run_localized(ctx, g); break;
      case Mode::BubbleDemo: run_bubbles(ctx, g); break;
      case Mode::SufficientCondition: run_sufficient(ctx, g); break;
    }
    if (ctx.nonconverged) {
      summary.status = "nonconvergence";
      summary.exit_code = 2;
      summary.error = "NonConvergence: at least one solve hit the iteration cap";
    }
  } catch (const Error& e) {
    const bool solver = e.kind() == ErrorKind::NonConvergence;
    summary.status = solver ? "nonconvergence" : "error";
    summary.exit_code = solver ? 2 : 1;
    summary.error = e.what();
  } catch (const std::exception& e) {
    summary.status = "error";
    summary.exit_code = 1;
    summary.error = e.what();
  }
  summary.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_file(ctx.dir, "summary.txt", summary.to_text());
  } catch (const Error& e) {
    if (summary.exit_code == 0) summary.exit_code = 1;
    if (summary.error.empty()) summary.error = e.what();
  }
  return summary;
}

}  // namespace vexlab
