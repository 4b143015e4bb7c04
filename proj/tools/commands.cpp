#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "waveqed/correlators.hpp"
#include "waveqed/observables.hpp"
#include "waveqed/oracle.hpp"
#include "waveqed/tables_io.hpp"

namespace waveqed::cli {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string file_stem(const RunConfig& run, const std::string& product) {
  std::string stem = run.prefix;
  if (!run.name.empty()) stem += "_" + run.name;
  return stem + "_" + product;
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw IoError("write to " + path.string() + " failed");
}

/// One CSV data product and its JSON sidecar.
class Product {
 public:
  Product(const RunConfig& run, std::string command, std::string product)
      : run_(run), command_(std::move(command)), product_(std::move(product)), start_(Clock::now()) {}

  void columns(const std::vector<std::pair<std::string, std::string>>& cols) { columns_ = cols; }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) body_ << ',';
      body_ << format_number(values[i]);
    }
    body_ << '\n';
  }

  json& meta() { return meta_; }
  void warn(const std::string& message) { warnings_.push_back(message); }
  void warn_all(const std::vector<std::string>& messages) {
    warnings_.insert(warnings_.end(), messages.begin(), messages.end());
  }
  void grid(const TimeGrid& g, std::size_t stride) {
    meta_["time_grid"] = {{"dt", g.dt}, {"steps", g.steps}, {"t_max", g.t_max()}, {"stride", stride}};
  }

  std::string write() const {
    ensure_directory(run_.directory);
    const std::filesystem::path dir(run_.directory);
    const std::string stem = file_stem(run_, product_);

    std::ostringstream csv;
    csv << "# waveqed " << command_ << ": " << product_ << '\n';
    if (!run_.name.empty()) csv << "# case: " << run_.name << '\n';
    csv << "# units: lengths in w, times in w/v_g, rates and frequencies in Omega = v_g/w\n";
    csv << "# columns:";
    for (const auto& [name, unit] : columns_) csv << ' ' << name << " [" << unit << ']';
    csv << '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i) csv << (i ? "," : "") << columns_[i].first;
    csv << '\n' << body_.str();
    write_file(dir / (stem + ".csv"), csv.str());

    json side;
    side["command"] = command_;
    side["product"] = product_;
    side["case"] = run_.name;
    side["data_file"] = stem + ".csv";
    json cols = json::array();
    for (const auto& [name, unit] : columns_) cols.push_back({{"name", name}, {"unit", unit}});
    side["columns"] = cols;
    json config = json::object();
    for (const auto& [k, v] : run_.resolved) config[k] = v;
    side["config"] = config;
    for (const auto& [k, v] : meta_.items()) side[k] = v;
    side["warnings"] = warnings_;
    side["runtime_seconds"] = std::chrono::duration<double>(Clock::now() - start_).count();
    write_file(dir / (stem + ".json"), side.dump(2) + "\n");
    return (dir / (stem + ".csv")).string();
  }

 private:
  const RunConfig& run_;
  std::string command_;
  std::string product_;
  Clock::time_point start_;
  std::vector<std::pair<std::string, std::string>> columns_;
  std::ostringstream body_;
  json meta_ = json::object();
  std::vector<std::string> warnings_;
};

std::vector<double> x_grid(const RunConfig& run, double lo, double hi) {
  return linspace(run.x_min.value_or(lo), run.x_max.value_or(hi), run.x_points);
}

std::vector<double> p_grid(const RunConfig& run) { return linspace(-run.p_max, run.p_max, run.p_points); }

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) sum += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
  return sum;
}

std::size_t tables_needed(const RunConfig& run, bool pair) {
  if (run.spec.n_photons >= 3) return 2;
  return pair ? 2 : 1;
}

std::string cache_key(const RunConfig& run, const TimeGrid& grid) {
  json key;
  for (const char* k : {"model.gamma_over_omega", "model.delta_over_omega", "pulse.x0_over_w", "pulse.L_over_w",
                        "pulse.n_photons"}) {
    key[k] = run.resolved.at(k);
  }
  key["dt"] = format_number(grid.dt);
  key["steps"] = grid.steps;
  key["stride"] = run.stride;
  return key.dump();
}

/// Tables for the phase-space style commands; the two-photon G surface can
/// be reused from the binary cache.
ScatteringTables build_tables(const RunConfig& run, const TimeGrid& grid, Product& product) {
  check_table_memory(run, grid, tables_needed(run, false));
  TableOptions options;
  options.stride = run.stride;
  options.keep_pair = false;
  options.threads = run.threads;
  if (run.table_cache.empty() || run.spec.n_photons != 2) {
    return compute_tables(run.params, run.spec, grid, options);
  }

  const std::string key = cache_key(run, grid);
  const std::string key_path = run.table_cache + ".json";
  const auto singles = solve_single_photon(run.params, run.spec, grid);
  const auto equal_time = solve_equal_time(run.params, run.spec, grid, singles);
  std::ifstream key_in(key_path);
  if (key_in) {
    std::stringstream buffer;
    buffer << key_in.rdbuf();
    bool matches = false;
    try {
      matches = json::parse(buffer.str()).at("key").get<std::string>() == key;
    } catch (const std::exception&) {
      matches = false;
    }
    if (matches) {
      TwoTimeSurfaces surfaces;
      surfaces.grid = grid;
      surfaces.stride = run.stride;
      surfaces.g = load_table(run.table_cache);
      product.meta()["table_cache"] = "loaded " + run.table_cache;
      return ScatteringTables::two_photon(run.params, run.spec, singles, equal_time, std::move(surfaces));
    }
    product.warn("table cache " + run.table_cache + " belongs to other parameters; recomputed");
  }
  TwoTimeOptions two;
  two.stride = run.stride;
  two.keep_d = false;
  two.threads = run.threads;
  auto surfaces = solve_two_time(run.params, run.spec, grid, singles, equal_time, two);
  save_table(run.table_cache, surfaces.g);
  write_file(key_path, json{{"key", key}}.dump() + "\n");
  product.meta()["table_cache"] = "saved " + run.table_cache;
  return ScatteringTables::two_photon(run.params, run.spec, singles, equal_time, std::move(surfaces));
}

// ---------------------------------------------------------------- initial

void cmd_initial(const RunConfig& run, std::ostream& log) {
  const InitialState initial(run.spec, run.params.v_g);
  const PulseSpec& spec = run.spec;
  const double lo = spec.x0 - spec.L - 8.0 * spec.w;
  const double hi = spec.x0 + 8.0 * spec.w;

  {
    Product out(run, "initial", "initial_density");
    out.columns({{"x", "w"}, {"rho", "1/w"}, {"rho_independent", "1/w"}});
    const auto xs = linspace(run.x_min.value_or(lo), run.x_max.value_or(hi), std::max<std::size_t>(run.x_points, 2001));
    std::vector<double> rho(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      rho[i] = initial_density(xs[i], spec);
      const double a = (xs[i] - spec.x0) / spec.w;
      const double b = (xs[i] - spec.x0 + spec.L) / spec.w;
      const double independent = spec.n_photons == 2
                                     ? (std::exp(-a * a) + std::exp(-b * b)) / (std::sqrt(kPi) * spec.w)
                                     : rho[i];
      out.row({xs[i], rho[i], independent});
    }
    out.meta()["integral"] = trapezoid(xs, rho);
    out.meta()["chi"] = initial.chi().real();
    out.meta()["nu"] = initial.nu();
    log << out.write() << '\n';
  }
  {
    Product out(run, "initial", "initial_phase_space");
    out.columns({{"x", "w"}, {"p", "1/w"}, {"f", "1"}});
    const auto xs = x_grid(run, lo, hi);
    const auto ps = p_grid(run);
    double min_f = 0.0;
    for (double x : xs) {
      for (double p : ps) {
        const double f = initial.phase_space(x, p, 0.0);
        min_f = std::min(min_f, f);
        out.row({x, p, f});
      }
    }
    // local maxima of the p = 0 slice, reported as X = (x - x0) / w
    json peaks = json::array();
    std::vector<double> slice(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) slice[i] = initial.phase_space(xs[i], 0.0, 0.0);
    const double top = *std::max_element(slice.begin(), slice.end());
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
      if (slice[i] > slice[i - 1] && slice[i] >= slice[i + 1] && slice[i] > 1e-3 * top) {
        peaks.push_back((xs[i] - spec.x0) / spec.w);
      }
    }
    out.meta()["p0_slice_maxima_X"] = peaks;
    out.meta()["min_f"] = min_f;
    log << out.write() << '\n';
  }
}

// ------------------------------------------------------------ phase-space

void cmd_phase_space(const RunConfig& run, std::ostream& log) {
  const double t = run.t_snapshot.value_or(default_snapshot(run));
  const TimeGrid grid = make_grid(run, t);
  if (grid.t_max() < t) throw ConfigError("grid.t_max is before the snapshot time grid.t_snapshot");
  Product out(run, "phase-space", "phase_space");
  const ScatteringTables tables = build_tables(run, grid, out);
  const double reach = std::abs(run.spec.x0) + run.params.v_g * t;
  const auto xs = x_grid(run, -reach, reach);
  const auto ps = p_grid(run);
  const PhaseSpaceField field = phase_space(tables, t, xs, ps, run.threads);

  out.columns({{"x", "w"}, {"p", "1/w"}, {"f_l", "1"}, {"f_r", "1"}});
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ps.size(); ++j) out.row({xs[i], ps[j], field.l(i, j), field.r(i, j)});
  }
  const auto [lmin, lmax] = std::minmax_element(field.f_l.begin(), field.f_l.end());
  const auto [rmin, rmax] = std::minmax_element(field.f_r.begin(), field.f_r.end());
  out.grid(grid, run.stride);
  out.meta()["t_snapshot"] = t;
  out.meta()["f_l"] = {{"min", *lmin}, {"max", *lmax}, {"negative", *lmin < 0.0}};
  out.meta()["f_r"] = {{"min", *rmin}, {"max", *rmax}};
  out.meta()["max_imag_residue"] = field.max_imag_residue;
  if (field.max_imag_residue > 1e-9) out.warn("imaginary residue above 1e-9 of the field maximum");
  log << out.write() << '\n';
}

// ---------------------------------------------------------------- density

std::vector<double> snapshot_times(const RunConfig& run) {
  if (!run.snapshots.empty()) return run.snapshots;
  const double end = (std::abs(run.spec.x0) + run.spec.L + 10.0 * run.spec.w) / run.params.v_g;
  return linspace(0.0, end, 5);
}

void cmd_density(const RunConfig& run, std::ostream& log) {
  const auto times = snapshot_times(run);
  const double last = *std::max_element(times.begin(), times.end());
  const TimeGrid grid = make_grid(run, last);
  if (grid.t_max() < last) throw ConfigError("grid.t_max is before the last snapshot");
  Product out(run, "density", "density");
  const ScatteringTables tables = build_tables(run, grid, out);
  const bool quad = run.density_method != "closed";
  const bool closed = run.density_method != "quadrature";

  std::vector<std::pair<std::string, std::string>> cols{{"t", "w/v_g"}, {"x", "w"}};
  if (quad) {
    cols.push_back({"rho_l", "1/w"});
    cols.push_back({"rho_r", "1/w"});
  }
  if (closed) {
    cols.push_back({"rho_l_closed", "1/w"});
    cols.push_back({"rho_r_closed", "1/w"});
  }
  out.columns(cols);
  json counts = json::array();
  const double reach = std::abs(run.spec.x0) + run.spec.L + 6.0 * run.spec.w + run.params.v_g * last;
  const auto xs = x_grid(run, -reach, reach);
  for (double t : times) {
    std::vector<DensityPoint> q(xs.size());
    if (quad) {
      for (std::size_t i = 0; i < xs.size(); ++i) q[i] = density(xs[i], t, tables);
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
      std::vector<double> row{t, xs[i]};
      if (quad) {
        row.push_back(q[i].rho_l);
        row.push_back(q[i].rho_r);
      }
      if (closed) {
        const DensityPoint c = density_shortcut(xs[i], t, tables);
        row.push_back(c.rho_l);
        row.push_back(c.rho_r);
      }
      out.row(row);
    }
    const PhotonCounts n = count_photons(t, tables, reach, 0.01 * run.spec.w);
    counts.push_back({{"t", t},
                      {"N_l", n.n_left},
                      {"N_r", n.n_right},
                      {"P", n.excitation},
                      {"total", n.n_left + n.n_right + n.excitation}});
  }
  out.grid(grid, run.stride);
  out.meta()["photon_numbers"] = counts;
  log << out.write() << '\n';
}

// --------------------------------------------------------------- spectrum

void cmd_spectrum(const RunConfig& run, std::ostream& log) {
  const double t = run.t_snapshot.value_or(quiescent_time(run, 10.0));
  const TimeGrid grid = make_grid(run, t);
  if (grid.t_max() < t) throw ConfigError("grid.t_max is before the snapshot time");
  Product out(run, "spectrum", "spectrum");
  const ScatteringTables tables = build_tables(run, grid, out);
  const double reach = std::abs(run.spec.x0) + run.spec.L + 6.0 * run.spec.w + run.params.v_g * t;
  const auto xs = x_grid(run, -reach, reach);
  const auto omega = linspace(-run.omega_max, run.omega_max, run.omega_points);
  const SpectrumCurve curve = spectrum(tables, t, omega, xs, run.threads);

  out.columns({{"omega", "Omega"}, {"n_l", "1/Omega"}, {"n_r", "1/Omega"}, {"n_in", "1/Omega"}});
  std::vector<double> incoming(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) {
    incoming[i] = incoming_spectrum(omega[i], tables.initial());
    out.row({omega[i], curve.n_l[i], curve.n_r[i], incoming[i]});
  }
  out.grid(grid, run.stride);
  out.meta()["t_snapshot"] = t;
  out.meta()["late_enough"] = curve.late_enough;
  out.meta()["fwhm"] = {{"n_l", fwhm(omega, curve.n_l)}, {"n_r", fwhm(omega, curve.n_r)}, {"n_in", fwhm(omega, incoming)}};
  out.meta()["integral"] = {{"n_l", trapezoid(omega, curve.n_l)}, {"n_r", trapezoid(omega, curve.n_r)}};
  out.warn_all(curve.warnings);
  for (const auto& w : curve.warnings) log << "warning: " << w << '\n';
  log << out.write() << '\n';
}

// ------------------------------------------------------------------ stats

PhotonStats run_stats(const RunConfig& run, TimeGrid& grid_out) {
  const TimeGrid grid = make_grid(run, quiescent_time(run, 20.0));
  grid_out = grid;
  if (run.spec.n_photons == 2) {
    check_table_memory(run, grid, 1);
    TableOptions options;
    options.stride = run.stride;
    options.keep_correlation = false;
    options.threads = run.threads;
    return photon_stats(compute_tables(run.params, run.spec, grid, options));
  }
  FockChainOptions options;
  options.two_time = false;
  return fock_stats(solve_fock_chain(run.params, run.spec, grid, run.spec.n_photons, options), run.params);
}

void stats_columns(Product& out) {
  out.columns({{"gamma", "Omega"},
               {"L", "w"},
               {"N_r", "1"},
               {"N_l", "1"},
               {"N2_r", "1"},
               {"var_r", "1"},
               {"var_l", "1"},
               {"P_end", "1"}});
}

void stats_row(Product& out, const RunConfig& run, const PhotonStats& s) {
  out.row({run.params.gamma, run.spec.L, s.n_right, s.n_left, s.n_right_sq, s.var_right, s.var_left,
           s.final_excitation});
}

void cmd_stats(const RunConfig& run, std::ostream& log) {
  Product out(run, "stats", "stats");
  TimeGrid grid;
  const PhotonStats s = run_stats(run, grid);
  stats_columns(out);
  stats_row(out, run, s);
  out.grid(grid, run.stride);
  out.meta()["sub_poissonian"] = s.has_second_moment ? json(s.var_right < s.n_right) : json(nullptr);
  out.warn_all(s.warnings);
  log << out.write() << '\n';
}

void cmd_sweep(const RunConfig& run, std::ostream& log) {
  Product out(run, "sweep", "sweep");
  stats_columns(out);
  json cells = json::array();
  for (double L : run.sweep_L) {
    for (double gamma : run.sweep_gamma) {
      RunConfig cell = run;
      cell.params.gamma = gamma;
      cell.spec.L = L;
      cell.resolved["model.gamma_over_omega"] = format_number(gamma);
      cell.resolved["pulse.L_over_w"] = format_number(L);
      cell.params.validate();
      cell.spec.validate();
      TimeGrid grid;
      const PhotonStats s = run_stats(cell, grid);
      stats_row(out, cell, s);
      for (const auto& w : s.warnings) out.warn("gamma=" + format_number(gamma) + " L=" + format_number(L) + ": " + w);
      cells.push_back({{"gamma", gamma}, {"L", L}, {"dt", grid.dt}, {"steps", grid.steps}});
    }
  }
  out.meta()["cells"] = cells;
  log << out.write() << '\n';
}

// --------------------------------------------------------------- validate

struct Check {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

std::vector<Check> validation_checks(const RunConfig& run, std::ostream& log) {
  std::vector<Check> checks;
  auto add = [&](Check c) {
    log << (c.pass ? "PASS " : "FAIL ") << c.name << ": measured " << format_number(c.measured) << ", tolerance "
        << format_number(c.tolerance) << (c.detail.empty() ? "" : " (" + c.detail + ")") << '\n';
    checks.push_back(std::move(c));
  };
  const PulseSpec& spec = run.spec;
  const int n = spec.n_photons;

  {
    const auto xs = linspace(spec.x0 - spec.L - 10.0 * spec.w, spec.x0 + 10.0 * spec.w, 4001);
    std::vector<double> rho(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) rho[i] = initial_density(xs[i], spec);
    const double err = std::abs(trapezoid(xs, rho) - n);
    add({"initial density integral", err, 1e-6, err <= 1e-6, ""});
  }

  const double t_end = quiescent_time(run, 15.0);
  const TimeGrid grid = make_grid(run, t_end);
  check_table_memory(run, grid, tables_needed(run, false));
  TableOptions options;
  options.stride = run.stride;
  options.keep_pair = false;
  options.threads = run.threads;
  const ScatteringTables tables = compute_tables(run.params, spec, grid, options);

  {
    double worst = 0.0;
    const double reach = std::abs(spec.x0) + spec.L + 8.0 * spec.w + run.params.v_g * grid.t_max();
    for (double t : linspace(0.0, grid.t_max(), 5)) {
      const PhotonCounts c = count_photons(t, tables, reach, 0.01 * spec.w);
      worst = std::max(worst, std::abs(c.n_left + c.n_right + c.excitation - n) / n);
    }
    add({"conservation N_l + N_r + P = n at 5 snapshots", worst, 1e-3, worst <= 1e-3, ""});
  }

  {
    // halving the configured step must not move P(t) by more than 1e-6
    TimeGrid fine = grid;
    fine.dt *= 0.5;
    fine.steps *= 2;
    std::vector<double> coarse_p, fine_p;
    if (n == 2) {
      coarse_p = tables.excitation_nodes();
      const auto s = solve_single_photon(run.params, spec, fine);
      fine_p = solve_equal_time(run.params, spec, fine, s).excitation;
    } else {
      FockChainOptions o;
      o.two_time = false;
      coarse_p = solve_fock_chain(run.params, spec, grid, n, o).excitation.back();
      fine_p = solve_fock_chain(run.params, spec, fine, n, o).excitation.back();
    }
    double diff = 0.0;
    for (std::size_t k = 0; k < coarse_p.size(); ++k) diff = std::max(diff, std::abs(coarse_p[k] - fine_p[2 * k]));
    add({"step halving of P(t)", diff, 1e-6, diff <= 1e-6,
         diff > 1e-6 ? "time step too coarse; reduce grid.dt" : ""});
  }

  {
    const TwoTimeTable& g = tables.correlation_table();
    double herm = 0.0, cs = 0.0;
    const std::size_t stride = run.stride;
    const auto& p = tables.excitation_nodes();
    for (std::size_t j = 0; j < g.nodes(); ++j) {
      herm = std::max(herm, std::abs(g.values(j, j).imag()));
      for (std::size_t k = 0; k <= j; ++k) {
        const double bound = p[j * stride] * p[k * stride];
        cs = std::max(cs, std::norm(g.values(j, k)) - bound * (1.0 + 1e-9));
      }
    }
    add({"G(t,t) real", herm, 1e-12, herm <= 1e-12, ""});
    add({"Cauchy-Schwarz |G|^2 <= P P", std::max(cs, 0.0), 1e-14, cs <= 1e-14, ""});
  }

  {
    double worst = 0.0;
    const double t = std::min(default_snapshot(run), grid.t_max());
    for (double x : linspace(-0.9 * run.params.v_g * t, -0.5 * spec.w, 12)) {
      const double q = density(x, t, tables).rho_r;
      const double c = density_shortcut(x, t, tables).rho_r;
      if (c > 1e-8) worst = std::max(worst, std::abs(q - c) / c);
    }
    add({"reflected density from momentum quadrature vs Gamma/(2 v_g) P", worst, 1e-4, worst <= 1e-4, ""});
  }

  if (run.oracle && n <= 2) {
    const auto disc = oracle::DiscreteModel::make(run.params, run.oracle_modes, run.oracle_p_max);
    const double box_limit = 0.5 * disc.box_length() / run.params.v_g;
    const double t_or = std::min(t_end, std::floor(box_limit));
    const TimeGrid og = TimeGrid::covering(t_or, run.oracle_dt);
    oracle::PropagateOptions po;
    po.record_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::round(0.1 / og.dt)));
    const auto traj = oracle::propagate(oracle::build_initial_state(spec, disc), disc, run.params, og, po);
    double sup = 0.0, peak = 0.0;
    for (const auto& s : traj.samples) {
      sup = std::max(sup, std::abs(s.excitation - tables.excitation(s.t)));
      peak = std::max(peak, tables.excitation(s.t));
    }
    const double rel = peak > 0.0 ? sup / peak : sup;
    add({"oracle P(t) sup-norm relative difference", rel, 0.02, rel <= 0.02,
         "M=" + std::to_string(run.oracle_modes) + ", p_max=" + format_number(run.oracle_p_max)});
    // reflected photons emitted up to t_or: (Gamma/2) int_0^t_or P
    const auto& p = tables.excitation_nodes();
    double integral = 0.0;
    const auto last = static_cast<std::size_t>(std::llround(t_or / grid.dt));
    for (std::size_t k = 0; k < last && k + 1 < p.size(); ++k) integral += 0.5 * grid.dt * (p[k] + p[k + 1]);
    const double hier = 0.5 * run.params.gamma * integral;
    const double orc = traj.samples.back().n_right;
    const double nrel = hier > 0.0 ? std::abs(orc - hier) / hier : std::abs(orc - hier);
    add({"oracle N_r relative difference", nrel, 0.02, nrel <= 0.02, "t = " + format_number(t_or)});
    add({"oracle norm drift", traj.max_norm_drift, 1e-6, traj.max_norm_drift <= 1e-6, ""});
  }
  return checks;
}

void cmd_validate(const RunConfig& run, std::ostream& log, bool& failed) {
  Product out(run, "validate", "validation");
  const auto checks = validation_checks(run, log);
  out.columns({{"check", "index"}, {"measured", "1"}, {"tolerance", "1"}, {"pass", "bool"}});
  json list = json::array();
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto& c = checks[i];
    out.row({static_cast<double>(i), c.measured, c.tolerance, c.pass ? 1.0 : 0.0});
    list.push_back({{"index", i}, {"name", c.name}, {"measured", c.measured}, {"tolerance", c.tolerance},
                    {"pass", c.pass}, {"detail", c.detail}});
    if (!c.pass) failed = true;
  }
  out.meta()["checks"] = list;
  log << out.write() << '\n';
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"initial", "phase-space", "density", "spectrum",
                                              "stats",   "sweep",       "validate"};
  return names;
}

double default_snapshot(const RunConfig& run) {
  return (10.0 * run.spec.w + std::abs(run.spec.x0)) / run.params.v_g;
}

double quiescent_time(const RunConfig& run, double decay_lengths) {
  const double transit = (std::abs(run.spec.x0) + run.spec.L + 6.0 * run.spec.w) / run.params.v_g;
  return transit + (run.params.gamma > 0.0 ? decay_lengths / run.params.gamma : 0.0);
}

TimeGrid make_grid(const RunConfig& run, double default_t_max) {
  const double t_max = run.t_max.value_or(default_t_max);
  const double dt = run.dt.value_or(TimeGrid::default_step(run.params, run.spec));
  TimeGrid grid = TimeGrid::covering(t_max, dt);
  if (grid.steps % run.stride != 0) {
    grid.steps += run.stride - grid.steps % run.stride;
    grid.dt = t_max / static_cast<double>(grid.steps);
  }
  return grid;
}

void check_table_memory(const RunConfig& run, const TimeGrid& grid, std::size_t tables) {
  const double limit = run.max_table_mb * 1024.0 * 1024.0;
  const auto bytes = [&](std::size_t stride) {
    return static_cast<double>(two_time_bytes(grid.steps / stride + 1, tables));
  };
  if (bytes(run.stride) <= limit) return;
  std::size_t stride = run.stride;
  while (bytes(stride) > limit) ++stride;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "correlator tables need %.0f MB (grid.max_table_mb = %.0f); decimate with --set grid.stride=%zu "
                "or raise grid.max_table_mb",
                bytes(run.stride) / 1048576.0, run.max_table_mb, stride);
  throw ConfigError(buf);
}

int run_command(const std::string& command, const std::vector<RunConfig>& runs, std::ostream& log) {
  if (std::find(command_names().begin(), command_names().end(), command) == command_names().end()) {
    throw ConfigError("unknown command " + command);
  }
  bool failed = false;
  for (const auto& run : runs) {
    if (!run.name.empty()) log << "case " << run.name << '\n';
    if (command == "initial") cmd_initial(run, log);
    if (command == "phase-space") cmd_phase_space(run, log);
    if (command == "density") cmd_density(run, log);
    if (command == "spectrum") cmd_spectrum(run, log);
    if (command == "stats") cmd_stats(run, log);
    if (command == "sweep") cmd_sweep(run, log);
    if (command == "validate") cmd_validate(run, log, failed);
  }
  return failed ? kValidationFailed : kOk;
}

int exit_code_for(std::exception_ptr error, std::ostream& err) {
  try {
    std::rethrow_exception(error);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const UsageError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const oracle::NumericalFailure& e) {
    err << "validation failure: " << e.what() << '\n';
    return kValidationFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailed;
  }
}

}  // namespace waveqed::cli
