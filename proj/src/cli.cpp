#include "adiabat/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adiabat/adiabatic.hpp"
#include "adiabat/propagation.hpp"
#include "adiabat/rotated.hpp"
#include "adiabat/selftest.hpp"
#include "adiabat/spin_example.hpp"
#include "adiabat/version.hpp"

namespace adiabat {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kPi4 = 0.78539816339744831;

struct CommonConfig {
  std::string model_file;
  std::string builtin = "spin";
  double gamma = 0.5;
  double omega = 0.1;
  double theta = kPi4;
  double t0 = 0.0;
  std::optional<double> t1;
  std::optional<double> t_eval;
  std::string grid_gamma = "0.1:3:30";
  std::string grid_omega = "0:1:30";
  std::string out_dir = "adiabat_out";
  std::uint64_t seed = 20240915;
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  bool quick = false;
  int grid_points = 1201;
  std::string propagators = "master,embedded";
  int initial_index = -1;  // -1: highest basis state
  bool inject_fault = false;
};

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<double> parse_grid(const std::string& spec) {
  double a = 0.0, b = 0.0;
  int n = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &a, &b, &n) != 3 || n < 1)
    throw ArgumentError("grid spec must be a:b:n with n >= 1, got '" + spec + "'");
  std::vector<double> grid(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    grid[static_cast<size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return grid;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

void prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  const fs::path probe = fs::path(dir) / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw IoError("output directory '" + dir + "' is not writable");
  }
  fs::remove(probe, ec);
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  const fs::path p = fs::path(dir) / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot write " + p.string());
  f << content;
}

LindbladModel resolve_model(const CommonConfig& cfg) {
  if (!cfg.model_file.empty()) return model_from_json_file(cfg.model_file);
  if (cfg.builtin == "spin")
    return spin_model(SpinParams{cfg.gamma, cfg.omega, cfg.theta});
  throw ArgumentError("unknown builtin model '" + cfg.builtin + "'");
}

json config_json(const CommonConfig& cfg, const std::string& subcommand) {
  json j;
  j["subcommand"] = subcommand;
  j["model_file"] = cfg.model_file;
  j["builtin"] = cfg.builtin;
  j["gamma"] = cfg.gamma;
  j["omega"] = cfg.omega;
  j["theta"] = cfg.theta;
  j["t0"] = cfg.t0;
  if (cfg.t1) j["t1"] = *cfg.t1;
  if (cfg.t_eval) j["t_eval"] = *cfg.t_eval;
  j["grid_gamma"] = cfg.grid_gamma;
  j["grid_omega"] = cfg.grid_omega;
  j["out"] = cfg.out_dir;
  j["seed"] = cfg.seed;
  j["quick"] = cfg.quick;
  j["grid_points"] = cfg.grid_points;
  j["propagators"] = cfg.propagators;
  j["initial_index"] = cfg.initial_index;
  return j;
}

void write_meta(const CommonConfig& cfg, const std::string& subcommand,
                double wall_seconds, json extra = {}) {
  json j;
  j["tool_version"] = kVersion;
  j["config"] = config_json(cfg, subcommand);
  j["tolerances"] = {{"rel_tol", cfg.rel_tol},
                     {"abs_tol", cfg.abs_tol},
                     {"degeneracy_rel_tol", kDefaultDegeneracyRel},
                     {"fd_step", kDefaultFdStep}};
  j["wall_clock_seconds"] = wall_seconds;
  if (!extra.empty()) j["result"] = std::move(extra);
  write_file(cfg.out_dir, "meta.json", j.dump(2) + "\n");
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_ = clock::now();
};

double default_horizon(const CommonConfig& cfg, const LindbladModel& model) {
  if (cfg.t1) return *cfg.t1;
  if (cfg.model_file.empty() && cfg.omega != 0.0)
    return cfg.t0 + 2.0 * M_PI / std::abs(cfg.omega);
  return model.t_domain().end;
}

DensityMatrix initial_state(const CommonConfig& cfg, int dim) {
  const int idx = cfg.initial_index < 0 ? dim - 1 : cfg.initial_index;
  if (idx >= dim) throw ArgumentError("--initial index exceeds model dimension");
  Matrix rho = Matrix::Zero(dim, dim);
  rho(idx, idx) = 1.0;
  return DensityMatrix(std::move(rho));
}

int cmd_spectrum(const CommonConfig& cfg) {
  Stopwatch watch;
  prepare_out_dir(cfg.out_dir);
  const LindbladModel model = resolve_model(cfg);
  const double t = cfg.t_eval.value_or(cfg.t0);
  const Matrix ht = build_effective_hamiltonian(model, t).matrix;
  const SpectralDecomposition d = decompose(ht);

  std::ostringstream csv;
  csv << "index,re,im,degenerate\n";
  for (int m = 0; m < d.dim; ++m)
    csv << m << ',' << fmt17(d.eigenvalues[static_cast<size_t>(m)].real()) << ','
        << fmt17(d.eigenvalues[static_cast<size_t>(m)].imag()) << ','
        << (d.degenerate[static_cast<size_t>(m)] ? 1 : 0) << '\n';
  write_file(cfg.out_dir, "eigenvalues.csv", csv.str());

  double max_offdiag = 0.0, max_right = 0.0, max_left = 0.0;
  const double scale = std::max(ht.norm(), 1e-300);
  for (int m = 0; m < d.dim; ++m) {
    const auto mm = static_cast<size_t>(m);
    max_right = std::max(
        max_right, (ht * d.right[mm] - d.eigenvalues[mm] * d.right[mm]).norm() / scale);
    max_left = std::max(max_left, (ht.transpose() * d.left[mm] -
                                   d.eigenvalues[mm] * d.left[mm])
                                      .norm() /
                                      scale);
    for (int k = 0; k < d.dim; ++k)
      if (k != m)
        max_offdiag =
            std::max(max_offdiag, std::abs(d.left_apply(m, d.right[static_cast<size_t>(k)])));
  }
  json resid;
  resid["max_offdiag_overlap"] = max_offdiag;
  resid["max_right_residual_rel"] = max_right;
  resid["max_left_residual_rel"] = max_left;
  resid["degeneracy_tol_abs"] = d.degeneracy_tol_abs;
  resid["spectral_diameter"] = d.spectral_diameter;
  write_file(cfg.out_dir, "biorth_residuals.json", resid.dump(2) + "\n");
  write_meta(cfg, "spectrum", watch.seconds());

  const bool degenerate =
      std::any_of(d.degenerate.begin(), d.degenerate.end(), [](bool b) { return b; });
  if (degenerate) {
    std::cerr << "spectrum: degenerate eigenvalues flagged at t=" << t
              << "; downstream adiabatic quantities are not defined here\n";
    return 2;
  }
  std::cout << "spectrum: wrote " << d.dim << " eigenvalues to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_sweep(const CommonConfig& cfg) {
  Stopwatch watch;
  prepare_out_dir(cfg.out_dir);
  const SweepResult result =
      gamma_sweep(cfg.theta, parse_grid(cfg.grid_gamma), parse_grid(cfg.grid_omega),
                  cfg.t_eval.value_or(0.0));
  std::ostringstream csv;
  write_sweep_csv(result, csv);
  write_file(cfg.out_dir, "gamma_surface.csv", csv.str());
  json extra;
  extra["theta"] = result.theta;
  extra["t_eval"] = result.t_eval;
  extra["gamma_grid"] = result.gamma_grid;
  extra["omega_grid"] = result.omega_grid;
  size_t excluded = 0;
  for (const auto& p : result.points) excluded += p.excluded ? 1 : 0;
  extra["excluded_points"] = excluded;
  write_meta(cfg, "sweep", watch.seconds(), std::move(extra));
  std::cout << "sweep: " << result.points.size() << " grid points ("
            << excluded << " excluded) -> " << cfg.out_dir << "\n";
  return 0;
}

int cmd_compare(const CommonConfig& cfg) {
  Stopwatch watch;
  prepare_out_dir(cfg.out_dir);
  const LindbladModel model = resolve_model(cfg);
  const double t0 = cfg.t0;
  const double t1 = default_horizon(cfg, model);
  const DensityMatrix rho0 = initial_state(cfg, model.dim());
  IntegratorConfig icfg;
  icfg.rel_tol = cfg.rel_tol;
  icfg.abs_tol = cfg.abs_tol;

  std::vector<std::string> names;
  {
    std::stringstream ss(cfg.propagators);
    std::string item;
    while (std::getline(ss, item, ',')) names.push_back(item);
  }
  if (names.size() < 2)
    throw ArgumentError("--propagators needs at least two comma-separated names");

  const int n_samples = 200;
  std::map<std::string, Trajectory> trajectories;
  for (const auto& name : names) {
    if (name == "master") {
      trajectories[name] = propagate_master(model, rho0, t0, t1, icfg, n_samples);
    } else if (name == "embedded") {
      trajectories[name] = propagate_embedded(model, rho0, t0, t1, icfg, n_samples);
    } else if (name == "adiabatic") {
      EigenPath path = track_paths(model, linspace(t0, t1, cfg.grid_points));
      const AdiabaticTrajectory at =
          adiabatic_propagate(path, embed_density(rho0), t0, t1);
      Trajectory traj;
      traj.times = at.times;
      for (const auto& psi : at.states) traj.states.push_back(extract_density(psi));
      traj.config = icfg;
      traj.model_hash = model_hash(model);
      trajectories[name] = std::move(traj);
    } else if (name == "rotated") {
      const auto grid = linspace(t0, t1, n_samples + 1);
      const RotatingFrame frame = build_frame(model, grid);
      const LindbladModel rotated = rotate_model(model, frame);
      const Matrix rt0 = frame.u.front() * rho0.matrix() * frame.u.front().adjoint();
      Trajectory traj =
          propagate_master(rotated, DensityMatrix(rt0), t0, t1, icfg, n_samples);
      for (size_t i = 0; i < traj.states.size(); ++i)
        traj.states[i] =
            frame.u[i].adjoint() * traj.states[i] * frame.u[i];
      trajectories[name] = std::move(traj);
    } else {
      throw ArgumentError("unknown propagator '" + name +
                          "' (expected master, embedded, adiabatic, rotated)");
    }
  }

  std::ostringstream csv;
  bool first = true;
  for (const auto& [name, traj] : trajectories) {
    std::ostringstream one;
    write_trajectory_csv(traj, one, name);
    std::string text = one.str();
    if (!first) text.erase(0, text.find('\n') + 1);  // keep a single header
    csv << text;
    first = false;
  }
  write_file(cfg.out_dir, "trajectories.csv", csv.str());

  json pairs = json::array();
  for (size_t i = 0; i < names.size(); ++i) {
    for (size_t j = i + 1; j < names.size(); ++j) {
      const ComparisonReport rep =
          compare_trajectories(trajectories.at(names[i]), trajectories.at(names[j]));
      pairs.push_back({{"a", names[i]},
                       {"b", names[j]},
                       {"max_trace_distance", rep.max_distance},
                       {"at_time", rep.at_time},
                       {"resampled", rep.resampled}});
    }
  }
  json report;
  report["pairs"] = std::move(pairs);
  report["t0"] = t0;
  report["t1"] = t1;
  write_file(cfg.out_dir, "report.json", report.dump(2) + "\n");
  write_meta(cfg, "compare", watch.seconds());
  std::cout << "compare: " << names.size() << " propagators over [" << t0 << ", "
            << t1 << "] -> " << cfg.out_dir << "\n";
  return 0;
}

int cmd_rotated(const CommonConfig& cfg) {
  Stopwatch watch;
  prepare_out_dir(cfg.out_dir);
  const LindbladModel model = resolve_model(cfg);
  const double t0 = cfg.t0;
  const double t1 = default_horizon(cfg, model);
  const DensityMatrix rho0 = initial_state(cfg, model.dim());
  IntegratorConfig icfg;
  icfg.rel_tol = cfg.rel_tol;
  icfg.abs_tol = cfg.abs_tol;

  const int n_samples = std::max(200, cfg.grid_points - 1);
  const auto grid = linspace(t0, t1, n_samples + 1);
  const RotatingFrame frame = build_frame(model, grid);
  const LindbladModel rotated = rotate_model(model, frame);

  double unitarity = 0.0, z_defect = 0.0;
  for (size_t i = 0; i < frame.u.size(); ++i) {
    unitarity = std::max(unitarity,
                         (frame.u[i] * frame.u[i].adjoint() -
                          Matrix::Identity(model.dim(), model.dim()))
                             .cwiseAbs()
                             .maxCoeff());
    z_defect = std::max(z_defect, hermiticity_defect(frame.z[i]));
  }

  const Trajectory direct = propagate_master(model, rho0, t0, t1, icfg, n_samples);
  const Matrix rt0 = frame.u.front() * rho0.matrix() * frame.u.front().adjoint();
  Trajectory round = propagate_master(rotated, DensityMatrix(rt0), t0, t1, icfg, n_samples);
  for (size_t i = 0; i < round.states.size(); ++i)
    round.states[i] = frame.u[i].adjoint() * round.states[i] * frame.u[i];
  const ComparisonReport rep = compare_trajectories(direct, round);

  const double t_eval = cfg.t_eval.value_or(0.5 * (t0 + t1));
  EigenPath path = track_paths(model, {t_eval - 0.01, t_eval, t_eval + 0.01});
  const int dim2 = model.dim() * model.dim();
  std::ostringstream csv;
  csv << "m,n,Gamma_first_order,Gamma_high_order,excluded\n";
  for (int m = 0; m < dim2; ++m) {
    for (int n = 0; n < dim2; ++n) {
      if (m == n) continue;
      try {
        const double g1 = gamma_mn(path, t_eval, m, n);
        const double g2 = high_order_gamma(model, frame, t_eval, m, n);
        csv << m << ',' << n << ',' << fmt17(g1) << ',' << fmt17(g2) << ",0\n";
      } catch (const DegeneracyError&) {
        csv << m << ',' << n << ",nan,nan,1\n";
      }
    }
  }
  write_file(cfg.out_dir, "gamma_pairs.csv", csv.str());

  json report;
  report["consistency_max_trace_distance"] = rep.max_distance;
  report["unitarity_defect"] = unitarity;
  report["z_hermiticity_defect"] = z_defect;
  report["t_eval"] = t_eval;
  write_file(cfg.out_dir, "report.json", report.dump(2) + "\n");
  write_meta(cfg, "rotated", watch.seconds());
  std::cout << "rotated: round-trip max trace distance " << rep.max_distance
            << " -> " << cfg.out_dir << "\n";
  return 0;
}

int cmd_spin(const CommonConfig& cfg) {
  Stopwatch watch;
  prepare_out_dir(cfg.out_dir);
  std::vector<double> gamma_grid = parse_grid(cfg.grid_gamma);
  const SweepResult result =
      figure1_data(cfg.theta, gamma_grid, parse_grid(cfg.grid_omega));
  std::ostringstream csv;
  write_sweep_csv(result, csv);
  write_file(cfg.out_dir, "gamma_surface.csv", csv.str());

  // closed forms vs the generic pipeline at the configured point
  const SpinParams p{cfg.gamma, cfg.omega, cfg.theta};
  const double phi = p.omega == 0.0 ? 0.0 : 0.37;
  const Matrix ht = spin_effective_closed_form(p, phi);
  const Matrix ht_generic =
      build_effective_hamiltonian(spin_model(p), p.omega == 0.0 ? 0.0 : phi / p.omega)
          .matrix;
  const SpinEigenSystem sys = spin_eigen_closed_form(p, phi);
  double max_resid = 0.0;
  for (int j = 0; j < 4; ++j) {
    max_resid = std::max(max_resid,
                         (ht * sys.right.col(j) - sys.eigenvalues[static_cast<size_t>(j)] *
                                                      sys.right.col(j))
                             .norm());
    max_resid = std::max(
        max_resid, ((sys.left.row(j) * ht).transpose() -
                    sys.eigenvalues[static_cast<size_t>(j)] *
                        sys.left.row(j).transpose())
                       .norm());
  }
  Complex sum = 0.0;
  for (const auto& l : sys.eigenvalues) sum += l;

  json check;
  check["matrix_vs_generic_max_abs"] = (ht - ht_generic).cwiseAbs().maxCoeff();
  check["closed_form_eigen_residual"] = max_resid;
  check["eigenvalue_sum_re"] = sum.real();
  check["eigenvalue_sum_im"] = sum.imag();
  check["expected_sum_im"] = -2.0 * cfg.gamma;
  write_file(cfg.out_dir, "eigen_check.json", check.dump(2) + "\n");
  write_meta(cfg, "spin", watch.seconds());
  std::cout << "spin: surface " << result.points.size() << " points, eigen check -> "
            << cfg.out_dir << "\n";
  return 0;
}

int cmd_selftest(const CommonConfig& cfg) {
  Stopwatch watch;
  SelftestOptions opts;
  opts.seed = cfg.seed;
  opts.quick = cfg.quick;
  opts.inject_fault = cfg.inject_fault;
  const SelftestReport report = run_selftest(opts);
  for (const auto& s : report.suites)
    std::cout << (s.passed ? "[PASS] " : "[FAIL] ") << s.name << ": " << s.detail
              << "\n";
  prepare_out_dir(cfg.out_dir);
  json j;
  j["seed"] = report.seed;
  j["all_passed"] = report.all_passed();
  json suites = json::array();
  for (const auto& s : report.suites)
    suites.push_back({{"name", s.name}, {"passed", s.passed}, {"detail", s.detail}});
  j["suites"] = std::move(suites);
  write_file(cfg.out_dir, "selftest_report.json", j.dump(2) + "\n");
  write_meta(cfg, "selftest", watch.seconds());
  return report.all_passed() ? 0 : 1;
}

void add_common_options(CLI::App* sub, CommonConfig& cfg) {
  sub->add_option("--model", cfg.model_file, "Model description file (JSON)");
  sub->add_option("--builtin", cfg.builtin, "Builtin model name (spin)");
  sub->add_option("--gamma", cfg.gamma, "Spin model decay rate (units mu*B0)");
  sub->add_option("--omega", cfg.omega, "Spin model drive frequency (units mu*B0)");
  sub->add_option("--theta", cfg.theta, "Spin model polar angle (radians)");
  sub->add_option("--t0", cfg.t0, "Start time");
  sub->add_option_function<double>(
      "--t1", [&cfg](const double& v) { cfg.t1 = v; }, "End time");
  sub->add_option_function<double>(
      "--t-eval", [&cfg](const double& v) { cfg.t_eval = v; },
      "Evaluation time for spectral quantities");
  sub->add_option("--grid-gamma", cfg.grid_gamma, "Gamma grid a:b:n");
  sub->add_option("--grid-omega", cfg.grid_omega, "Omega grid a:b:n");
  sub->add_option("--out", cfg.out_dir, "Output directory");
  sub->add_option("--seed", cfg.seed, "Random seed for randomized suites");
  sub->add_option("--rel-tol", cfg.rel_tol, "Integrator relative tolerance");
  sub->add_option("--abs-tol", cfg.abs_tol, "Integrator absolute tolerance");
  sub->add_flag("--quick", cfg.quick, "Reduced sample counts");
  sub->add_option("--grid-points", cfg.grid_points, "Tracking grid resolution");
  sub->add_option("--propagators", cfg.propagators,
                  "Comma list from {master, embedded, adiabatic, rotated}");
  sub->add_option("--initial", cfg.initial_index,
                  "Initial basis-state index (default: highest)");
  sub->add_flag("--inject-fault", cfg.inject_fault,
                "Selftest hook: flip the coupling-term sign");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Lindblad dynamics via a composite-system effective Hamiltonian: "
               "spectra, adiabaticity metrics, and propagator cross-checks"};
  app.require_subcommand(1);

  CommonConfig cfg;
  CLI::App* spectrum = app.add_subcommand("spectrum", "Eigensystem report of H_T");
  CLI::App* sweep = app.add_subcommand("sweep", "Gamma(gamma, omega) surface");
  CLI::App* compare = app.add_subcommand("compare", "Propagator cross-validation");
  CLI::App* rotated = app.add_subcommand("rotated", "Rotating-frame checks");
  CLI::App* spin = app.add_subcommand("spin", "Spin worked example reproduction");
  CLI::App* selftest = app.add_subcommand("selftest", "Randomized invariant suites");
  for (CLI::App* sub : {spectrum, sweep, compare, rotated, spin, selftest})
    add_common_options(sub, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (spectrum->parsed()) return cmd_spectrum(cfg);
    if (sweep->parsed()) return cmd_sweep(cfg);
    if (compare->parsed()) return cmd_compare(cfg);
    if (rotated->parsed()) return cmd_rotated(cfg);
    if (spin->parsed()) return cmd_spin(cfg);
    if (selftest->parsed()) return cmd_selftest(cfg);
  } catch (const DegeneracyError& e) {
    std::cerr << "degeneracy abort: " << e.what() << "\n";
    return 2;
  } catch (const NonDiagonalizableError& e) {
    std::cerr << "degeneracy abort: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace adiabat
