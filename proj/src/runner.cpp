#include "hgdg/runner.hpp"

#include "hgdg/amr.hpp"
#include "hgdg/coupling.hpp"
#include "hgdg/timeint.hpp"

#include <fmt/format.h>
#include <fmt/os.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hgdg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const std::vector<std::string> kEulerVars{"rho", "rho_v1", "rho_v2", "rho_e"};
const std::vector<std::string> kGravityVars{"phi", "q1", "q2"};

struct Setup {
  TestCase tc;
  std::unique_ptr<DGMesh> mesh;
  std::unique_ptr<EulerSemi> euler;
  std::unique_ptr<GravitySemi> gravity;
};

void add_euler_source(EulerSemi& semi, EulerFn fn) {
  const DGMesh* mesh = &semi.mesh();
  semi.add_source([mesh, fn = std::move(fn)](std::span<const double>, double t, std::span<double> du) {
    const int n = mesh->n_nodes();
    for (std::size_t e = 0; e < mesh->n_elements(); ++e)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const auto s = fn(mesh->node_x(e, i), mesh->node_y(e, j), t);
          double* d = du.data() + ((e * n + j) * n + i) * 4;
          for (int v = 0; v < 4; ++v) d[v] += s[v];
        }
  });
}

void add_gravity_forcing(GravitySemi& semi, ScalarFn fn) {
  const DGMesh* mesh = &semi.mesh();
  semi.add_source([mesh, fn = std::move(fn)](std::span<const double>, double t, std::span<double> du) {
    const int n = mesh->n_nodes();
    for (std::size_t e = 0; e < mesh->n_elements(); ++e)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) du[((e * n + j) * n + i) * 3] += fn(mesh->node_x(e, i), mesh->node_y(e, j), t);
  });
}

Setup build(const RunConfig& c) {
  Setup s;
  s.tc = make_case(c.experiment, c.sedov_h_initial);
  const TestCase& tc = s.tc;
  const int max_level = std::max({Quadtree::kDefaultMaxLevel, c.initial_level, c.amr_policy.level_high});
  auto tree = Quadtree::create_uniform({tc.domain_min, tc.domain_min}, {tc.domain_max, tc.domain_max},
                                       c.initial_level, tc.periodic, max_level);
  s.mesh = std::make_unique<DGMesh>(std::move(tree), c.degree);
  const bool all_periodic = tc.periodic[0] && tc.periodic[1];
  const bool sedov = tc.name == "sedov";

  if (tc.has_euler) {
    const FluxKind surface = parse_flux_kind(c.surface_flux.empty() ? "hll" : c.surface_flux);
    const std::string form = c.volume_form.empty() ? (sedov ? "split" : "weak") : c.volume_form;
    const FluxKind volume =
        parse_flux_kind(c.volume_flux.empty() ? (sedov ? "chandrashekar" : "central") : c.volume_flux);
    s.euler = std::make_unique<EulerSemi>(*s.mesh, CompressibleEuler(tc.gamma), surface,
                                          form == "split" ? VolumeForm::Split : VolumeForm::Weak, volume);
    const bool capture = c.shock_capturing < 0 ? sedov : c.shock_capturing == 1;
    if (capture) s.euler->set_shock_capturing(BlendParams{});
    if (!all_periodic) s.euler->set_boundary_all(tc.euler_boundary ? tc.euler_boundary : tc.euler_exact);
    if (tc.euler_source) add_euler_source(*s.euler, tc.euler_source);
  }
  if (tc.has_gravity) {
    s.gravity = std::make_unique<GravitySemi>(*s.mesh, HyperbolicDiffusion(relaxation_params(tc.nu, tc.relaxation_length)),
                                              FluxKind::Llf);
    if (!all_periodic) s.gravity->set_boundary_all(tc.gravity_boundary ? tc.gravity_boundary : tc.gravity_exact);
    if (tc.gravity_forcing) add_gravity_forcing(*s.gravity, tc.gravity_forcing);
  }
  return s;
}

std::vector<double> errors_against(const DGMesh& mesh, const Field& f, int nv, const auto& exact, double t) {
  return l2_error(mesh, f, [&](double x, double y, double* out) {
    const auto s = exact(x, y, t);
    for (int v = 0; v < nv; ++v) out[v] = s[v];
  });
}

std::string context(std::size_t step, double t) { return fmt::format("step {} (t = {:.6e}): ", step, t); }

void rethrow_with_context(std::size_t step, double t) {
  try {
    throw;
  } catch (const DivergenceError& e) {
    throw DivergenceError(context(step, t) + e.what());
  } catch (const InadmissibleState& e) {
    throw InadmissibleState(context(step, t) + e.what());
  }
}

RunResult run_steady_gravity(const RunConfig& c, Setup& s) {
  RunResult r;
  const auto start = Clock::now();
  const GravityFn initial = c.gravity_initial_state
                                ? GravityFn([g = *c.gravity_initial_state](double, double, double) {
                                    return HypDiffState{g[0], g[1], g[2]};
                                  })
                                : s.tc.gravity_initial;
  Field phi = sample_gravity(*s.mesh, initial);
  PseudotimeOptions opt;
  opt.tol = c.tol;
  opt.cfl = c.cfl_gravity;
  opt.scheme = &scheme_by_name(c.gravity_scheme);
  opt.min_steps = c.min_subcycles;
  opt.max_steps = c.max_subcycles;
  opt.monitor = c.residual_monitor;
  RKWorkspace ws;
  const auto res = pseudotime_steady_state(*s.gravity, phi.span(), 0.0, opt, ws);
  r.steps = res.steps;
  r.total_subcycles = res.steps;
  r.gravity_solves = 1;
  r.subcycle_histogram[res.steps] = 1;
  r.final_residual = res.residual;
  r.gravity_seconds = seconds_since(start);
  r.element_steps = res.steps * s.mesh->n_elements();
  r.variables = kGravityVars;
  if (s.tc.gravity_exact) r.errors = errors_against(*s.mesh, phi, 3, s.tc.gravity_exact, 0.0);
  return r;
}

bool landed(double t, double target, double scale) { return std::abs(target - t) <= 1e-12 * scale; }

}  // namespace

std::string format_number(double v) { return fmt::format("{:.16e}", v); }

std::vector<double> sample_line(const DGMesh& mesh, const Field& field, int var, const std::vector<double>& xs) {
  if (var < 0 || var >= field.nvars()) throw InvalidArgument("sample_line: variable out of range");
  std::vector<std::size_t> row;
  for (std::size_t e = 0; e < mesh.n_elements(); ++e)
    if (mesh.element(e).y0 == 0.0) row.push_back(e);
  if (row.empty()) throw InvalidArgument("sample_line: no element has its lower edge on y = 0");
  std::sort(row.begin(), row.end(), [&](auto a, auto b) { return mesh.element(a).x0 < mesh.element(b).x0; });
  const int n = mesh.n_nodes();
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) {
    auto it = std::upper_bound(row.begin(), row.end(), x, [&](double v, std::size_t e) { return v < mesh.element(e).x0; });
    if (it == row.begin()) throw InvalidArgument("sample_line: x outside the mesh");
    const std::size_t e = *std::prev(it);
    const auto& g = mesh.element(e);
    if (x > g.x0 + g.h * (1.0 + 1e-12)) throw InvalidArgument("sample_line: x outside the mesh");
    const double xi = std::clamp(2.0 * (x - g.x0) / g.h - 1.0, -1.0, 1.0);
    const auto l = lagrange_row(mesh.basis(), xi);
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += l[i] * field.node(e, i, 0)[var];
    out.push_back(v);
  }
  return out;
}

Slice extract_slice(double t, const DGMesh& mesh, const Field& euler, const Field& gravity) {
  Slice s;
  s.t = t;
  std::vector<std::size_t> row;
  for (std::size_t e = 0; e < mesh.n_elements(); ++e)
    if (mesh.element(e).y0 == 0.0 && mesh.element(e).x0 >= 0.0) row.push_back(e);
  std::sort(row.begin(), row.end(), [&](auto a, auto b) { return mesh.element(a).x0 < mesh.element(b).x0; });
  for (std::size_t e : row)
    for (int i = 0; i < mesh.n_nodes(); ++i) {
      s.x.push_back(mesh.node_x(e, i));
      s.rho.push_back(euler.node(e, i, 0)[0]);
      s.phi.push_back(gravity.n_elements() ? gravity.node(e, i, 0)[0] : 0.0);
    }
  return s;
}

RunResult run_experiment(const RunConfig& c, const SnapshotFn& on_snapshot) {
#ifdef _OPENMP
  if (c.threads > 0) omp_set_num_threads(c.threads);
#endif
  const auto start = Clock::now();
  Setup s = build(c);
  const TestCase& tc = s.tc;
  if (!tc.has_euler) {
    RunResult r = run_steady_gravity(c, s);
    r.experiment = tc.name;
    r.min_level = r.max_level = c.initial_level;
    r.final_elements = s.mesh->n_elements();
    r.total_seconds = seconds_since(start);
    return r;
  }

  RunResult r;
  r.experiment = tc.name;
  r.min_level = r.max_level = c.initial_level;
  const CompressibleEuler eq(tc.gamma);
  double amr_seconds = 0.0;

  Field euler = sample_euler(*s.mesh, tc.euler_initial);
  Field gravity = tc.has_gravity ? sample_gravity(*s.mesh, tc.gravity_initial) : Field(0, c.degree + 1, 3);
  if (c.amr) {
    const auto t0 = Clock::now();
    GravityFn ginit = tc.has_gravity ? tc.gravity_initial : GravityFn([](double, double, double) {
      return HypDiffState{0.0, 0.0, 0.0};
    });
    Field scratch;
    Field& g = tc.has_gravity ? gravity : scratch;
    initial_adapt_cycle(c.amr_policy, *s.mesh, eq, tc.euler_initial, ginit, euler, g, c.amr_initial_cycles);
    if (!tc.has_gravity) gravity = Field(0, c.degree + 1, 3);
    amr_seconds += seconds_since(t0);
  }
  auto track_levels = [&] {
    r.min_level = std::min(r.min_level, s.mesh->tree().min_leaf_level());
    r.max_level = std::max(r.max_level, s.mesh->tree().max_leaf_level());
  };
  r.min_level = s.mesh->tree().min_leaf_level();
  r.max_level = s.mesh->tree().max_leaf_level();

  std::unique_ptr<CoupledSystem> coupled;
  const RKScheme& euler_scheme = scheme_by_name(c.euler_scheme);
  if (tc.has_gravity) {
    CouplingConfig cc;
    cc.strategy = c.coupling;
    cc.G = tc.G;
    cc.rho_background = tc.rho_background;
    cc.tol = c.tol;
    cc.cfl_euler = c.cfl_euler;
    cc.cfl_gravity = c.cfl_gravity;
    cc.euler_scheme = &euler_scheme;
    cc.gravity_scheme = &scheme_by_name(c.gravity_scheme);
    cc.min_subcycles = c.min_subcycles;
    cc.max_subcycles = c.max_subcycles;
    cc.monitor = c.residual_monitor;
    coupled = std::make_unique<CoupledSystem>(*s.euler, *s.gravity, std::move(euler), std::move(gravity), cc);
  }
  Field& u = coupled ? coupled->euler_state() : euler;
  auto grav = [&]() -> const Field& { return coupled ? coupled->gravity_state() : gravity; };

  std::optional<double> jeans_eint0;
  auto record_energies = [&](double t) {
    if (!tc.jeans || !coupled) return;
    const Field phi = coupled->diagnostic_gravity(t);
    EnergySample es{t, bulk_energies(*s.mesh, u, phi, tc.gamma), std::nullopt};
    if (!jeans_eint0) jeans_eint0 = es.computed.internal;
    const auto& jp = *tc.jeans;
    const auto a = jeans_analytic_energies(t, jp, jp.delta0 * jp.rho0);
    es.analytic = BulkEnergies{a.kinetic, *jeans_eint0 + a.internal_deviation, a.potential};
    r.energies.push_back(es);
  };

  RKWorkspace ws;
  const RhsFn euler_rhs = [&](double t, std::span<const double> x, std::span<double> dx) { s.euler->rhs(x, dx, t); };
  double t = 0.0;
  std::size_t step = 0;
  std::size_t next_snapshot = 0;
  try {
    record_energies(0.0);
    while (!landed(t, c.t_final, c.t_final)) {
      if (step >= c.max_steps) throw DivergenceError("step limit " + std::to_string(c.max_steps) + " reached");
      double dt = coupled ? coupled->stable_dt() : stable_dt(*s.euler, u.span(), c.cfl_euler);
      const double target = next_snapshot < c.snapshot_times.size() ? c.snapshot_times[next_snapshot] : c.t_final;
      bool hit = false;
      if (t + dt >= target - 1e-12 * c.t_final) {
        dt = target - t;
        hit = true;
      }
      if (coupled) coupled->advance(t, dt);
      else rk_step(euler_scheme, euler_rhs, u.span(), t, dt, ws);
      t = hit ? target : t + dt;
      ++step;
      r.element_steps += s.mesh->n_elements();
      if (step % static_cast<std::size_t>(c.energy_every) == 0) record_energies(t);
      if (hit && next_snapshot < c.snapshot_times.size()) {
        r.slices.push_back(extract_slice(t, *s.mesh, u, grav()));
        if (on_snapshot) on_snapshot(t, *s.mesh, u, grav());
        ++next_snapshot;
      }
      if (c.amr && step % static_cast<std::size_t>(c.amr_policy.interval) == 0 && !landed(t, c.t_final, c.t_final)) {
        const auto t0 = Clock::now();
        const auto lambda = compute_lambda(c.amr_policy, *s.mesh, u.span(), eq);
        if (coupled) adapt(*s.mesh, coupled->euler_state(), coupled->gravity_state(), lambda);
        else {
          std::array<Field*, 1> f{&u};
          adapt(*s.mesh, f, lambda);
        }
        track_levels();
        amr_seconds += seconds_since(t0);
      }
    }
  } catch (const DivergenceError&) {
    rethrow_with_context(step, t);
  } catch (const InadmissibleState&) {
    rethrow_with_context(step, t);
  }
  if (r.energies.empty() || r.energies.back().t != t) record_energies(t);

  r.t_final = t;
  r.steps = step;
  r.final_elements = s.mesh->n_elements();
  track_levels();
  r.variables = kEulerVars;
  if (tc.has_gravity) r.variables.insert(r.variables.end(), kGravityVars.begin(), kGravityVars.end());
  if (tc.euler_exact) {
    r.errors = errors_against(*s.mesh, u, 4, tc.euler_exact, t);
    if (tc.has_gravity && tc.gravity_exact) {
      // The stored potential belongs to the last stage time, so compare a solve for the final state.
      const Field final_gravity = coupled->diagnostic_gravity(t);
      const auto g = errors_against(*s.mesh, final_gravity, 3, tc.gravity_exact, t);
      r.errors.insert(r.errors.end(), g.begin(), g.end());
    }
  }
  r.total_seconds = seconds_since(start);
  r.amr_seconds = amr_seconds;
  if (coupled) {
    const auto& st = coupled->stats();
    r.total_subcycles = st.total_subcycles;
    r.gravity_solves = st.gravity_solves;
    r.subcycle_histogram = st.histogram;
    r.gravity_seconds = st.gravity_seconds;
  }
  r.euler_seconds = std::max(0.0, r.total_seconds - r.gravity_seconds - r.amr_seconds);
  return r;
}

namespace {

std::filesystem::path ensure_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
  return f;
}

std::string time_tag(double t) { return fmt::format("{:.4f}", t); }

}  // namespace

void write_snapshot(const std::string& dir, double t, const DGMesh& mesh, const Field& euler, const Field& gravity) {
  const auto root = ensure_dir(dir);
  const std::string tag = "snapshot_t" + time_tag(t);
  const bool has_g = gravity.n_elements() == mesh.n_elements() && mesh.n_elements() > 0;
  const int n = mesh.n_nodes();
  {
    auto f = open_out(root / (tag + "_nodes.csv"));
    f << "element,xc,yc,level,h,i,j,x,y";
    for (int v = 0; v < euler.nvars(); ++v) f << ',' << kEulerVars[v];
    if (has_g)
      for (const auto& name : kGravityVars) f << ',' << name;
    f << '\n';
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
      const auto& g = mesh.element(e);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          f << e << ',' << format_number(g.x0 + 0.5 * g.h) << ',' << format_number(g.y0 + 0.5 * g.h) << ','
            << g.level << ',' << format_number(g.h) << ',' << i << ',' << j << ',' << format_number(mesh.node_x(e, i))
            << ',' << format_number(mesh.node_y(e, j));
          for (int v = 0; v < euler.nvars(); ++v) f << ',' << format_number(euler.node(e, i, j)[v]);
          if (has_g)
            for (int v = 0; v < 3; ++v) f << ',' << format_number(gravity.node(e, i, j)[v]);
          f << '\n';
        }
    }
  }
  {
    auto f = open_out(root / (tag + "_levels.csv"));
    f << "element,x0,y0,h,level\n";
    for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
      const auto& g = mesh.element(e);
      f << e << ',' << format_number(g.x0) << ',' << format_number(g.y0) << ',' << format_number(g.h) << ','
        << g.level << '\n';
    }
  }
  {
    const Slice s = extract_slice(t, mesh, euler, has_g ? gravity : Field());
    auto f = open_out(root / (tag + "_slice.csv"));
    f << "x,rho,phi\n";
    for (std::size_t k = 0; k < s.x.size(); ++k)
      f << format_number(s.x[k]) << ',' << format_number(s.rho[k]) << ',' << format_number(s.phi[k]) << '\n';
  }
}

void write_run_outputs(const std::string& dir, const RunConfig& config, const RunResult& r) {
  const auto root = ensure_dir(dir);
  if (!r.errors.empty()) {
    auto f = open_out(root / "errors.csv");
    f << "variable,l2_error\n";
    for (std::size_t v = 0; v < r.errors.size(); ++v) f << r.variables[v] << ',' << format_number(r.errors[v]) << '\n';
  }
  if (!r.energies.empty()) {
    auto f = open_out(root / "energies.csv");
    f << "t,omega_t,E_kin,E_int,E_pot,E_kin_exact,E_int_exact,E_pot_exact\n";
    const double w = config.experiment == "jeans" ? JeansParams{}.omega() : 0.0;
    for (const auto& e : r.energies) {
      f << format_number(e.t) << ',' << format_number(w * e.t) << ',' << format_number(e.computed.kinetic) << ','
        << format_number(e.computed.internal) << ',' << format_number(e.computed.potential);
      if (e.analytic)
        f << ',' << format_number(e.analytic->kinetic) << ',' << format_number(e.analytic->internal) << ','
          << format_number(e.analytic->potential);
      else
        f << ",,,";
      f << '\n';
    }
  }
  if (!r.subcycle_histogram.empty()) {
    auto f = open_out(root / "subcycles.csv");
    f << "subcycles,frequency\n";
    for (const auto& [k, n] : r.subcycle_histogram) f << k << ',' << n << '\n';
  }
  nlohmann::ordered_json j;
  j["experiment"] = r.experiment;
  j["t_final"] = r.t_final;
  j["steps"] = r.steps;
  j["gravity_solves"] = r.gravity_solves;
  j["total_subcycles"] = r.total_subcycles;
  j["final_residual"] = r.final_residual;
  j["elements"] = r.final_elements;
  j["element_steps"] = r.element_steps;
  j["min_level"] = r.min_level;
  j["max_level"] = r.max_level;
  if (!r.errors.empty()) {
    nlohmann::ordered_json e;
    for (std::size_t v = 0; v < r.errors.size(); ++v) e[r.variables[v]] = r.errors[v];
    j["errors"] = e;
  }
  const double total = r.total_seconds > 0.0 ? r.total_seconds : 1.0;
  j["timing"] = {{"euler_seconds", r.euler_seconds},
                 {"gravity_seconds", r.gravity_seconds},
                 {"amr_seconds", r.amr_seconds},
                 {"total_seconds", r.total_seconds},
                 {"euler_share", r.euler_seconds / total},
                 {"gravity_share", r.gravity_seconds / total},
                 {"amr_share", r.amr_seconds / total}};
  auto f = open_out(root / "summary.json");
  f << j.dump(2) << '\n';
}

ConvergenceResult run_convergence(const RunConfig& base, const std::vector<int>& levels) {
  if (levels.size() < 2) throw InvalidArgument("convergence study needs at least two levels");
  ConvergenceResult out;
  const TestCase tc = make_case(base.experiment, base.sedov_h_initial);
  if (!tc.euler_exact && !tc.gravity_exact)
    throw InvalidArgument("experiment '" + base.experiment + "' has no exact solution");
  std::vector<std::vector<double>> errors;
  for (int level : levels) {
    RunConfig c = base;
    c.initial_level = level;
    c.amr = false;
    c.snapshot_times.clear();
    out.runs.push_back(run_experiment(c));
    if (out.runs.back().errors.empty()) throw InvalidArgument("experiment '" + base.experiment + "' has no exact solution");
    errors.push_back(out.runs.back().errors);
    out.levels.push_back(level);
    out.h.push_back((tc.domain_max - tc.domain_min) / std::ldexp(1.0, level));
  }
  out.report = eoc(errors, out.h);
  return out;
}

void write_convergence_outputs(const std::string& dir, const ConvergenceResult& c) {
  const auto root = ensure_dir(dir);
  const auto& vars = c.runs.front().variables;
  {
    auto f = open_out(root / "eoc.csv");
    f << "level,elements,h,subcycles";
    for (const auto& v : vars) f << ",error_" << v;
    for (const auto& v : vars) f << ",eoc_" << v;
    f << '\n';
    for (std::size_t r = 0; r < c.runs.size(); ++r) {
      f << c.levels[r] << ',' << c.runs[r].final_elements << ',' << format_number(c.h[r]) << ','
        << c.runs[r].total_subcycles;
      for (double e : c.runs[r].errors) f << ',' << format_number(e);
      for (std::size_t v = 0; v < vars.size(); ++v) {
        f << ',';
        if (r > 0) f << format_number(c.report.pairs[r - 1][v]);
      }
      f << '\n';
    }
  }
  {
    auto f = open_out(root / "eoc_average.csv");
    f << "variable,average_eoc\n";
    for (std::size_t v = 0; v < vars.size(); ++v) f << vars[v] << ',' << format_number(c.report.average[v]) << '\n';
  }
  auto f = open_out(root / "eoc.txt");
  f << fmt::format("{:>6} {:>10}", "K", "subcycles");
  for (const auto& v : vars) f << fmt::format(" {:>10} {:>6}", v, "EOC");
  f << '\n';
  for (std::size_t r = 0; r < c.runs.size(); ++r) {
    const long k = std::lround(std::sqrt(static_cast<double>(c.runs[r].final_elements)));
    f << fmt::format("{:>6} {:>10}", fmt::format("{}^2", k), c.runs[r].total_subcycles);
    for (std::size_t v = 0; v < vars.size(); ++v)
      f << fmt::format(" {:>10.2e} {:>6}", c.runs[r].errors[v], r > 0 ? fmt::format("{:.2f}", c.report.pairs[r - 1][v]) : "-");
    f << '\n';
  }
  f << fmt::format("{:>17}", "avg");
  for (std::size_t v = 0; v < vars.size(); ++v) f << fmt::format(" {:>10} {:>6.2f}", "", c.report.average[v]);
  f << '\n';
}

}  // namespace hgdg
