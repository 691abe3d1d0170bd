#include "hgdg/runner.hpp"

#include "helpers.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace hgdg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("hgdg_runner_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::vector<std::string> out;
  for (std::string line; std::getline(f, line);) out.push_back(line);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
  if (!s.empty() && s.back() == ',') out.emplace_back();
  return out;
}

RunConfig config_for(const std::string& name) {
  RunConfig c;
  c.experiment = name;
  return c;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HGDG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string config_path(const std::string& name) { return std::string(HGDG_SOURCE_DIR) + "/configs/" + name + ".toml"; }

}  // namespace

TEST_CASE("format_number round-trips") {
  for (double v : {0.0, 1.0, -2.5, 1.0 / 3.0, 6.02214076e23, 2.2250738585072014e-308}) CHECK(std::stod(format_number(v)) == v);
  CHECK(format_number(0.5) == "5.0000000000000000e-01");
}

TEST_CASE("snapshot files of a single element") {
  const auto mesh = testutil::uniform_mesh(0, 3);
  Field u(1, 4, 4), g(1, 4, 3);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) {
      double* s = u.node(0, i, j);
      s[0] = 1.0 + mesh.node_x(0, i);
      s[1] = 0.1;
      s[2] = 0.2;
      s[3] = 2.5;
      g.node(0, i, j)[0] = -mesh.node_x(0, i);
    }
  const auto dir = scratch("single");
  write_snapshot(dir.string(), 0.25, mesh, u, g);

  const auto nodes = read_lines(dir / "snapshot_t0.2500_nodes.csv");
  REQUIRE(nodes.size() == 17);
  CHECK(nodes[0] == "element,xc,yc,level,h,i,j,x,y,rho,rho_v1,rho_v2,rho_e,phi,q1,q2");
  for (std::size_t r = 1; r < nodes.size(); ++r) CHECK(split(nodes[r]).size() == 16);
  const auto first = split(nodes[1]);
  CHECK(std::stod(first[1]) == 0.5);
  CHECK(std::stod(first[4]) == 1.0);
  CHECK(std::stod(first[7]) == 0.0);
  CHECK(std::stod(first[9]) == 1.0);

  const auto levels = read_lines(dir / "snapshot_t0.2500_levels.csv");
  REQUIRE(levels.size() == 2);
  CHECK(levels[0] == "element,x0,y0,h,level");
  CHECK(split(levels[1]).back() == "0");

  const auto slice = read_lines(dir / "snapshot_t0.2500_slice.csv");
  REQUIRE(slice.size() == 5);
  CHECK(slice[0] == "x,rho,phi");
  for (std::size_t r = 1; r < slice.size(); ++r) {
    const auto f = split(slice[r]);
    CHECK(std::stod(f[1]) == doctest::Approx(1.0 + std::stod(f[0])).epsilon(1e-15));
    CHECK(std::stod(f[2]) == doctest::Approx(-std::stod(f[0])).epsilon(1e-15));
  }
  fs::remove_all(dir);
}

TEST_CASE("snapshot without gravity omits gravity columns") {
  const auto mesh = testutil::uniform_mesh(1, 2);
  const Field u(mesh.n_elements(), 3, 4, 1.0);
  const auto dir = scratch("nogravity");
  write_snapshot(dir.string(), 1.0, mesh, u, Field());
  const auto nodes = read_lines(dir / "snapshot_t1.0000_nodes.csv");
  CHECK(nodes.size() == 1 + 4 * 9);
  CHECK(nodes[0] == "element,xc,yc,level,h,i,j,x,y,rho,rho_v1,rho_v2,rho_e");
  const auto slice = read_lines(dir / "snapshot_t1.0000_slice.csv");
  CHECK(slice.size() == 1 + 2 * 3);
  for (std::size_t r = 1; r < slice.size(); ++r) CHECK(std::stod(split(slice[r])[1]) == 1.0);
  fs::remove_all(dir);
}

TEST_CASE("line sampling") {
  const auto mesh = testutil::nonconforming_mesh(3, -1.0, 1.0);
  Field f(mesh.n_elements(), 4, 2);
  for (std::size_t e = 0; e < mesh.n_elements(); ++e)
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) {
        const double x = mesh.node_x(e, i);
        f.node(e, i, j)[0] = x * x * x - x;
        f.node(e, i, j)[1] = 3.0;
      }
  const std::vector<double> xs{-1.0, -0.7, -0.25, 0.0, 0.13, 0.5, 0.999, 1.0};
  const auto cubic = sample_line(mesh, f, 0, xs);
  const auto flat = sample_line(mesh, f, 1, xs);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    CHECK(cubic[k] == doctest::Approx(xs[k] * xs[k] * xs[k] - xs[k]).epsilon(1e-13));
    CHECK(flat[k] == doctest::Approx(3.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(sample_line(mesh, f, 2, xs), InvalidArgument);
  CHECK_THROWS_AS(sample_line(mesh, f, 0, {-1.5}), InvalidArgument);
  CHECK_THROWS_AS(sample_line(mesh, f, 0, {1.5}), InvalidArgument);
}

TEST_CASE("euler manufactured run") {
  RunConfig c = config_for("euler_manufactured");
  c.initial_level = 2;
  const auto r = run_experiment(c);
  CHECK(r.experiment == "euler_manufactured");
  CHECK(r.t_final == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.final_elements == 16);
  CHECK(r.element_steps == 16 * r.steps);
  CHECK(r.total_subcycles == 0);
  REQUIRE(r.errors.size() == 4);
  CHECK(r.variables == std::vector<std::string>{"rho", "rho_v1", "rho_v2", "rho_e"});
  // Magnitude of the published K = 4^2 density error.
  CHECK(r.errors[0] > 1.74e-4 / 2.0);
  CHECK(r.errors[0] < 1.74e-4 * 2.0);
  CHECK(r.errors[1] == doctest::Approx(r.errors[2]).epsilon(1e-10));
}

TEST_CASE("run outputs are deterministic") {
  RunConfig c = config_for("coupled_manufactured");
  c.initial_level = 1;
  c.t_final = 0.1;
  c.gravity_scheme = "rk3s*";
  c.snapshot_times = {0.05, 0.1};
  std::vector<fs::path> dirs{scratch("det_a"), scratch("det_b")};
  std::vector<RunResult> results;
  for (const auto& d : dirs) {
    int snaps = 0;
    results.push_back(run_experiment(c, [&](double t, const DGMesh& m, const Field& u, const Field& g) {
      ++snaps;
      write_snapshot(d.string(), t, m, u, g);
    }));
    CHECK(snaps == 2);
    write_run_outputs(d.string(), c, results.back());
  }
  for (const char* name : {"errors.csv", "subcycles.csv", "snapshot_t0.0500_nodes.csv", "snapshot_t0.1000_nodes.csv",
                           "snapshot_t0.1000_slice.csv", "snapshot_t0.1000_levels.csv"}) {
    INFO(name);
    REQUIRE(fs::exists(dirs[0] / name));
    CHECK(slurp(dirs[0] / name) == slurp(dirs[1] / name));
  }

  const auto hist = read_lines(dirs[0] / "subcycles.csv");
  CHECK(hist[0] == "subcycles,frequency");
  std::size_t solves = 0, total = 0;
  for (std::size_t k = 1; k < hist.size(); ++k) {
    const auto f = split(hist[k]);
    solves += std::stoul(f[1]);
    total += std::stoul(f[0]) * std::stoul(f[1]);
  }
  CHECK(solves == results[0].gravity_solves);
  CHECK(total == results[0].total_subcycles);

  const auto errors = read_lines(dirs[0] / "errors.csv");
  CHECK(errors[0] == "variable,l2_error");
  CHECK(errors.size() == 8);

  const auto j = nlohmann::json::parse(slurp(dirs[0] / "summary.json"));
  CHECK(j["experiment"] == "coupled_manufactured");
  CHECK(j["steps"].get<std::size_t>() == results[0].steps);
  CHECK(j["total_subcycles"].get<std::size_t>() == results[0].total_subcycles);
  CHECK(j["errors"].size() == 7);
  const auto& t = j["timing"];
  CHECK(t["euler_share"].get<double>() + t["gravity_share"].get<double>() + t["amr_share"].get<double>() <= 1.0 + 1e-12);
  for (const auto& d : dirs) fs::remove_all(d);
}

TEST_CASE("jeans energies file") {
  RunConfig c = config_for("jeans");
  c.initial_level = 2;
  c.t_final = 0.02;
  c.tol = 1e-4;
  c.energy_every = 2;
  const auto r = run_experiment(c);
  REQUIRE(r.energies.size() >= 2);
  CHECK(r.energies.front().t == 0.0);
  CHECK(r.energies.back().t == doctest::Approx(0.02).epsilon(1e-12));
  const auto dir = scratch("jeans");
  write_run_outputs(dir.string(), c, r);
  const auto lines = read_lines(dir / "energies.csv");
  CHECK(lines[0] == "t,omega_t,E_kin,E_int,E_pot,E_kin_exact,E_int_exact,E_pot_exact");
  CHECK(lines.size() == r.energies.size() + 1);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto f = split(lines[k]);
    REQUIRE(f.size() == 8);
    CHECK(std::stod(f[1]) == doctest::Approx(JeansParams{}.omega() * std::stod(f[0])));
    CHECK_FALSE(f[5].empty());
  }
  CHECK(fs::exists(dir / "subcycles.csv"));
  CHECK_FALSE(fs::exists(dir / "errors.csv"));
  fs::remove_all(dir);
}

TEST_CASE("convergence outputs") {
  RunConfig c = config_for("euler_manufactured");
  c.t_final = 0.1;
  const auto conv = run_convergence(c, {1, 2});
  REQUIRE(conv.runs.size() == 2);
  CHECK(conv.h == std::vector<double>{1.0, 0.5});
  CHECK(conv.report.pairs.size() == 1);

  const auto dir = scratch("conv");
  write_convergence_outputs(dir.string(), conv);
  const auto csv = read_lines(dir / "eoc.csv");
  REQUIRE(csv.size() == 3);
  CHECK(csv[0] ==
        "level,elements,h,subcycles,error_rho,error_rho_v1,error_rho_v2,error_rho_e,eoc_rho,eoc_rho_v1,eoc_rho_v2,"
        "eoc_rho_e");
  CHECK(split(csv[1]).size() == 12);
  CHECK(split(csv[1])[8].empty());
  CHECK(std::stod(split(csv[2])[8]) == doctest::Approx(conv.report.pairs[0][0]));
  const auto avg = read_lines(dir / "eoc_average.csv");
  CHECK(avg[0] == "variable,average_eoc");
  CHECK(avg.size() == 5);
  const auto txt = read_lines(dir / "eoc.txt");
  CHECK(txt.size() == 4);
  CHECK(txt[1].find("2^2") != std::string::npos);
  fs::remove_all(dir);

  CHECK_THROWS_AS(run_convergence(c, {2}), InvalidArgument);
  CHECK_THROWS_AS(run_convergence(config_for("sedov"), {1, 2}), InvalidArgument);
}

TEST_CASE("cli exit codes") {
  const auto out = scratch("cli");
  CHECK(run_cli("run " + config_path("euler_manufactured") + " --out " + out.string() +
                " --override solver.t_final=0.05") == 0);
  CHECK(fs::exists(out / "errors.csv"));
  CHECK(fs::exists(out / "summary.json"));
  CHECK(run_cli("convergence " + config_path("euler_manufactured") + " --levels 1,2 --out " + out.string() +
                " --override solver.t_final=0.05") == 0);
  CHECK(fs::exists(out / "eoc.csv"));

  CHECK(run_cli("") == 2);
  CHECK(run_cli("run /nonexistent/config.toml") == 2);
  CHECK(run_cli("run " + config_path("euler_manufactured") + " --override solver.bogus=1") == 2);
  CHECK(run_cli("run " + config_path("euler_manufactured") + " --override mesh.degree=0") == 2);
  CHECK(run_cli("convergence " + config_path("euler_manufactured") + " --levels 2") == 2);
  CHECK(run_cli("convergence " + config_path("euler_manufactured") + " --levels 2,x") == 2);
  CHECK(run_cli("convergence " + config_path("sedov") + " --levels 1,2 --out " + out.string()) == 2);
  CHECK(run_cli("run " + config_path("hypdiff_manufactured") + " --out " + out.string() +
                " --override coupling.max_subcycles=5") == 3);
  fs::remove_all(out);
}
