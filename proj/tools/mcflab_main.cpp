// Batch driver: every pipeline as a subcommand with reproducible configs and
// CSV/gnuplot outputs.  Exit codes: 0 success, 2 validation error, 3
// numerical failure.  All algorithms are deterministic (seedless), so a
// re-run with the same config reproduces every output byte for byte.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mcflab/common.hpp"
#include "mcflab/entropy.hpp"
#include "mcflab/flow.hpp"
#include "mcflab/io.hpp"
#include "mcflab/moving_plane.hpp"
#include "mcflab/neck.hpp"
#include "mcflab/renormalized.hpp"
#include "mcflab/solitons.hpp"
#include "mcflab/spectral.hpp"

namespace fs = std::filesystem;
using namespace mcflab;

namespace {

// ---------------------------------------------------------------- plumbing

fs::path out_root() {
  const char* env = std::getenv("MCFLAB_OUT_DIR");
  return env && *env ? fs::path(env) : fs::path(".");
}

// Expand `--config FILE` (flat `key = value` lines, '#' comments) into
// ordinary long-option tokens appended after the command line.  Keys given
// explicitly on the command line win; keys that match no option of the
// chosen subcommand are rejected by the parser afterwards.
std::vector<std::string> expand_config_tokens(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string cfg;
  std::set<std::string> given;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config") {
      if (i + 1 >= args.size())
        throw std::invalid_argument("--config needs a file argument");
      cfg = args[++i];
      continue;
    }
    if (a.rfind("--config=", 0) == 0) {
      cfg = a.substr(9);
      continue;
    }
    if (a.rfind("--", 0) == 0 && a.size() > 2) {
      const std::size_t eq = a.find('=');
      given.insert(a.substr(2, eq == std::string::npos ? eq : eq - 2));
    }
  }
  if (cfg.empty()) return args;

  std::ifstream in(cfg, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config file " + cfg);
  const auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument(cfg + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
    if (given.count(key)) continue;
    args.push_back("--" + key);
    args.push_back(trim(line.substr(eq + 1)));
  }
  return args;
}

std::vector<std::pair<std::string, std::string>> resolved_config(
    const CLI::App* sub) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("subcommand", sub->get_name());
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config") continue;
    std::string val;
    if (!opt->results().empty()) {
      for (std::size_t i = 0; i < opt->results().size(); ++i) {
        if (i) val += ",";
        val += opt->results()[i];
      }
    } else {
      val = opt->get_default_str();
    }
    kv.emplace_back(name, val);
  }
  return kv;
}

// Session directory under the output root; the fully resolved config is
// echoed next to the outputs before any work happens.
OutputSession start_session(const CLI::App* sub, const std::string& out_name) {
  OutputSession s(out_root() / out_name);
  s.write_key_value_file("config.txt", resolved_config(sub));
  return s;
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::invalid_argument("csv column '" + name + "' not found");
  }
};

Csv read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  Csv csv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (csv.header.empty())
      csv.header = std::move(cells);
    else
      csv.rows.push_back(std::move(cells));
  }
  if (csv.header.empty())
    throw std::invalid_argument("empty csv: " + path.string());
  return csv;
}

double num(const std::string& cell) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("bad numeric cell '" + cell + "'");
  }
}

std::vector<double> column(const Csv& csv, const std::string& name) {
  const std::size_t c = csv.col(name);
  std::vector<double> v;
  v.reserve(csv.rows.size());
  for (const auto& row : csv.rows) {
    if (c >= row.size()) throw std::invalid_argument("short csv row");
    v.push_back(num(row[c]));
  }
  return v;
}

// Deterministic fan-out: item i writes only slot i, so the output order is
// independent of the worker count.
template <class F>
void parallel_map(int jobs, std::size_t count, F&& fn) {
  jobs = std::max(1, std::min(jobs, 64));
  if (jobs == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int k = 0; k < jobs; ++k)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) fn(i);
    });
  for (auto& t : pool) t.join();
}

// ------------------------------------------------- trajectory round-trip

std::string end_name(EndCondition e) {
  switch (e) {
    case EndCondition::Cap: return "cap";
    case EndCondition::Neumann: return "neumann";
    case EndCondition::Dirichlet: return "dirichlet";
  }
  return "?";
}

EndCondition end_from(const std::string& s) {
  if (s == "cap") return EndCondition::Cap;
  if (s == "neumann") return EndCondition::Neumann;
  if (s == "dirichlet") return EndCondition::Dirichlet;
  throw std::invalid_argument("bad end condition '" + s + "'");
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::TimeLimit: return "time-limit";
    case Termination::NeckRadiusThreshold: return "neck-radius-threshold";
    case Termination::CapCollapse: return "cap-collapse";
  }
  return "?";
}

Termination termination_from(const std::string& s) {
  if (s == "time-limit") return Termination::TimeLimit;
  if (s == "neck-radius-threshold") return Termination::NeckRadiusThreshold;
  if (s == "cap-collapse") return Termination::CapCollapse;
  throw std::invalid_argument("bad termination '" + s + "'");
}

void write_trajectory(OutputSession& s, const FlowTrajectory& traj, int n) {
  const AxialGrid& grid = traj.snapshots.front().curve.grid;
  std::vector<std::pair<std::string, std::string>> meta = {
      {"n", std::to_string(n)},
      {"dz", fmt17(grid.spacing)},
      {"z_lo", fmt17(grid.z_lo())},
      {"z_hi", fmt17(grid.z_hi())},
      {"nodes", std::to_string(grid.size())},
      {"snapshots", std::to_string(traj.snapshots.size())},
      {"termination", termination_name(traj.termination)},
      {"final_time", fmt17(traj.final_time)},
  };
  if (traj.singular) {
    meta.emplace_back("z_star", fmt17(traj.singular->z_star));
    meta.emplace_back("t_star", fmt17(traj.singular->t_star));
  }
  s.write_key_value_file("trajectory.txt", meta);

  {
    CsvWriter w(s.path_for("snapshots.csv"),
                {"snapshot", "t", "i_lo", "i_hi", "left", "right", "cap_left",
                 "cap_right"});
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
      const Snapshot& sn = traj.snapshots[k];
      w.raw_row({std::to_string(k), fmt17(sn.t), std::to_string(sn.curve.i_lo),
                 std::to_string(sn.curve.i_hi), end_name(sn.curve.left),
                 end_name(sn.curve.right), fmt17(sn.curve.cap_left),
                 fmt17(sn.curve.cap_right)});
    }
    w.close();
    s.note("snapshots.csv");
  }
  {
    CsvWriter w(s.path_for("profiles.csv"), {"snapshot", "z", "r"});
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
      const ProfileCurve& p = traj.snapshots[k].curve;
      for (std::size_t i = p.i_lo; i <= p.i_hi; ++i)
        w.raw_row({std::to_string(k), fmt17(p.grid.z[i]), fmt17(p.r[i])});
    }
    w.close();
    s.note("profiles.csv");
  }
  {
    CsvWriter w(s.path_for("steps.csv"),
                {"t", "dt", "min_r", "max_r", "max_curvature"});
    for (const StepStats& st : traj.steps)
      w.row({st.t, st.dt, st.min_r, st.max_r, st.max_curvature});
    w.close();
    s.note("steps.csv");
  }
}

FlowTrajectory read_trajectory(const fs::path& dir, int& n_out) {
  const auto meta = read_key_value(dir / "trajectory.txt");
  const auto need = [&](const std::string& key) -> const std::string& {
    const auto it = meta.find(key);
    if (it == meta.end())
      throw std::invalid_argument("trajectory.txt missing key '" + key + "'");
    return it->second;
  };
  const int n = int(num(need("n")));
  const AxialGrid grid =
      AxialGrid::uniform(num(need("z_lo")), num(need("z_hi")), num(need("dz")));
  if (grid.size() != std::size_t(num(need("nodes"))))
    throw std::invalid_argument("trajectory grid does not match its metadata");

  FlowTrajectory traj;
  traj.termination = termination_from(need("termination"));
  traj.final_time = num(need("final_time"));
  if (meta.count("z_star"))
    traj.singular = SingularEstimate{num(need("z_star")), num(need("t_star"))};

  const Csv snaps = read_csv(dir / "snapshots.csv");
  traj.snapshots.resize(snaps.rows.size());
  for (std::size_t k = 0; k < snaps.rows.size(); ++k) {
    const auto& row = snaps.rows[k];
    Snapshot& sn = traj.snapshots[k];
    sn.t = num(row[snaps.col("t")]);
    sn.curve.n = n;
    sn.curve.grid = grid;
    sn.curve.r.assign(grid.size(), 0.0);
    sn.curve.i_lo = std::size_t(num(row[snaps.col("i_lo")]));
    sn.curve.i_hi = std::size_t(num(row[snaps.col("i_hi")]));
    sn.curve.left = end_from(row[snaps.col("left")]);
    sn.curve.right = end_from(row[snaps.col("right")]);
    sn.curve.cap_left = num(row[snaps.col("cap_left")]);
    sn.curve.cap_right = num(row[snaps.col("cap_right")]);
  }

  const Csv prof = read_csv(dir / "profiles.csv");
  const std::size_t ck = prof.col("snapshot"), cz = prof.col("z"),
                    cr = prof.col("r");
  std::vector<std::size_t> fill(traj.snapshots.size(), 0);
  for (const auto& row : prof.rows) {
    const std::size_t k = std::size_t(num(row[ck]));
    if (k >= traj.snapshots.size())
      throw std::invalid_argument("profiles.csv refers to unknown snapshot");
    ProfileCurve& p = traj.snapshots[k].curve;
    const std::size_t i = p.i_lo + fill[k]++;
    if (i > p.i_hi || std::abs(num(row[cz]) - grid.z[i]) > 1e-9)
      throw std::invalid_argument("profiles.csv rows out of order");
    p.r[i] = num(row[cr]);
  }
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    if (fill[k] != traj.snapshots[k].curve.active_count())
      throw std::invalid_argument("profiles.csv incomplete snapshot");
    traj.snapshots[k].curve.validate();
  }

  if (fs::exists(dir / "steps.csv")) {
    const Csv st = read_csv(dir / "steps.csv");
    for (const auto& row : st.rows) {
      StepStats x;
      x.t = num(row[st.col("t")]);
      x.dt = num(row[st.col("dt")]);
      x.min_r = num(row[st.col("min_r")]);
      x.max_r = num(row[st.col("max_r")]);
      x.max_curvature = num(row[st.col("max_curvature")]);
      traj.steps.push_back(x);
    }
  }
  n_out = n;
  return traj;
}

// ------------------------------------------------------------ subcommands

struct SimulateArgs {
  std::string initial = "dumbbell", out = "out_simulate";
  int n = 3, snapshot_every = 50;
  double dz = 0.01, tmax = 1.0;
  double neck = 0.35, bulge = 0.65, halflength = 4.0;
  double radius = 1.0, center = 0.0, zlo = -4.0, zhi = 4.0;
};

int run_simulate(const CLI::App* sub, const SimulateArgs& a) {
  ProfileCurve p0;
  if (a.initial == "dumbbell")
    p0 = make_dumbbell(a.n, a.dz, a.neck, a.bulge, a.halflength);
  else if (a.initial == "sphere")
    p0 = make_sphere(a.n, a.radius, a.center, a.dz);
  else
    p0 = make_cylinder(a.n, a.radius, a.zlo, a.zhi, a.dz);

  FlowConfig cfg;
  cfg.t_max = a.tmax;
  cfg.snapshot_every = a.snapshot_every;
  const FlowTrajectory traj = run_to_singularity(p0, cfg);

  OutputSession s = start_session(sub, a.out);
  write_trajectory(s, traj, a.n);
  std::vector<std::pair<std::string, std::string>> res = {
      {"termination", termination_name(traj.termination)},
      {"final_time", fmt17(traj.final_time)},
      {"steps", std::to_string(traj.steps.size())},
      {"snapshots", std::to_string(traj.snapshots.size())},
  };
  std::cout << "termination=" << termination_name(traj.termination)
            << " final_time=" << fmt17(traj.final_time);
  if (traj.singular) {
    res.emplace_back("z_star", fmt17(traj.singular->z_star));
    res.emplace_back("t_star", fmt17(traj.singular->t_star));
    std::cout << " z_star=" << fmt17(traj.singular->z_star)
              << " t_star=" << fmt17(traj.singular->t_star);
  }
  std::cout << "\n";
  s.write_key_value_file("result.txt", res);
  s.write_gnuplot("steps.csv", "neck radius and curvature", 1, {3, 5});
  s.finalize();
  return 0;
}

struct RescaleArgs {
  std::string traj, out = "out_rescale";
  double z0 = 0.0, t0 = std::nan("");
  double tau0 = -6.0, tau1 = -1.0, dtau = 0.25;
  double window = 10.0, rho = 5.0;
};

int run_rescale(const CLI::App* sub, const RescaleArgs& a) {
  int n = 0;
  const FlowTrajectory traj = read_trajectory(a.traj, n);
  double t0 = a.t0;
  if (std::isnan(t0)) {
    if (!traj.singular)
      throw std::invalid_argument(
          "--t0 required: the trajectory carries no pinch-time estimate");
    t0 = traj.singular->t_star;
  }
  const AxialGrid out_grid = AxialGrid::uniform(-a.window, a.window,
                                                traj.snapshots.front().curve.grid.spacing);
  SpacetimeCenter center;
  center.z0 = a.z0;
  center.t0 = t0;
  const RenormalizedTrajectory rt =
      rescale_about(traj, center, a.tau0, a.tau1, a.dtau, out_grid);

  OutputSession s = start_session(sub, a.out);
  {
    CsvWriter w(s.path_for("slices.csv"), {"tau", "t", "z", "u0"});
    for (const RenormalizedSlice& sl : rt.slices)
      for (std::size_t i = 0; i < sl.graph.grid.size(); ++i)
        w.row({sl.tau, sl.t, sl.graph.grid.z[i], sl.graph.u0[i]});
    w.close();
    s.note("slices.csv");
  }
  std::vector<std::string> header = {"tau", "U_plus", "U_zero", "U_minus",
                                     "a", "c", "alpha0"};
  for (int i = 1; i <= n; ++i) header.push_back("b_" + std::to_string(i));
  for (int i = 1; i <= n; ++i) header.push_back("alpha_" + std::to_string(i));
  std::size_t projected = 0, skipped = 0;
  {
    CsvWriter w(s.path_for("modes.csv"), header);
    for (const RenormalizedSlice& sl : rt.slices) {
      try {
        const SpectralCoefficients sc = project_modes(sl.graph, a.rho);
        std::vector<double> row = {sl.tau, sc.U_plus, sc.U_zero, sc.U_minus,
                                   sc.a, sc.c, sc.alpha0};
        for (int i = 0; i < n; ++i)
          row.push_back(sc.b.empty() ? 0.0 : sc.b[i]);
        for (int i = 0; i < n; ++i) row.push_back(sc.alpha[i]);
        w.row(row);
        ++projected;
      } catch (const TruncationRiskError&) {
        ++skipped;  // window too short for the Gaussian quadrature
      }
    }
    w.close();
    s.note("modes.csv");
  }
  s.write_key_value_file(
      "result.txt",
      {{"slices", std::to_string(rt.slices.size())},
       {"projected", std::to_string(projected)},
       {"skipped_short_window", std::to_string(skipped)},
       {"t0", fmt17(t0)}});
  s.write_gnuplot("modes.csv", "mode energies", 1, {2, 3, 4});
  s.finalize();
  std::cout << "slices=" << rt.slices.size() << " projected=" << projected
            << "\n";
  return 0;
}

struct ProjectArgs {
  std::string input, out = "out_project";
  int n = 3;
  double rho = 5.0;
};

int run_project(const CLI::App* sub, const ProjectArgs& a) {
  const Csv csv = read_csv(a.input);
  CylinderGraph g;
  g.n = a.n;
  const std::vector<double> z = column(csv, "z");
  if (z.size() < 2) throw std::invalid_argument("graph csv needs >= 2 rows");
  g.grid = AxialGrid::uniform(z.front(), z.back(),
                              (z.back() - z.front()) / double(z.size() - 1));
  g.u0 = column(csv, "u0");
  bool mode1 = true;
  for (int i = 1; i <= a.n && mode1; ++i)
    mode1 = std::count(csv.header.begin(), csv.header.end(),
                       "u1_" + std::to_string(i)) > 0;
  if (mode1)
    for (int i = 1; i <= a.n; ++i)
      g.u1.push_back(column(csv, "u1_" + std::to_string(i)));

  const SpectralCoefficients sc = project_modes(g, a.rho);
  OutputSession s = start_session(sub, a.out);
  std::vector<std::pair<std::string, std::string>> res = {
      {"U_plus", fmt17(sc.U_plus)},   {"U_zero", fmt17(sc.U_zero)},
      {"U_minus", fmt17(sc.U_minus)}, {"a", fmt17(sc.a)},
      {"c", fmt17(sc.c)},             {"alpha0", fmt17(sc.alpha0)},
  };
  for (int i = 0; i < a.n; ++i) {
    res.emplace_back("b_" + std::to_string(i + 1),
                     fmt17(sc.b.empty() ? 0.0 : sc.b[i]));
    res.emplace_back("alpha_" + std::to_string(i + 1), fmt17(sc.alpha[i]));
  }
  s.write_key_value_file("result.txt", res);
  s.finalize();
  std::cout << "U_plus=" << fmt17(sc.U_plus) << " U_zero=" << fmt17(sc.U_zero)
            << " U_minus=" << fmt17(sc.U_minus) << "\n";
  return 0;
}

struct SolitonArgs {
  std::string out = "out_soliton";
  int n = 3;
  double rmax = 1000.0, tol = 1e-8;
};

int run_soliton(const CLI::App* sub, const SolitonArgs& a) {
  const SolitonProfile bowl = solve_bowl(a.n, a.rmax, a.tol);
  OutputSession s = start_session(sub, a.out);
  {
    CsvWriter w(s.path_for("bowl.csv"), {"r", "u", "du"});
    for (std::size_t i = 0; i < bowl.x.size(); ++i)
      w.row({bowl.x[i], bowl.u[i], bowl.du[i]});
    w.close();
    s.note("bowl.csv");
  }
  const double far = bowl.u.back() * 2.0 * (a.n - 1) / (bowl.x.back() * bowl.x.back());
  const double r_tip = 0.01;
  const double tip_ratio = bowl_height(bowl, r_tip) / (r_tip * r_tip / (2.0 * a.n));
  s.write_key_value_file("result.txt",
                         {{"residual", fmt17(bowl.residual)},
                          {"speed", fmt17(bowl.speed)},
                          {"far_field_ratio", fmt17(far)},
                          {"tip_series_ratio", fmt17(tip_ratio)}});
  s.write_gnuplot("bowl.csv", "bowl soliton profile", 1, {2});
  s.finalize();
  std::cout << "residual=" << fmt17(bowl.residual) << " far_field_ratio="
            << fmt17(far) << " tip_series_ratio=" << fmt17(tip_ratio) << "\n";
  return 0;
}

struct ShrinkerArgs {
  std::string kind = "capped", out = "out_shrinker";
  int n = 3;
  double height = 8.0, tol = 1e-10;
};

int run_shrinker(const CLI::App* sub, const ShrinkerArgs& a) {
  ShrinkerKind kind;
  if (a.kind == "cylinder") kind = ShrinkerKind::Cylinder;
  else if (a.kind == "sphere") kind = ShrinkerKind::Sphere;
  else kind = ShrinkerKind::CapClosed;
  const ShrinkerProfile sp = solve_shrinker_profile(a.n, kind, a.tol, a.height);

  OutputSession s = start_session(sub, a.out);
  {
    CsvWriter w(s.path_for("shrinker.csv"), {"z", "r"});
    for (std::size_t i = 0; i < sp.z.size(); ++i) w.row({sp.z[i], sp.r[i]});
    w.close();
    s.note("shrinker.csv");
  }
  std::vector<std::pair<std::string, std::string>> res = {
      {"kind", a.kind},
      {"n", std::to_string(a.n)},
      {"residual", fmt17(sp.residual)},
      {"closure_height", fmt17(sp.closure_height)},
      {"equator_radius", fmt17(sp.equator_radius)},
  };
  if (kind == ShrinkerKind::CapClosed)
    res.emplace_back("construction", "cap-seeded");
  s.write_key_value_file("result.txt", res);
  s.write_gnuplot("shrinker.csv", "shrinker profile", 1, {2});
  s.finalize();
  std::cout << "residual=" << fmt17(sp.residual)
            << " equator_radius=" << fmt17(sp.equator_radius) << "\n";
  return 0;
}

struct EntropyArgs {
  std::string model, input, out = "out_entropy";
  int n = 3;
};

int run_entropy(const CLI::App* sub, const EntropyArgs& a) {
  OutputSession s = start_session(sub, a.out);
  if (!a.model.empty()) {
    ModelKind kind;
    if (a.model == "plane") kind = ModelKind::Plane;
    else if (a.model == "sphere") kind = ModelKind::Sphere;
    else kind = ModelKind::Cylinder;
    const double v = entropy_of_model(kind, a.n);
    s.write_key_value_file("result.txt",
                           {{"model", a.model},
                            {"n", std::to_string(a.n)},
                            {"entropy", fmt17(v)}});
    s.finalize();
    std::cout << "entropy=" << fmt17(v) << "\n";
    return 0;
  }
  const Csv csv = read_csv(a.input);
  const EntropyResult r =
      entropy_of_profile(column(csv, "z"), column(csv, "r"), a.n);
  s.write_key_value_file(
      "result.txt",
      {{"entropy", fmt17(r.value)},
       {"z0", fmt17(r.z0)},
       {"lambda", fmt17(r.lambda)},
       {"lambda_on_boundary", r.lambda_on_boundary ? "true" : "false"},
       {"end_weight", fmt17(r.end_weight)}});
  s.finalize();
  std::cout << "entropy=" << fmt17(r.value) << " z0=" << fmt17(r.z0)
            << " lambda=" << fmt17(r.lambda) << "\n";
  return 0;
}

struct DensityArgs {
  std::string traj, out = "out_density";
  double z0 = 0.0, rho0 = 0.0, t0 = std::nan("");
};

int run_density(const CLI::App* sub, const DensityArgs& a) {
  int n = 0;
  const FlowTrajectory traj = read_trajectory(a.traj, n);
  double t0 = a.t0;
  if (std::isnan(t0)) {
    if (!traj.singular)
      throw std::invalid_argument(
          "--t0 required: the trajectory carries no pinch-time estimate");
    t0 = traj.singular->t_star;
  }
  const DensitySeries d = huisken_density(traj, a.z0, a.rho0, t0);

  OutputSession s = start_session(sub, a.out);
  {
    CsvWriter w(s.path_for("density.csv"), {"t", "lambda", "theta"});
    for (std::size_t i = 0; i < d.t.size(); ++i)
      w.row({d.t[i], t0 - d.t[i], d.theta[i]});
    w.close();
    s.note("density.csv");
  }
  s.write_key_value_file(
      "result.txt",
      {{"limit", fmt17(d.limit)},
       {"max_step_increase", fmt17(d.max_step_increase)},
       {"points", std::to_string(d.t.size())},
       {"t0", fmt17(t0)}});
  s.write_gnuplot("density.csv", "gaussian density", 1, {3});
  s.finalize();
  std::cout << "limit=" << fmt17(d.limit)
            << " max_step_increase=" << fmt17(d.max_step_increase) << "\n";
  return 0;
}

struct NeckScanArgs {
  std::string traj, out = "out_neck_scan";
  double z0 = std::nan(""), t0 = std::nan(""), eps = 0.05;
};

int run_neck_scan(const CLI::App* sub, const NeckScanArgs& a) {
  int n = 0;
  const FlowTrajectory traj = read_trajectory(a.traj, n);
  double z0 = a.z0, t0 = a.t0;
  if (std::isnan(z0) || std::isnan(t0)) {
    if (!traj.singular)
      throw std::invalid_argument(
          "--z0/--t0 required: the trajectory carries no pinch estimate");
    if (std::isnan(z0)) z0 = traj.singular->z_star;
    if (std::isnan(t0)) t0 = traj.singular->t_star;
  }
  const CylindricalScale cs = cylindrical_scale(traj, z0, t0, a.eps);

  OutputSession s = start_session(sub, a.out);
  s.write_key_value_file(
      "result.txt",
      {{"decided", cs.decided ? "true" : "false"},
       {"j", std::to_string(cs.j)},
       {"Z", fmt17(cs.Z)},
       {"have_evaluable", cs.have_evaluable ? "true" : "false"},
       {"j_evaluable_max", std::to_string(cs.j_evaluable_max)},
       {"saturated", cs.saturated ? "true" : "false"},
       {"z0", fmt17(z0)},
       {"t0", fmt17(t0)}});
  s.finalize();
  if (cs.decided)
    std::cout << "Z=" << fmt17(cs.Z) << " (j=" << cs.j
              << (cs.saturated ? ", saturated" : "") << ")\n";
  else
    std::cout << "undecided\n";
  return 0;
}

struct NeutralOdeArgs {
  std::string out = "out_neutral_ode";
  int n = 3;
  double tau0 = -10000.0, tau1 = -10.0, dtau = 0.05;
  double alpha0 = std::nan("");
  std::vector<double> alpha;
};

int run_neutral_ode(const CLI::App* sub, const NeutralOdeArgs& a) {
  const double A = neutral_ode_A(a.n);
  const double a0 = std::isnan(a.alpha0) ? 1.0 / (2.0 * A * a.tau0) : a.alpha0;
  const NeutralODEState s0 = make_neutral_ode_state(a.n, a0, a.alpha);
  const NeutralODETrajectory tr =
      integrate_neutral_ode(s0, a.tau0, a.tau1, a.dtau);

  OutputSession s = start_session(sub, a.out);
  std::vector<std::string> header = {"tau", "alpha0", "branch"};
  for (int i = 1; i <= a.n; ++i) header.push_back("alpha_" + std::to_string(i));
  double worst = 0.0;
  {
    CsvWriter w(s.path_for("alpha.csv"), header);
    for (std::size_t k = 0; k < tr.tau.size(); ++k) {
      const double branch = 1.0 / (2.0 * A * tr.tau[k]);
      worst = std::max(worst, std::abs(tr.alpha0[k] / branch - 1.0));
      std::vector<double> row = {tr.tau[k], tr.alpha0[k], branch};
      for (int i = 0; i < a.n; ++i) row.push_back(tr.alpha[i][k]);
      w.row(row);
    }
    w.close();
    s.note("alpha.csv");
  }
  s.write_key_value_file(
      "result.txt",
      {{"A", fmt17(A)},
       {"ode_constant", fmt17(-1.0 / (2.0 * A))},
       {"display_constant", fmt17(rotation_theorem_constant(a.n))},
       {"max_rel_branch_dev", fmt17(worst)},
       {"samples", std::to_string(tr.tau.size())}});
  s.write_gnuplot("alpha.csv", "neutral-mode coefficients", 1, {2, 3});
  s.finalize();
  std::cout << "tau*alpha0 constant -1/(2A)=" << fmt17(-1.0 / (2.0 * A))
            << "  per-|tau| display constant -1/A="
            << fmt17(rotation_theorem_constant(a.n))
            << "  max_rel_branch_dev=" << fmt17(worst) << "\n";
  return 0;
}

struct DichotomyArgs {
  std::string input, out = "out_dichotomy";
};

int run_dichotomy(const CLI::App* sub, const DichotomyArgs& a) {
  const Csv csv = read_csv(a.input);
  ModeEnergyTrack track;
  track.tau = column(csv, "tau");
  track.U_plus = column(csv, "U_plus");
  track.U_zero = column(csv, "U_zero");
  track.U_minus = column(csv, "U_minus");
  const DichotomyResult r = classify_dichotomy(track);

  OutputSession s = start_session(sub, a.out);
  const char* verdict = r.verdict == DichotomyVerdict::PlusDominant
                            ? "plus-dominant"
                            : r.verdict == DichotomyVerdict::NeutralDominant
                                  ? "neutral-dominant"
                                  : "undecided";
  s.write_key_value_file("result.txt",
                         {{"verdict", verdict},
                          {"kappa", fmt17(r.kappa)},
                          {"kappa_early", fmt17(r.kappa_early)},
                          {"kappa_late", fmt17(r.kappa_late)},
                          {"eta", fmt17(r.eta)},
                          {"eta_early", fmt17(r.eta_early)},
                          {"eta_late", fmt17(r.eta_late)}});
  s.finalize();
  std::cout << r.summary() << "\n";
  return 0;
}

struct SymmetryArgs {
  std::string section, traj, sweep, out = "out_symmetry";
  int axis = 0, snapshot = -1;
  double tol = 1e-6;
};

int run_symmetry(const CLI::App* sub, const SymmetryArgs& a, int jobs) {
  CrossSection sec;
  if (!a.section.empty()) {
    const Csv csv = read_csv(a.section);
    sec = make_cross_section(column(csv, "x"), column(csv, "y"));
  } else {
    int n = 0;
    const FlowTrajectory traj = read_trajectory(a.traj, n);
    const std::size_t k = a.snapshot < 0 ? traj.snapshots.size() - 1
                                         : std::size_t(a.snapshot);
    if (k >= traj.snapshots.size())
      throw std::invalid_argument("--snapshot out of range");
    sec = section_of_profile(traj.snapshots[k].curve);
  }

  OutputSession s = start_session(sub, a.out);
  const SymmetryPlane sp = find_symmetry_plane(sec, a.axis, a.tol);

  if (!a.sweep.empty()) {
    double lo = 0, hi = 0;
    int count = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(a.sweep);
    if (!(ss >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' ||
        count < 2 || !(hi > lo))
      throw std::invalid_argument("--sweep wants lo:hi:count with count >= 2");
    std::vector<double> mu(count), margin(count);
    parallel_map(jobs, std::size_t(count), [&](std::size_t i) {
      mu[i] = lo + (hi - lo) * double(i) / (count - 1);
      margin[i] = reflect_and_test(sec, mu[i], a.axis).margin;
    });
    CsvWriter w(s.path_for("margins.csv"), {"mu", "margin"});
    for (int i = 0; i < count; ++i) w.row({mu[i], margin[i]});
    w.close();
    s.note("margins.csv");
    s.write_gnuplot("margins.csv", "reflection margin", 1, {2});
  }

  s.write_key_value_file("result.txt",
                         {{"mu_star", fmt17(sp.mu_star)},
                          {"residual", fmt17(sp.residual)},
                          {"iterations", std::to_string(sp.iterations)},
                          {"tol", fmt17(sp.tol)}});
  s.finalize();
  std::cout << "mu_star=" << fmt17(sp.mu_star)
            << " residual=" << fmt17(sp.residual) << "\n";
  return 0;
}

struct ReportArgs {
  std::vector<std::string> runs;
  std::string out = "out_report";
};

int run_report(const CLI::App* sub, const ReportArgs& a) {
  // fixed table of the shipped acceptance checks
  static const std::vector<std::string> labels = {
      "exact-model radius laws",     "cylinder zero-mode identities",
      "plus-energy closed form",     "bowl soliton residuals",
      "bowl neck mode decay",        "neutral-mode system constants",
      "model entropies",             "density monotonicity",
      "dumbbell neckpinch",          "reflection symmetry recovery",
      "bit-identical reruns"};
  struct Row {
    std::string status = "SKIPPED", value, note;
  };
  std::vector<Row> rows(labels.size());

  bool any_error = false;
  for (const std::string& dir : a.runs) {
    const fs::path d(dir);
    std::map<std::string, std::string> res;
    try {
      res = read_key_value(d / "result.txt");
    } catch (const std::exception& e) {
      std::cerr << "report: skipping " << dir << ": " << e.what() << "\n";
      continue;
    }
    const auto itc = res.find("criterion");
    if (itc == res.end())
      throw std::invalid_argument(dir + " is not an acceptance run "
                                        "(result.txt has no 'criterion' key)");
    const int k = int(num(itc->second));
    if (k < 1 || k > int(labels.size()))
      throw std::invalid_argument(dir + ": criterion index out of range");
    Row& row = rows[k - 1];
    std::vector<std::string> bad;
    try {
      bad = verify_manifest(d / "manifest.txt");
    } catch (const std::exception& e) {
      bad = {e.what()};
    }
    if (!bad.empty()) {
      row.status = "ERROR";
      row.note = "manifest: " + bad.front();
      any_error = true;
      continue;
    }
    row.status = res.count("status") ? res.at("status") : "FAIL";
    row.value = res.count("measured") ? res.at("measured") : "";
  }

  OutputSession s = start_session(sub, a.out);
  std::ostringstream text;
  {
    CsvWriter w(s.path_for("table.csv"),
                {"criterion", "label", "status", "measured"});
    for (std::size_t i = 0; i < labels.size(); ++i) {
      w.raw_row({std::to_string(i + 1), labels[i], rows[i].status,
                 rows[i].value.empty() ? rows[i].note : rows[i].value});
      char line[160];
      std::snprintf(line, sizeof line, "%2zu  %-32s  %-8s  %s\n", i + 1,
                    labels[i].c_str(), rows[i].status.c_str(),
                    (rows[i].value.empty() ? rows[i].note : rows[i].value).c_str());
      text << line;
    }
    w.close();
    s.note("table.csv");
  }
  s.write_text("table.txt", text.str());
  s.finalize();
  std::cout << text.str();
  if (any_error) throw NumericalFailure("corrupted manifest among the runs");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for rotationally symmetric mean "
               "curvature flow: simulation, rescaling, spectral projection, "
               "solitons, entropy, and symmetry pipelines"};
  app.require_subcommand(1);
  int jobs = 1;
  app.add_option("--jobs", jobs, "workers for independent sweep items")
      ->capture_default_str();

  const auto common = [](CLI::App* sub) {
    sub->set_config("--config", "", "flat key = value config file");
    sub->allow_config_extras(false);
    sub->fallthrough();  // lets app-wide options (--jobs) follow the subcommand
  };

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "evolve a profile to its singular time");
  common(c_sim);
  c_sim->add_option("--initial", sim.initial, "dumbbell | sphere | cylinder")
      ->check(CLI::IsMember({"dumbbell", "sphere", "cylinder"}))
      ->capture_default_str();
  c_sim->add_option("--n", sim.n, "rotational dimension")->capture_default_str();
  c_sim->add_option("--dz", sim.dz, "grid spacing")->capture_default_str();
  c_sim->add_option("--tmax", sim.tmax, "time limit")->capture_default_str();
  c_sim->add_option("--snapshot-every", sim.snapshot_every, "steps between snapshots")
      ->capture_default_str();
  c_sim->add_option("--neck", sim.neck, "dumbbell neck radius")->capture_default_str();
  c_sim->add_option("--bulge", sim.bulge, "dumbbell bulge amplitude")->capture_default_str();
  c_sim->add_option("--halflength", sim.halflength, "dumbbell half length")
      ->capture_default_str();
  c_sim->add_option("--radius", sim.radius, "sphere/cylinder radius")->capture_default_str();
  c_sim->add_option("--center", sim.center, "sphere center height")->capture_default_str();
  c_sim->add_option("--zlo", sim.zlo, "cylinder window start")->capture_default_str();
  c_sim->add_option("--zhi", sim.zhi, "cylinder window end")->capture_default_str();
  c_sim->add_option("--out", sim.out, "output directory name")->capture_default_str();

  RescaleArgs rsc;
  CLI::App* c_rsc = app.add_subcommand("rescale", "renormalized flow about a spacetime center");
  common(c_rsc);
  c_rsc->add_option("--traj", rsc.traj, "simulate output directory")->required();
  c_rsc->add_option("--z0", rsc.z0, "center height")->capture_default_str();
  c_rsc->add_option("--t0", rsc.t0, "center time (default: pinch estimate)");
  c_rsc->add_option("--tau0", rsc.tau0, "first rescaled time")->capture_default_str();
  c_rsc->add_option("--tau1", rsc.tau1, "last rescaled time")->capture_default_str();
  c_rsc->add_option("--dtau", rsc.dtau, "rescaled-time step")->capture_default_str();
  c_rsc->add_option("--window", rsc.window, "output window half-width")->capture_default_str();
  c_rsc->add_option("--rho", rsc.rho, "projection cutoff radius")->capture_default_str();
  c_rsc->add_option("--out", rsc.out, "output directory name")->capture_default_str();

  ProjectArgs prj;
  CLI::App* c_prj = app.add_subcommand("project", "mode projection of a cylinder graph");
  common(c_prj);
  c_prj->add_option("--input", prj.input, "graph csv with z,u0[,u1_i] columns")->required();
  c_prj->add_option("--n", prj.n, "rotational dimension")->capture_default_str();
  c_prj->add_option("--rho", prj.rho, "cutoff radius")->capture_default_str();
  c_prj->add_option("--out", prj.out, "output directory name")->capture_default_str();

  SolitonArgs sol;
  CLI::App* c_sol = app.add_subcommand("soliton", "translating bowl profile");
  common(c_sol);
  c_sol->add_option("--n", sol.n, "rotational dimension")->capture_default_str();
  c_sol->add_option("--rmax", sol.rmax, "integration radius")->capture_default_str();
  c_sol->add_option("--tol", sol.tol, "solver tolerance")->capture_default_str();
  c_sol->add_option("--out", sol.out, "output directory name")->capture_default_str();

  ShrinkerArgs shr;
  CLI::App* c_shr = app.add_subcommand("shrinker", "self-shrinking profile");
  common(c_shr);
  c_shr->add_option("--kind", shr.kind, "cylinder | sphere | capped")
      ->check(CLI::IsMember({"cylinder", "sphere", "capped"}))
      ->capture_default_str();
  c_shr->add_option("--n", shr.n, "rotational dimension")->capture_default_str();
  c_shr->add_option("--height", shr.height, "closure height (capped family)")
      ->capture_default_str();
  c_shr->add_option("--tol", shr.tol, "solver tolerance")->capture_default_str();
  c_shr->add_option("--out", shr.out, "output directory name")->capture_default_str();

  EntropyArgs ent;
  CLI::App* c_ent = app.add_subcommand("entropy", "gaussian-area supremum of a model or profile");
  common(c_ent);
  CLI::Option* o_model =
      c_ent->add_option("--model", ent.model, "plane | sphere | cylinder")
          ->check(CLI::IsMember({"plane", "sphere", "cylinder"}));
  c_ent->add_option("--input", ent.input, "profile csv with z,r columns")
      ->excludes(o_model);
  c_ent->add_option("--n", ent.n, "rotational dimension")->capture_default_str();
  c_ent->add_option("--out", ent.out, "output directory name")->capture_default_str();

  DensityArgs den;
  CLI::App* c_den = app.add_subcommand("density", "gaussian density along a trajectory");
  common(c_den);
  c_den->add_option("--traj", den.traj, "simulate output directory")->required();
  c_den->add_option("--z0", den.z0, "center height")->capture_default_str();
  c_den->add_option("--rho0", den.rho0, "center distance from the axis")->capture_default_str();
  c_den->add_option("--t0", den.t0, "center time (default: pinch estimate)");
  c_den->add_option("--out", den.out, "output directory name")->capture_default_str();

  NeckScanArgs nsc;
  CLI::App* c_nsc = app.add_subcommand("neck-scan", "smallest cylindrical dyadic scale at a pinch");
  common(c_nsc);
  c_nsc->add_option("--traj", nsc.traj, "simulate output directory")->required();
  c_nsc->add_option("--z0", nsc.z0, "pinch height (default: estimate)");
  c_nsc->add_option("--t0", nsc.t0, "pinch time (default: estimate)");
  c_nsc->add_option("--eps", nsc.eps, "closeness threshold")->capture_default_str();
  c_nsc->add_option("--out", nsc.out, "output directory name")->capture_default_str();

  NeutralOdeArgs ode;
  CLI::App* c_ode = app.add_subcommand("neutral-ode", "neutral-mode coefficient system");
  common(c_ode);
  c_ode->add_option("--n", ode.n, "rotational dimension")->capture_default_str();
  c_ode->add_option("--tau0", ode.tau0, "start time")->capture_default_str();
  c_ode->add_option("--tau1", ode.tau1, "end time")->capture_default_str();
  c_ode->add_option("--dtau", ode.dtau, "step")->capture_default_str();
  c_ode->add_option("--alpha0", ode.alpha0,
                    "initial symmetric coefficient (default: 1/(2 A tau0))");
  c_ode->add_option("--alpha", ode.alpha, "initial rotation coefficients")
      ->delimiter(',');
  c_ode->add_option("--out", ode.out, "output directory name")->capture_default_str();

  DichotomyArgs dich;
  CLI::App* c_dich = app.add_subcommand("dichotomy", "classify a mode-energy track");
  common(c_dich);
  c_dich->add_option("--input", dich.input,
                     "csv with tau,U_plus,U_zero,U_minus columns")->required();
  c_dich->add_option("--out", dich.out, "output directory name")->capture_default_str();

  SymmetryArgs sym;
  CLI::App* c_sym = app.add_subcommand("symmetry", "moving-plane sweep of a cross-section");
  common(c_sym);
  CLI::Option* o_sec =
      c_sym->add_option("--section", sym.section, "polygon csv with x,y columns");
  c_sym->add_option("--traj", sym.traj, "simulate output directory")->excludes(o_sec);
  c_sym->add_option("--snapshot", sym.snapshot, "snapshot index (default: last)");
  c_sym->add_option("--axis", sym.axis, "0: sweep along x, 1: along y")
      ->capture_default_str();
  c_sym->add_option("--tol", sym.tol, "bisection tolerance")->capture_default_str();
  c_sym->add_option("--sweep", sym.sweep, "margin sweep lo:hi:count");
  c_sym->add_option("--out", sym.out, "output directory name")->capture_default_str();

  ReportArgs rep;
  CLI::App* c_rep = app.add_subcommand("report", "consolidate acceptance runs into one table");
  common(c_rep);
  c_rep->add_option("runs", rep.runs, "acceptance run directories");
  c_rep->add_option("--out", rep.out, "output directory name")->capture_default_str();

  std::vector<std::string> tokens;
  try {
    tokens = expand_config_tokens(argc, argv);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::vector<std::string> reversed(tokens.rbegin(), tokens.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_sim->parsed()) return run_simulate(c_sim, sim);
    if (c_rsc->parsed()) return run_rescale(c_rsc, rsc);
    if (c_prj->parsed()) return run_project(c_prj, prj);
    if (c_sol->parsed()) return run_soliton(c_sol, sol);
    if (c_shr->parsed()) return run_shrinker(c_shr, shr);
    if (c_ent->parsed()) {
      if (ent.model.empty() && ent.input.empty())
        throw std::invalid_argument("entropy: need --model or --input");
      return run_entropy(c_ent, ent);
    }
    if (c_den->parsed()) return run_density(c_den, den);
    if (c_nsc->parsed()) return run_neck_scan(c_nsc, nsc);
    if (c_ode->parsed()) return run_neutral_ode(c_ode, ode);
    if (c_dich->parsed()) return run_dichotomy(c_dich, dich);
    if (c_sym->parsed()) return run_symmetry(c_sym, sym, jobs);
    if (c_rep->parsed()) return run_report(c_rep, rep);
    throw std::invalid_argument("no subcommand");
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
}
