#include "schrocurve/commands.hpp"

#include "schrocurve/field_io.hpp"
#include "schrocurve/parallel.hpp"
#include "schrocurve/problem.hpp"
#include "schrocurve/verify.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#ifndef SCHROCURVE_VERSION
#define SCHROCURVE_VERSION "unknown"
#endif

namespace schrocurve {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Collects output files and their checksums for the manifest.
class RunDirectory {
public:
  explicit RunDirectory(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_ / "fields");
    fs::create_directories(root_ / "tables");
  }

  const fs::path& root() const { return root_; }

  std::string field(const std::string& stem, const Field& f) {
    const std::string rel = "fields/" + stem + ".bin";
    const std::string sum = write_field(root_ / rel, f);
    add(rel, sum, "field");
    add(rel + ".json", sha256_file(root_ / (rel + ".json")), "sidecar");
    return rel;
  }

  std::string table(const std::string& stem, const std::string& csv) {
    const std::string rel = "tables/" + stem + ".csv";
    std::ofstream out(root_ / rel, std::ios::binary | std::ios::trunc);
    out << csv;
    out.close();
    add(rel, sha256_file(root_ / rel), "table");
    return rel;
  }

  json files() const { return files_; }

private:
  void add(const std::string& rel, const std::string& sum, const char* kind) {
    files_.push_back({{"path", rel}, {"sha256", sum}, {"kind", kind}, {"bytes", fs::file_size(root_ / rel)}});
  }

  fs::path root_;
  json files_ = json::array();
};

json check_json(const CheckResult& c) {
  return {{"suite", c.suite},           {"name", c.name},
          {"value", c.value},           {"threshold", c.threshold},
          {"verdict", c.pass ? "PASS" : "FAIL"}, {"detail", c.detail}};
}

json base_manifest(const std::string& command, const RunConfig& cfg, unsigned workers) {
  return {{"schema", "schrocurve.run/1"},
          {"command", command},
          {"code_version", code_version()},
          {"seed", *cfg.monte_carlo.seed},
          {"workers", workers},
          {"config", to_json(cfg)},
          {"grid", {{"d", cfg.discretization.d}, {"n", cfg.discretization.n}, {"L", cfg.discretization.L}}}};
}

void finish_manifest(json& m, RunDirectory& dir, const std::vector<CheckResult>& checks, bool pass) {
  json arr = json::array();
  for (const auto& c : checks) arr.push_back(check_json(c));
  m["checks"] = arr;
  m["verdict"] = pass ? "PASS" : "FAIL";
  m["files"] = dir.files();
  std::ofstream out(dir.root() / "manifest.json", std::ios::trunc);
  out << m.dump(2) << '\n';
}

json horizon_json(const Plan& plan, double dt) {
  const Horizon& h = plan.horizon;
  return {{"T0", h.T0},
          {"K", h.K},
          {"steps", h.steps},
          {"dt", dt},
          {"C", h.C},
          {"C_zz", h.C_zz},
          {"mass", h.mass},
          {"shrunk_for_ball", h.shrunk_for_ball},
          {"local", plan.local},
          {"ball_self_map_bound", plan.self_map_bound},
          {"formula", h.formula},
          {"probe_times", plan.probe_times},
          {"C_gamma", plan.C_gamma},
          {"C_sigma", plan.C_sigma}};
}

std::vector<std::size_t> save_steps(const RunConfig& cfg, std::size_t steps) {
  std::set<std::size_t> out;
  if (cfg.output.save_times.empty()) {
    for (std::size_t i = 0; i <= 4; ++i) out.insert((steps * i) / 4);
  } else {
    for (double t : cfg.output.save_times) {
      const auto k = static_cast<std::size_t>(std::llround(t / cfg.discretization.dt));
      if (k <= steps) out.insert(k);
    }
  }
  return {out.begin(), out.end()};
}

std::string stem(const char* prefix, std::size_t path, std::size_t step) {
  std::ostringstream s;
  s << prefix << "_p" << std::setw(4) << std::setfill('0') << path << "_k" << std::setw(6) << step;
  return s.str();
}

std::ostringstream csv_stream(const std::string& header) {
  std::ostringstream s;
  s.precision(17);
  s << header << '\n';
  return s;
}

}  // namespace

const char* code_version() { return SCHROCURVE_VERSION; }

RunConfig apply_options(RunConfig cfg, const CommandOptions& opts) {
  if (opts.seed) cfg.monte_carlo.seed = *opts.seed;
  if (opts.out) cfg.output.directory = opts.out->string();
  return resolve(std::move(cfg));
}

unsigned resolve_workers(const RunConfig& cfg, const CommandOptions& opts) {
  if (opts.workers && *opts.workers > 0) return *opts.workers;
  if (cfg.monte_carlo.workers > 0) return cfg.monte_carlo.workers;
  return default_workers();
}

CommandResult cmd_simulate(const RunConfig& input, const CommandOptions& opts) {
  const auto t_start = Clock::now();
  const RunConfig cfg = apply_options(input, opts);
  const unsigned workers = resolve_workers(cfg, opts);
  const Problem p = build_problem(cfg);
  const Plan plan = plan_horizon(p);
  const double plan_seconds = seconds_since(t_start);
  const SolveContext ctx = make_context(p, plan);
  const auto saved = save_steps(cfg, ctx.steps);
  const CounterRng rng(*cfg.monte_carlo.seed);
  const bool picard = cfg.solver.scheme == "picard";

  struct PathOut {
    std::string error;
    std::vector<Field> fields;  // at saved steps
    std::vector<double> norms, distances;
    std::size_t iterations = 0;
    double max_ratio = 0.0, residual = 0.0;
    bool contraction_ok = true;
  };
  const auto t_solve = Clock::now();
  const auto results = parallel_map<PathOut>(cfg.monte_carlo.paths, workers, [&](std::size_t i) {
    PathOut r;
    try {
      const WienerPath path = sample_path(p.basis->size(), ctx.dt, ctx.steps, rng, i);
      const Trajectory u =
          picard ? picard_solve(p.u0, ctx, p.gamma, p.sigma, path) : em_solve(p.u0, ctx, p.gamma, p.sigma, path);
      for (std::size_t k : saved) r.fields.push_back(u.fields[k]);
      r.norms = u.norms;
      r.distances = u.distances;
      r.iterations = u.iterations;
      r.max_ratio = u.max_ratio;
      r.contraction_ok = u.contraction_ok;
      r.residual = residual_check(u, path, ctx, p.gamma, p.sigma, p.u0);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    return r;
  });
  const double solve_seconds = seconds_since(t_solve);

  RunDirectory dir(cfg.output.directory);
  json manifest = base_manifest("simulate", cfg, workers);
  manifest["horizon"] = horizon_json(plan, ctx.dt);
  manifest["scheme"] = cfg.solver.scheme;
  manifest["ball"] = {{"radius", p.ball.radius}, {"center", "u0"}, {"enforced", plan.local}};
  json times = json::array();
  for (std::size_t k = 0; k <= ctx.steps; ++k) times.push_back(ctx.time(k));
  manifest["times"] = times;

  std::vector<CheckResult> checks;
  auto norms_csv = csv_stream("path,step,t,norm");
  auto picard_csv = csv_stream("path,iteration,distance,ratio");
  auto summary_csv = csv_stream("path,iterations,max_ratio,K,contraction_ok,residual,error");
  json paths = json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    json entry = {{"index", i}};
    if (!r.error.empty()) {
      entry["error"] = r.error;
      checks.push_back({"simulate", "path " + std::to_string(i) + " solved", 0.0, 0.0, false, r.error});
      summary_csv << i << ",0,0," << ctx.K << ",0,0,\"" << r.error << "\"\n";
      paths.push_back(entry);
      continue;
    }
    json files = json::array();
    for (std::size_t s = 0; s < saved.size(); ++s)
      files.push_back({{"step", saved[s]}, {"time", ctx.time(saved[s])}, {"file", dir.field(stem("u", i, saved[s]), r.fields[s])}});
    for (std::size_t k = 0; k < r.norms.size(); ++k) norms_csv << i << ',' << k << ',' << ctx.time(k) << ',' << r.norms[k] << '\n';
    for (std::size_t m = 0; m < r.distances.size(); ++m) {
      picard_csv << i << ',' << m << ',' << r.distances[m] << ',';
      if (m > 0 && r.distances[m - 1] > 0.0) picard_csv << r.distances[m] / r.distances[m - 1];
      picard_csv << '\n';
    }
    summary_csv << i << ',' << r.iterations << ',' << r.max_ratio << ',' << ctx.K << ',' << r.contraction_ok << ','
                << r.residual << ",\n";
    entry["fields"] = files;
    entry["norms"] = r.norms;
    entry["picard_distances"] = r.distances;
    entry["iterations"] = r.iterations;
    entry["max_ratio"] = r.max_ratio;
    entry["residual"] = r.residual;
    paths.push_back(entry);
    if (picard) {
      const std::string tag = "path " + std::to_string(i);
      checks.push_back({"simulate", tag + " ratio <= 1.5 K", r.max_ratio, ctx.ratio_margin * ctx.K, r.contraction_ok, ""});
      checks.push_back({"simulate", tag + " residual", r.residual, 10 * ctx.tol, r.residual <= 10 * ctx.tol, ""});
    }
  }
  manifest["paths"] = paths;
  dir.table("norms", norms_csv.str());
  dir.table("picard", picard_csv.str());
  dir.table("summary", summary_csv.str());

  bool pass = true;
  for (const auto& c : checks) pass = pass && c.pass;
  manifest["timings"] = {{"plan_seconds", plan_seconds}, {"solve_seconds", solve_seconds},
                         {"total_seconds", seconds_since(t_start)}};
  finish_manifest(manifest, dir, checks, pass);
  return {manifest, dir.root(), pass};
}

CommandResult cmd_verify(const std::string& suite, const RunConfig& input, const CommandOptions& opts) {
  const auto t_start = Clock::now();
  const RunConfig cfg = apply_options(input, opts);
  const unsigned workers = resolve_workers(cfg, opts);
  const SuiteResult res = run_suite(suite, cfg, workers);
  RunDirectory dir(cfg.output.directory);
  json manifest = base_manifest("verify", cfg, workers);
  manifest["suite"] = suite;
  for (const auto& [name, csv] : res.tables) dir.table(name, csv);
  auto checks_csv = csv_stream("suite,name,value,threshold,verdict");
  for (const auto& c : res.checks)
    checks_csv << c.suite << ",\"" << c.name << "\"," << c.value << ',' << c.threshold << ','
               << (c.pass ? "PASS" : "FAIL") << '\n';
  dir.table("checks", checks_csv.str());
  manifest["timings"] = {{"total_seconds", seconds_since(t_start)}};
  finish_manifest(manifest, dir, res.checks, res.pass());
  return {manifest, dir.root(), res.pass()};
}

CommandResult cmd_noise_sample(const RunConfig& input, const CommandOptions& opts) {
  const auto t_start = Clock::now();
  const RunConfig cfg = apply_options(input, opts);
  const unsigned workers = resolve_workers(cfg, opts);
  validate(cfg);
  const auto& d = cfg.discretization;
  const Grid grid(d.d, d.n, d.L);
  const SpectralMeasure M = make_measure(grid, cfg.noise);
  if (!std::isfinite(M.total_mass()))
    throw std::invalid_argument("noise: total mass is not finite; the existence theorem requires a finite spectral measure");
  std::optional<std::size_t> J;
  if (cfg.noise.J > 0) J = cfg.noise.J;
  const auto basis = build_cm_basis(M, grid, J,
                                    cfg.noise.parity == "even_only" ? BasisParity::even_only : BasisParity::hermitian);
  const CounterRng rng(*cfg.monte_carlo.seed);

  RunDirectory dir(cfg.output.directory);
  json manifest = base_manifest("noise-sample", cfg, workers);
  manifest["measure"] = {{"type", cfg.noise.type}, {"total_mass", M.total_mass()}, {"atoms", M.atoms().size()},
                         {"J", basis.size()}, {"dt", d.dt}};
  const double sdt = std::sqrt(d.dt);
  std::vector<Field> samples(cfg.monte_carlo.paths, Field(grid));
  parallel_for(samples.size(), workers, [&](std::size_t s) {
    std::vector<double> dw(basis.size());
    for (std::size_t j = 0; j < dw.size(); ++j) dw[j] = sdt * rng.normal(s, static_cast<std::uint32_t>(j), 0);
    samples[s] = basis.combine(dw);
  });
  json files = json::array();
  for (std::size_t s = 0; s < samples.size(); ++s) files.push_back(dir.field(stem("noise", s, 0), samples[s]));
  manifest["samples"] = files;

  // Covariance against the centre node along the first axis.
  const std::size_t n = grid.n(), mid = n / 2;
  const std::size_t centre = d.d == 1 ? grid.flatten(mid) : grid.flatten(mid, mid);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i) pairs.push_back({centre, d.d == 1 ? grid.flatten(i) : grid.flatten(i, mid)});
  const auto cov = point_covariance(basis, pairs, d.dt, cfg.monte_carlo.samples, rng);
  auto csv = csv_stream("x,r,empirical,analytic,truncated");
  double worst = 0.0, scale = 0.0;
  for (const auto& pc : cov) {
    const Point x = grid.point(pc.y_index);
    csv << x[0] << ',' << x[0] - grid.point(centre)[0] << ',' << pc.empirical << ',' << pc.analytic << ','
        << pc.truncated << '\n';
    worst = std::max(worst, std::abs(pc.empirical - pc.truncated));
    scale = std::max(scale, std::abs(pc.truncated));
  }
  dir.table("covariance", csv.str());
  std::vector<CheckResult> checks;
  if (scale == 0.0) {
    checks.push_back({"noise-sample", "zero measure gives zero samples", worst, 0.0, worst == 0.0, ""});
  } else {
    checks.push_back({"noise-sample", "empirical covariance within 5% of the diagonal", worst / scale, 0.05,
                      worst <= 0.05 * scale, "compared against the truncated-basis kernel"});
  }
  const bool pass = checks.front().pass;
  manifest["timings"] = {{"total_seconds", seconds_since(t_start)}};
  finish_manifest(manifest, dir, checks, pass);
  return {manifest, dir.root(), pass};
}

json cmd_info(const RunConfig& input, const CommandOptions& opts, std::ostream& out) {
  const RunConfig cfg = apply_options(input, opts);
  const unsigned workers = resolve_workers(cfg, opts);
  const Problem p = build_problem(cfg);
  json info = {{"config", to_json(cfg)},
               {"workers", workers},
               {"total_mass", p.measure.total_mass()},
               {"J", p.basis->size()},
               {"ball_radius", p.ball.radius}};
  out << "resolved config:\n" << to_json(cfg).dump(2) << "\n\n";
  out << "total mass of the spectral measure: " << p.measure.total_mass() << '\n';
  out << "Cameron-Martin modes J: " << p.basis->size() << '\n';
  out << "locality ball radius: " << p.ball.radius << '\n';
  try {
    const Plan plan = plan_horizon(p);
    info["horizon"] = horizon_json(plan, cfg.discretization.dt);
    const auto& h = plan.horizon;
    out << "predicted T0: " << h.T0 << " (" << h.steps << " steps of " << cfg.discretization.dt << ")\n";
    out << "K(T0): " << h.K << "   [" << h.formula << "]\n";
    out << "C = " << h.C << ", C_zz = " << h.C_zz << (h.shrunk_for_ball ? ", shrunk for the ball-drift condition" : "")
        << '\n';
    if (plan.local)
      out << "ball self-map bound at T0: " << plan.self_map_bound << " (R/2 = " << 0.5 * p.ball.radius << ")\n";
    else
      out << "nonlinearities are globally Lipschitz: no locality ball\n";
    const double field_bytes = 16.0 * static_cast<double>(p.grid.size());
    const double per_path = 2.0 * static_cast<double>(h.steps + 1) * field_bytes;
    const double basis_bytes = static_cast<double>(p.basis->size()) * field_bytes;
    info["memory"] = {{"field_bytes", field_bytes}, {"per_path_bytes", per_path}, {"basis_bytes", basis_bytes}};
    out << "memory: " << field_bytes << " B per field, " << per_path << " B per Picard solve, " << basis_bytes
        << " B for the basis\n";
    out << "work per step: one propagator step, " << p.basis->size() << " basis combinations\n";
  } catch (const std::exception& e) {
    info["horizon_error"] = e.what();
    out << "horizon: " << e.what() << '\n';
  }
  return info;
}

bool manifest_closed(const fs::path& directory, std::string* problem) {
  std::ifstream in(directory / "manifest.json");
  if (!in) {
    if (problem) *problem = "manifest.json missing";
    return false;
  }
  const json m = json::parse(in);
  for (const auto& f : m.at("files")) {
    const fs::path path = directory / f.at("path").get<std::string>();
    if (!fs::exists(path)) {
      if (problem) *problem = "missing " + path.string();
      return false;
    }
    if (sha256_file(path) != f.at("sha256").get<std::string>()) {
      if (problem) *problem = "checksum mismatch for " + path.string();
      return false;
    }
  }
  return true;
}

}  // namespace schrocurve
