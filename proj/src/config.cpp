#include "schrocurve/config.hpp"

#include <toml/toml.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace schrocurve {

using nlohmann::json;

namespace {

/// Reads one JSON object, tracking the dotted path and rejecting unknown keys.
class Reader {
public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw config_error(path_.empty() ? "<root>" : path_, "expected a table");
  }
  ~Reader() = default;

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    try {
      convert(v, out, at(key));
    } catch (const config_error&) {
      throw;
    } catch (const std::exception& e) {
      throw config_error(at(key), e.what());
    }
  }

  template <class Fn>
  void table(const std::string& key, Fn&& fn) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Reader sub(j_.at(key), at(key));
    fn(sub);
    sub.finish();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw config_error(at(it.key()), "unknown field");
  }

private:
  static void convert(const json& v, double& out, const std::string& path) {
    if (!v.is_number()) throw config_error(path, "expected a number");
    out = v.get<double>();
  }
  static void convert(const json& v, int& out, const std::string& path) {
    if (!v.is_number_integer()) throw config_error(path, "expected an integer");
    out = v.get<int>();
  }
  static void convert(const json& v, std::size_t& out, const std::string& path) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw config_error(path, "expected a nonnegative integer");
    out = v.get<std::size_t>();
  }
  static void convert(const json& v, unsigned& out, const std::string& path) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw config_error(path, "expected a nonnegative integer");
    out = v.get<unsigned>();
  }
  static void convert(const json& v, std::optional<std::uint64_t>& out, const std::string& path) {
    if (v.is_null()) {
      out.reset();
      return;
    }
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
      throw config_error(path, "expected a nonnegative integer");
    out = v.get<std::uint64_t>();
  }
  static void convert(const json& v, std::string& out, const std::string& path) {
    if (!v.is_string()) throw config_error(path, "expected a string");
    out = v.get<std::string>();
  }
  static void convert(const json& v, std::vector<double>& out, const std::string& path) {
    if (!v.is_array()) throw config_error(path, "expected an array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      double x = 0.0;
      convert(v[i], x, path + "[" + std::to_string(i) + "]");
      out.push_back(x);
    }
  }
  static void convert(const json& v, std::vector<AtomSpec>& out, const std::string& path) {
    if (!v.is_array()) throw config_error(path, "expected an array of atoms");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      AtomSpec a;
      Reader r(v[i], path + "[" + std::to_string(i) + "]");
      r.get("xi", a.xi);
      r.get("weight", a.weight);
      r.finish();
      out.push_back(a);
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_nonlinearity(Reader& r, NonlinearitySpec& s) {
  r.get("kind", s.kind);
  r.get("re", s.re);
  r.get("im", s.im);
  r.get("n", s.n);
}

json nonlinearity_json(const NonlinearitySpec& s) { return {{"kind", s.kind}, {"re", s.re}, {"im", s.im}, {"n", s.n}}; }

json toml_to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json out = json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = toml_to_json(v);
    return out;
  }
  if (const auto* a = node.as_array()) {
    json out = json::array();
    for (const auto& v : *a) out.push_back(toml_to_json(v));
    return out;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  throw config_error("<toml>", "unsupported value type (dates and times are not used)");
}

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) throw config_error(path, what);
}

void require_one_of(const std::string& value, std::initializer_list<const char*> allowed, const std::string& path) {
  std::ostringstream list;
  for (const char* a : allowed) {
    if (value == a) return;
    list << ' ' << a;
  }
  throw config_error(path, "unknown value '" + value + "'; expected one of" + list.str());
}

void validate_nonlinearity(const NonlinearitySpec& s, const std::string& path) {
  require_one_of(s.kind, {"zero", "linear", "power", "constant"}, path + ".kind");
  if (s.kind == "power") require(s.n >= 1, path + ".n", "power exponent must be at least 1");
}

}  // namespace

json to_json(const RunConfig& c) {
  json atoms = json::array();
  for (const auto& a : c.noise.atoms) atoms.push_back({{"xi", a.xi}, {"weight", a.weight}});
  const auto& p = c.problem;
  json j = {
      {"problem",
       {{"metric", {{"family", p.metric.family}, {"eps", p.metric.eps}, {"direction", p.metric.direction}}},
        {"m0", {{"family", p.m0.family}, {"omega", p.m0.omega}, {"radius", p.m0.radius}}},
        {"m1", {{"family", p.m1.family}, {"eps", p.m1.eps}}},
        {"gamma", nonlinearity_json(p.gamma)},
        {"sigma", nonlinearity_json(p.sigma)},
        {"u0",
         {{"family", p.u0.family},
          {"amplitude", p.u0.amplitude},
          {"width", p.u0.width},
          {"shift", p.u0.shift},
          {"momentum", p.u0.momentum}}}}},
      {"discretization",
       {{"d", c.discretization.d},
        {"n", c.discretization.n},
        {"L", c.discretization.L},
        {"dt", c.discretization.dt},
        {"T", c.discretization.T}}},
      {"noise",
       {{"type", c.noise.type},
        {"mass", c.noise.mass},
        {"scale", c.noise.scale},
        {"radius", c.noise.radius},
        {"atoms", atoms},
        {"J", c.noise.J},
        {"parity", c.noise.parity}}},
      {"solver",
       {{"z", c.solver.z},
        {"zeta", c.solver.zeta},
        {"tol", c.solver.tol},
        {"max_iters", c.solver.max_iters},
        {"ball_radius", c.solver.ball_radius},
        {"scheme", c.solver.scheme}}},
      {"monte_carlo",
       {{"paths", c.monte_carlo.paths},
        {"samples", c.monte_carlo.samples},
        {"seed", c.monte_carlo.seed ? json(*c.monte_carlo.seed) : json(nullptr)},
        {"workers", c.monte_carlo.workers}}},
      {"output", {{"directory", c.output.directory}, {"save_times", c.output.save_times}}},
  };
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  Reader root(j, "");
  root.table("problem", [&](Reader& r) {
    auto& p = c.problem;
    r.table("metric", [&](Reader& m) {
      m.get("family", p.metric.family);
      m.get("eps", p.metric.eps);
      m.get("direction", p.metric.direction);
    });
    r.table("m0", [&](Reader& m) {
      m.get("family", p.m0.family);
      m.get("omega", p.m0.omega);
      m.get("radius", p.m0.radius);
    });
    r.table("m1", [&](Reader& m) {
      m.get("family", p.m1.family);
      m.get("eps", p.m1.eps);
    });
    r.table("gamma", [&](Reader& m) { read_nonlinearity(m, p.gamma); });
    r.table("sigma", [&](Reader& m) { read_nonlinearity(m, p.sigma); });
    r.table("u0", [&](Reader& m) {
      m.get("family", p.u0.family);
      m.get("amplitude", p.u0.amplitude);
      m.get("width", p.u0.width);
      m.get("shift", p.u0.shift);
      m.get("momentum", p.u0.momentum);
    });
  });
  root.table("discretization", [&](Reader& r) {
    auto& d = c.discretization;
    r.get("d", d.d);
    r.get("n", d.n);
    r.get("L", d.L);
    r.get("dt", d.dt);
    r.get("T", d.T);
  });
  root.table("noise", [&](Reader& r) {
    auto& n = c.noise;
    r.get("type", n.type);
    r.get("mass", n.mass);
    r.get("scale", n.scale);
    r.get("radius", n.radius);
    r.get("atoms", n.atoms);
    r.get("J", n.J);
    r.get("parity", n.parity);
  });
  root.table("solver", [&](Reader& r) {
    auto& s = c.solver;
    r.get("z", s.z);
    r.get("zeta", s.zeta);
    r.get("tol", s.tol);
    r.get("max_iters", s.max_iters);
    r.get("ball_radius", s.ball_radius);
    r.get("scheme", s.scheme);
  });
  root.table("monte_carlo", [&](Reader& r) {
    auto& m = c.monte_carlo;
    r.get("paths", m.paths);
    r.get("samples", m.samples);
    r.get("seed", m.seed);
    r.get("workers", m.workers);
  });
  root.table("output", [&](Reader& r) {
    r.get("directory", c.output.directory);
    r.get("save_times", c.output.save_times);
  });
  root.finish();
  validate(c);
  return c;
}

RunConfig parse_config(const std::string& text, bool toml) {
  json j;
  if (toml) {
    try {
      j = toml_to_json(toml::parse(text));
    } catch (const toml::parse_error& e) {
      std::ostringstream msg;
      msg << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
      throw config_error("<toml>", msg.str());
    }
  } else {
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw config_error("<json>", e.what());
    }
  }
  return config_from_json(j);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("<file>", "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.extension() == ".toml");
}

void validate(const RunConfig& c) {
  const auto& p = c.problem;
  require_one_of(p.metric.family, {"flat", "gauss_bump", "rational_decay"}, "problem.metric.family");
  require(p.metric.direction.size() == 2, "problem.metric.direction", "expected two components");
  require_one_of(p.m0.family, {"none", "harmonic_window"}, "problem.m0.family");
  require(p.m0.radius > 0.0, "problem.m0.radius", "must be positive");
  require_one_of(p.m1.family, {"none", "shear"}, "problem.m1.family");
  validate_nonlinearity(p.gamma, "problem.gamma");
  validate_nonlinearity(p.sigma, "problem.sigma");
  require_one_of(p.u0.family, {"gaussian"}, "problem.u0.family");
  require(p.u0.width > 0.0, "problem.u0.width", "must be positive");

  const auto& d = c.discretization;
  require(d.d == 1 || d.d == 2, "discretization.d", "must be 1 or 2");
  require(d.n >= 8 && (d.n & (d.n - 1)) == 0, "discretization.n", "must be a power of two, at least 8");
  require(d.L > 0.0, "discretization.L", "must be positive");
  require(d.dt > 0.0, "discretization.dt", "must be positive");
  require(d.T > 0.0, "discretization.T", "must be positive");

  const auto& n = c.noise;
  require_one_of(n.type, {"atoms", "gaussian_density", "uniform_density"}, "noise.type");
  require(std::isfinite(n.mass), "noise.mass",
          "total mass must be finite; the existence theorem needs a spectral measure of finite mass");
  require(n.mass >= 0.0, "noise.mass", "must be nonnegative");
  require(n.scale > 0.0, "noise.scale", "must be positive");
  require(n.radius > 0.0, "noise.radius", "must be positive");
  for (std::size_t i = 0; i < n.atoms.size(); ++i) {
    const std::string at = "noise.atoms[" + std::to_string(i) + "]";
    require(n.atoms[i].xi.size() == static_cast<std::size_t>(d.d), at + ".xi", "must have d components");
    require(std::isfinite(n.atoms[i].weight) && n.atoms[i].weight >= 0.0, at + ".weight",
            "must be finite and nonnegative");
  }
  require_one_of(n.parity, {"hermitian", "even_only"}, "noise.parity");

  const auto& s = c.solver;
  require(s.z >= 0, "solver.z", "must be nonnegative");
  require(s.zeta >= 0, "solver.zeta", "must be nonnegative");
  require(s.tol > 0.0, "solver.tol", "must be positive");
  require(s.max_iters >= 1, "solver.max_iters", "must be at least 1");
  require(s.ball_radius >= 0.0, "solver.ball_radius", "must be nonnegative");
  require_one_of(s.scheme, {"picard", "em"}, "solver.scheme");

  require(c.monte_carlo.paths >= 1, "monte_carlo.paths", "must be at least 1");
  require(c.monte_carlo.samples >= 2, "monte_carlo.samples", "must be at least 2");
  require(!c.output.directory.empty(), "output.directory", "must not be empty");
  for (double t : c.output.save_times) require(t >= 0.0 && t <= d.T, "output.save_times", "times must lie in [0, T]");
}

RunConfig resolve(RunConfig cfg) {
  if (!cfg.monte_carlo.seed) {
    std::random_device rd;
    cfg.monte_carlo.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  return cfg;
}

}  // namespace schrocurve
