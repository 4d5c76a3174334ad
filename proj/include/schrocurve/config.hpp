#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace schrocurve {

/// Schema error; the message starts with the dotted field path.
class config_error : public std::runtime_error {
public:
  config_error(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), field(path) {}
  std::string field;
};

struct MetricSpec {
  std::string family = "flat";  ///< flat | gauss_bump | rational_decay
  double eps = 0.3;
  std::vector<double> direction{1.0, 0.0};
};

struct PotentialSpec {
  std::string family = "none";  ///< none | harmonic_window
  double omega = 1.0;
  double radius = 5.0;
};

struct MagneticSpec {
  std::string family = "none";  ///< none | shear
  double eps = 0.2;
};

struct NonlinearitySpec {
  std::string kind = "zero";  ///< zero | linear | power | constant
  double re = 0.0;            ///< lambda (linear), coefficient (power) or value (constant)
  double im = 0.0;
  int n = 2;
};

struct InitialSpec {
  std::string family = "gaussian";  ///< gaussian
  double amplitude = 1.0;
  double width = 1.0;
  double shift = 0.0;
  double momentum = 0.0;
};

struct AtomSpec {
  std::vector<double> xi{0.0, 0.0};
  double weight = 0.0;
};

struct RunConfig {
  struct Problem {
    MetricSpec metric;
    PotentialSpec m0;
    MagneticSpec m1;
    NonlinearitySpec gamma;
    NonlinearitySpec sigma;
    InitialSpec u0;
  } problem;
  struct Discretization {
    int d = 1;
    std::size_t n = 256;
    double L = 16.0;
    double dt = 1e-3;
    double T = 1.0;
  } discretization;
  struct Noise {
    std::string type = "gaussian_density";  ///< atoms | gaussian_density | uniform_density
    double mass = 0.1;
    double scale = 1.0;   ///< gaussian_density standard deviation
    double radius = 2.0;  ///< uniform_density support radius
    std::vector<AtomSpec> atoms;
    std::size_t J = 0;    ///< 0: min(64, dimension)
    std::string parity = "hermitian";  ///< hermitian | even_only
  } noise;
  struct Solver {
    int z = 0;
    int zeta = 1;
    double tol = 1e-6;
    int max_iters = 50;
    double ball_radius = 0.0;  ///< 0: ||u0||
    std::string scheme = "picard";  ///< picard | em
  } solver;
  struct MonteCarlo {
    std::size_t paths = 4;
    std::size_t samples = 10000;  ///< Monte Carlo size for verification batteries
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;  ///< 0: SCHROCURVE_WORKERS or hardware concurrency
  } monte_carlo;
  struct Output {
    std::string directory = "run";
    std::vector<double> save_times;  ///< empty: five evenly spaced times on [0, T0]
  } output;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Missing fields take defaults; unknown keys and type mismatches throw config_error.
RunConfig config_from_json(const nlohmann::json& j);
/// TOML for .toml files, JSON otherwise.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, bool toml);

/// Semantic checks (positive sizes, known family names); throws config_error.
void validate(const RunConfig& cfg);

/// Fills the seed (random when absent) so the config can be replayed.
RunConfig resolve(RunConfig cfg);

}  // namespace schrocurve
