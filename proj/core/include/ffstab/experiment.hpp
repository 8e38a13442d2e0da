#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ffstab/models.hpp"
#include "ffstab/spectral_flow.hpp"
#include "ffstab/stability_bounds.hpp"

namespace ffstab {

struct EpsGrid {
  double start = 0.0;
  double stop = 0.05;
  int steps = 10;

  std::vector<double> values() const;
};

struct ExperimentConfig {
  std::string model = "orbital";  // orbital | aklt | file
  std::string model_path;         // interaction JSON when model == "file"
  int start = 1;                  // leftmost site of every volume
  std::vector<int> lengths{8, 10, 12};
  std::vector<int> D{2};
  EpsGrid eps;
  double gamma = 0.5;  // tracking floor for the flow
  std::vector<std::uint64_t> seeds{7};
  PerturbationParams perturbation;
  std::optional<double> C;
  std::optional<FFunctionSpec> F;  // defaults to the perturbation envelope
  int ltqo_kmax = 2;
  WitnessOptions witness;
  int flow_length = 8;
  std::vector<double> flow_eps{0.0, 0.005, 0.01, 0.02};
  double nu = 1.0;
  double mu = 2.0;
  std::string out_dir = "ffstab-out";
};

// JSON config; errors name the offending field or line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct CheckLine {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunOptions {
  std::optional<std::string> out_dir;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

// The model family of a config: unperturbed interaction on a domain and the perturbation for each volume.
// Fermionic models are stored as their spin images.
struct ModelSetup {
  Interaction eta;
  std::function<Interaction(const Interval&, std::uint64_t)> perturbation;
  std::optional<OrbitalModel> orbital;
  bool even_only = false;  // fermionic model: LTQO probes use even observables
  FFunctionSpec F;
  OmegaModel omega;
};

ModelSetup make_setup(const ExperimentConfig& cfg);

// max over grid points of ||Phi^1||_{F_phi} / (eps (||eta||_F + ||Psi||_F)).
double calibrate_C_from_flow(const FlowResult& flow, const Interaction& eta, const Interaction& psi_bulk,
                             const FFunctionSpec& F, double gamma);

// Lieb-Robinson velocity bound 2 C_F ||Psi||_F for the flow decay.
double flow_velocity(const Interaction& psi, const FFunctionSpec& F);

DerivedFSpec f_phi_for(const Interaction& eta, const Interaction& psi, const FFunctionSpec& F, double gamma);

// Runs one subcommand (validate, ltqo, flow, bounds, gapsweep, highergaps, sp0scan, all), writing
// CSV files, constants.json, and summary.txt. Returns 0 when every check passes, 1 otherwise.
int run(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log);

}  // namespace ffstab
