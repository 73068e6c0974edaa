#pragma once

#include "gf/lyapunov.hpp"
#include "gf/pde.hpp"
#include "gf/pdmp.hpp"
#include "gf/rates.hpp"
#include "gf/tails.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace gf {

inline constexpr const char* kToolVersion = "gfcell 0.1.0";

// Fully parsed run configuration; every output embeds its hash so results are
// traceable to the exact inputs.
struct RunConfig {
    RateModel model;
    FragmentationKernel kernel;
    std::uint64_t seed = 1;

    StationaryConfig simulation;

    // Lyapunov knobs; negative means "auto".
    double lyap_a = -1.0;
    double lyap_b = -1.0;
    double lyap_eps = 0.1;
    double lyap_C = 0.5;

    double pde_x_min = 1e-3;
    double pde_x_max = 30.0;
    int pde_cells = 512;
    double pde_tol = 1e-7;
    double pde_max_time = 1e4;

    double compare_bound = 0.05;
    std::string output_dir = "out";

    nlohmann::json raw;  // the config as parsed, echoed into outputs

    std::pair<double, double> lyapunov_exponents() const;
    std::string hash() const;  // FNV-1a over the canonical dump
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

RateFunction parse_rate(const nlohmann::json& j, const std::string& which);
FragmentationKernel parse_kernel(const nlohmann::json& j);

// Serialization of the report types.
nlohmann::json to_json(const ConditionCheck& c);
nlohmann::json to_json(const BalanceClassification& c);
nlohmann::json to_json(const DriftReport& r);
nlohmann::json to_json(const LeftTailFit& f);
nlohmann::json to_json(const RightTailFit& f);
nlohmann::json to_json(const TailPrediction& p);
nlohmann::json to_json(const StationarityResidual& r);
nlohmann::json to_json(const Provenance& p);

// CSV writers (deterministic shortest round-trip number formatting).
std::string format_double(double v);
void write_histogram_csv(const std::string& path, const EmpiricalDistribution& dist, int bins);
void write_trajectory_csv(const std::string& path, const Trajectory& traj, const FlowMap& fm);
void write_profile_csv(const std::string& path, const SizeGrid& grid, const DensityField& field);
void write_residual_history_csv(const std::string& path, const std::vector<double>& history);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace gf
