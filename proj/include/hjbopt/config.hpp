#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hjbopt/objective.hpp"
#include "hjbopt/solver.hpp"
#include "hjbopt/trajectory.hpp"

namespace hjbopt::config {

enum class PolicyKind { optimal, quasi, sampled };

struct TrajectorySection {
    Vec x0;
    double T = 10.0;
    double dt = 1e-3;
    PolicyKind policy = PolicyKind::optimal;
    trajectory::QuasiOptimalPolicy quasi;
    trajectory::SampledPolicy sampled;
};

struct AnalysisSection {
    double r = 0.4;
    double floor = 1e-4;
    std::vector<double> deltas;
    double tol_rate = 0.05;
    double scan_step = 1e-3;
};

// One experiment: objective + domain + lambda + solver + trajectory +
// analysis settings. Loaded from a JSON document and schema-validated
// before any computation runs.
struct ExperimentConfig {
    std::string objective_name;
    objective::BuiltinParams objective_params;
    Box domain;
    std::vector<std::size_t> nodes;
    double lambda = 0.1;
    solver::SolverOptions solver;
    TrajectorySection traj;
    AnalysisSection analysis;
    std::string output_dir = "out";

    objective::ObjectiveSpec make_objective() const;
    grid::RectGrid make_grid(bool quick = false) const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

// FNV-1a over a file's bytes, hex-encoded; used for manifest checksums and
// determinism tests.
std::string file_checksum(const std::string& path);
std::string text_checksum(const std::string& text);

struct ManifestEntry {
    std::string name;
    std::uint64_t bytes = 0;
    std::string checksum;
};

struct RunManifest {
    std::string config_hash;
    std::string tool_version;
    std::vector<std::pair<std::string, double>> stage_seconds;
    std::vector<ManifestEntry> files;

    void add_file(const std::string& dir, const std::string& name);
    void save(const std::string& path) const;
};

inline constexpr const char* kToolVersion = "hjbopt 0.1.0";

}  // namespace hjbopt::config
