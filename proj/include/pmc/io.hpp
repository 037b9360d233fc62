#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pmc/diagnostics.hpp"

namespace pmc {

// ---- trajectories ----
//
// Binary layout (little-endian):
//   16 bytes  magic "PMCLOSURETRJ" + u32 version
//   40 bytes  u64 dim, f64 dt, f64 t0, u64 count, u64 flags (bit0: complex)
//   payload   count rows of dim float64 (re, im interleaved when complex)
//   4 bytes   CRC32 of everything above

constexpr std::uint32_t kTrajectoryVersion = 1;
constexpr std::uint64_t kFlagComplex = 1;

// Real unless any imaginary part is nonzero.
bool needs_complex(const Trajectory& traj);

void write_trajectory(const std::string& path, const Trajectory& traj, std::optional<bool> complex = std::nullopt);
// expect_complex, when given, must match the stored flag.
Trajectory read_trajectory(const std::string& path, std::optional<bool> expect_complex = std::nullopt);
bool trajectory_is_complex(const std::string& path);

// First line "# {json header}", then "t,..." column names, then one row per sample at %.17g.
void write_trajectory_csv(const std::string& path, const Trajectory& traj, std::optional<bool> complex = std::nullopt);
Trajectory read_trajectory_csv(const std::string& path);

// Dispatch on extension: ".csv" is text, anything else binary.
Trajectory load_trajectory(const std::string& path);
void save_trajectory(const std::string& path, const Trajectory& traj);

// ---- model files (INI: sections of key = value) ----

// Numbers are real "x" or complex "(x,y)"; lists are whitespace separated.
void write_model(const std::string& path, const QuadraticModel& model, const CVec* initial = nullptr);
QuadraticModel read_model(const std::string& path, CVec* initial = nullptr);

// Mean and basis vectors are stored when present.
void write_eigen_model(const std::string& path, const EigenModel& model, const CVec* mean = nullptr);
EigenModel read_eigen_model(const std::string& path, CVec* mean = nullptr);

struct ParameterizationFile {
    Family family = Family::ZERO;
    int dim = 0, cutoff = 0;
    bool limit = false;  // tau -> infinity QSA
    std::vector<double> taus;
    std::string eigen_model;  // path, as written
};
void write_parameterization(const std::string& path, const Parameterization& p, const std::string& eigen_model_path,
                            bool limit = false);
ParameterizationFile read_parameterization_file(const std::string& path);
// Coefficients are rebuilt from the eigen model.
Parameterization build_from_file(const ParameterizationFile& f, const EigenModel& model);

// ---- misc ----

std::uint32_t crc32_of(const std::string& bytes);
// Output paths are relative to PM_CLOSURE_DATA_DIR when it is set.
std::string output_path(const std::string& path);
void ensure_parent_dir(const std::string& path);

// Manifest JSON: config, config hash, seed, library versions, command line.
void write_manifest(const std::string& path, const std::string& config_json, std::uint64_t seed,
                    const std::string& command_line);
std::string versions_json();

// CSV table with a header row; values at %.17g.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

}  // namespace pmc
