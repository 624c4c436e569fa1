#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kuramoto/analysis.hpp"
#include "kuramoto/concentration.hpp"
#include "kuramoto/kinetic.hpp"

namespace kuramoto::io {

// 17-significant-digit formatting shared by every writer, so reruns are
// byte-identical.
std::string fmt(double x);

void write_diagnostics_csv(const std::string& path, const KineticTrajectory& traj,
                           std::uint64_t config_hash);
// Loads the per-step series back into a trajectory shell (no snapshots).
KineticTrajectory read_diagnostics_csv(const std::string& path);

void write_snapshot(const std::string& path, const KineticState& state, double K,
                    std::uint64_t config_hash);
KineticState read_snapshot(const std::string& path, double* K_out = nullptr,
                           std::uint64_t* hash_out = nullptr);

// Full run directory: diagnostics.csv + snapshots/snap_NNNNNN.bin + manifest.
void write_run(const std::string& dir, const KineticTrajectory& traj,
               std::uint64_t config_hash, const std::string& config_text,
               double wallclock_s);
KineticTrajectory read_run(const std::string& dir);

std::string reports_to_json(const std::vector<InequalityReport>& reports,
                            std::uint64_t config_hash, bool include_series = true);
std::string subdivision_to_json(const analysis::SubdivisionReport& sub,
                                std::uint64_t config_hash);

void write_concentration_csv(const std::string& path, const mc::ConcentrationReport& rep,
                             std::uint64_t config_hash);
void write_mass_diameter_csv(const std::string& path, const mc::MassDiameterReport& rep,
                             std::uint64_t config_hash);

// Two-column t,R series (for the subdivision fixture path). Lines starting
// with '#' are skipped; the first non-comment row may be a header.
void read_series_csv(const std::string& path, std::vector<double>& t,
                     std::vector<double>& R);

}  // namespace kuramoto::io
