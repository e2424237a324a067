#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "openturb/analysis.hpp"
#include "openturb/fpe.hpp"
#include "openturb/sde.hpp"

namespace openturb {

// All CSV numbers are written as %.16e (17 significant digits), enough to
// round-trip any double exactly.
std::string format_full(double v);

std::string moments_csv(const EnsembleMoments& series);
EnsembleMoments parse_moments_csv(const std::string& text);

std::string oracle_table_csv(const OracleTable& table);
OracleTable parse_oracle_table_csv(const std::string& text);

std::string regime_csv(std::span<const RegimeReport> reports);
std::string deviation_csv(const DeviationReport& report);
std::string energy_csv(std::span<const EnergyBudgetPoint> points);

// Long-format grid dump, header "x,p,W", one row per cell.
std::string grid_csv(const PhaseSpaceGrid& grid);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// Binary phase-space snapshot: magic "OTFP", then the six geometry fields
// (u64 nx, u64 np, f64 x_min, x_max, p_min, p_max), then the cells as f64
// row-major. Little-endian, native doubles.
void write_grid_binary(const std::filesystem::path& path,
                       const PhaseSpaceGrid& grid);
PhaseSpaceGrid read_grid_binary(const std::filesystem::path& path);

}  // namespace openturb
