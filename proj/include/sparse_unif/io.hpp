#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>
#include "sparse_unif/harness.hpp"
#include "sparse_unif/lowerbound.hpp"
#include "sparse_unif/sampling.hpp"
#include "sparse_unif/statistics.hpp"

namespace sparse_unif {

using Json = nlohmann::json;

std::string format_double(double x);

Json to_json(const TestReport& report);
Json to_json(const SecondMomentReport& report);
Json to_json(const PhaseGridSpec& spec);
Json to_json(const PowerGrid& grid);

PhaseGridSpec phase_grid_spec_from_json(const Json& j);
PowerGrid power_grid_from_json(const Json& j);

/// Reads a phase-grid config; IoError on unreadable files, ConfigError on bad content.
PhaseGridSpec load_phase_grid_spec(const std::filesystem::path& path);

/// A single CSV row of counts, or JSON {"counts", "n", "scheme"}. A CSV row
/// takes n = sum of counts and the given default scheme.
Histogram parse_histogram(const std::string& text, SamplingScheme default_scheme = SamplingScheme::Multinomial);
Histogram load_histogram(const std::filesystem::path& path,
                         SamplingScheme default_scheme = SamplingScheme::Multinomial);

enum class GridFormat { CSV, JSON };

GridFormat parse_grid_format(const std::string& name);
std::string grid_to_csv(const PowerGrid& grid);
std::string boundary_to_csv(const PowerGrid& grid);
/// `path` with its extension replaced by ".boundary.csv".
std::filesystem::path boundary_path(const std::filesystem::path& path);
/// Writes the grid and its sibling boundary file; IoError carries the path.
void emit_grid(const PowerGrid& grid, const std::filesystem::path& path, GridFormat format);

}  // namespace sparse_unif
