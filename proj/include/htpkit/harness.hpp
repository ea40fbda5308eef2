#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "htpkit/combinations.hpp"
#include "htpkit/core.hpp"
#include "htpkit/solvers.hpp"

namespace htpkit {

// TR-HTP would slot in here once it has a definition.
enum class Algorithm { htp, dp_htp, omp, sp };

std::string_view to_string(Algorithm algorithm);
/// Accepts htp, dp_htp, omp, sp.
Algorithm parse_algorithm(std::string_view name);
/// Comma-separated list, e.g. "htp,dp_htp".
std::vector<Algorithm> parse_algorithm_list(std::string_view csv);

/// Sensing ensemble. `identity` is a test hook and needs m == N.
enum class Ensemble { gaussian, identity };

struct RunConfig {
  Index signal_length = 200;
  std::vector<double> delta_values = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  std::vector<double> rho_values = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  Index trials_per_cell = 100;
  std::vector<Algorithm> algorithms = {Algorithm::htp, Algorithm::dp_htp};
  std::uint64_t base_seed = 0;
  /// Relative l2 error counted as a success.
  double success_tolerance = 1e-4;
  HtpConfig htp_config;
  Ensemble ensemble = Ensemble::gaussian;

  /// Throws invalid_argument unless every derived cell has m >= 1, s >= 1.
  void validate() const;
};

/// floor(x + 1/2), nudged so that values like 0.3 * 200 land on 60.
Index round_half_up(double x);

struct CellKey {
  double delta = 0.0;
  double rho = 0.0;
  Index m = 0;
  Index s = 0;
};

/// m = round(delta N), s = round(rho m).
CellKey derive_cell(const RunConfig& cfg, double delta, double rho);

struct AlgorithmTrial {
  Algorithm algorithm = Algorithm::htp;
  bool success = false;
  double relative_error = 0.0;
  Index iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;
  /// Empty unless the solver threw; then the error code name.
  std::string failure;
};

struct TrialRecord {
  CellKey cell;
  Index trial = 0;
  std::vector<AlgorithmTrial> results;
};

/// Stream for one trial; the matrix and signal come from its "matrix" and
/// "signal" children.
RngSpec trial_stream(const RunConfig& cfg, double delta, double rho, Index trial_index);

/// One paired trial: every algorithm in cfg runs on the same (A, b, s).
TrialRecord run_trial(const RunConfig& cfg, double delta, double rho, Index trial_index);

struct PhaseCell {
  CellKey key;
  Index trials = 0;
  /// Aligned with PhaseGrid::algorithms.
  std::vector<Index> successes;

  double success_rate(std::size_t algorithm_slot) const;
};

struct PhaseGrid {
  std::vector<Algorithm> algorithms;
  std::vector<double> delta_values;
  std::vector<double> rho_values;
  /// Delta-major: cells[d * rho_values.size() + r].
  std::vector<PhaseCell> cells;
  double runtime_seconds = 0.0;
  std::optional<std::vector<TrialRecord>> trials;

  const PhaseCell& cell(std::size_t delta_slot, std::size_t rho_slot) const;
  /// Slot of `algorithm` in `algorithms`; throws if absent.
  std::size_t slot(Algorithm algorithm) const;
  double rate(Algorithm algorithm, std::size_t delta_slot, std::size_t rho_slot) const;
};

/// Runs every trial of every cell. Trial streams do not depend on execution
/// order, and tallies are summed in a fixed order afterwards, so the serial
/// and parallel paths agree exactly.
PhaseGrid run_phase_grid(const RunConfig& cfg, Execution execution = Execution::parallel,
                         int workers = 0, bool keep_trials = false);

struct ContourPoint {
  double delta = 0.0;
  double rho_max = 0.0;
};

/// For each delta, scans rho upward and stops at the first cell below `level`;
/// rho_max is the last rho passed. Deltas whose lowest rho already fails are
/// left out.
std::vector<ContourPoint> extract_success_contour(const PhaseGrid& grid, Algorithm algorithm, double level);

// ---------------------------------------------------------------------------
// Outputs

/// Creates `dir` if needed and probes it with a scratch file. Throws io when
/// it cannot be written.
void ensure_writable_directory(const std::filesystem::path& dir);

void write_cells_csv(std::ostream& out, const PhaseGrid& grid);
void write_contour_csv(std::ostream& out, const PhaseGrid& grid, const std::vector<double>& levels);
void write_trials_csv(std::ostream& out, const PhaseGrid& grid);
void write_heatmap_svg(std::ostream& out, const PhaseGrid& grid, Algorithm algorithm);
void write_metadata(std::ostream& out, const PhaseGrid& grid, const RunConfig& cfg);

struct OutputFiles {
  std::filesystem::path cells;
  std::filesystem::path contour;
  std::filesystem::path metadata;
  std::vector<std::filesystem::path> heatmaps;
  std::optional<std::filesystem::path> trials;
};

/// cells.csv, contour.csv, metadata.txt, heatmap_<algorithm>.svg, and
/// trials.csv when the grid kept its trials.
OutputFiles emit_outputs(const PhaseGrid& grid, const RunConfig& cfg, const std::filesystem::path& out_dir,
                         const std::vector<double>& contour_levels = {0.5, 0.95});

/// Build identifier recorded in the metadata.
std::string build_id();

// ---------------------------------------------------------------------------
// Config files: "key = value" per line, '#' starts a comment. Keys are the
// RunConfig field names; HtpConfig fields use an "htp." prefix.

RunConfig parse_run_config(std::istream& in);
RunConfig load_run_config(const std::filesystem::path& path);
std::string format_run_config(const RunConfig& cfg);

}  // namespace htpkit
