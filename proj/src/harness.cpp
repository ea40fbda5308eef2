#include "htpkit/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "htpkit/parallel.hpp"

namespace htpkit {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorCode::invalid_argument, message);
}

RecoveryOutcome run_algorithm(Algorithm algorithm, const DenseMatrix& a, const Vector& b, Index s,
                              const HtpConfig& cfg) {
  switch (algorithm) {
    case Algorithm::htp:
      return htp(a, b, s, SparseVector::zero(a.cols()), cfg);
    case Algorithm::dp_htp:
      return dp_htp(a, b, s, cfg);
    case Algorithm::omp:
      return omp(a, b, s);
    case Algorithm::sp:
      return subspace_pursuit(a, b, s, cfg);
  }
  throw Error(ErrorCode::invalid_argument, "unknown algorithm");
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::htp:
      return "htp";
    case Algorithm::dp_htp:
      return "dp_htp";
    case Algorithm::omp:
      return "omp";
    case Algorithm::sp:
      return "sp";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::htp, Algorithm::dp_htp, Algorithm::omp, Algorithm::sp})
    if (to_string(a) == name) return a;
  throw Error(ErrorCode::invalid_argument, fmt::format("unknown algorithm '{}'", name));
}

std::vector<Algorithm> parse_algorithm_list(std::string_view csv) {
  std::vector<Algorithm> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t comma = std::min(csv.find(',', start), csv.size());
    std::string_view item = csv.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      const Algorithm a = parse_algorithm(item);
      if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
    }
    start = comma + 1;
  }
  require(!out.empty(), "empty algorithm list");
  return out;
}

Index round_half_up(double x) { return static_cast<Index>(std::floor(x + 0.5 + 1e-9)); }

CellKey derive_cell(const RunConfig& cfg, double delta, double rho) {
  CellKey key{delta, rho, 0, 0};
  key.m = round_half_up(delta * static_cast<double>(cfg.signal_length));
  key.s = round_half_up(rho * static_cast<double>(key.m));
  return key;
}

void RunConfig::validate() const {
  require(signal_length >= 1, "signal_length must be positive");
  require(trials_per_cell >= 1, "trials_per_cell must be positive");
  require(!algorithms.empty(), "no algorithms configured");
  require(success_tolerance > 0.0, "success_tolerance must be positive");
  htp_config.validate();
  for (double d : delta_values) require(d > 0.0 && d <= 1.0, fmt::format("delta {} outside (0, 1]", d));
  for (double r : rho_values) require(r > 0.0 && r < 1.0, fmt::format("rho {} outside (0, 1)", r));
  for (double d : delta_values) {
    for (double r : rho_values) {
      const CellKey key = derive_cell(*this, d, r);
      require(key.m >= 1 && key.s >= 1,
              fmt::format("cell (delta={}, rho={}) gives m={}, s={}", d, r, key.m, key.s));
      require(ensemble != Ensemble::identity || key.m == signal_length,
              "identity ensemble needs m == N in every cell");
    }
  }
}

RngSpec trial_stream(const RunConfig& cfg, double delta, double rho, Index trial_index) {
  return RngSpec(cfg.base_seed)
      .child("trial", {bits_of(delta), bits_of(rho), static_cast<std::uint64_t>(trial_index)});
}

TrialRecord run_trial(const RunConfig& cfg, double delta, double rho, Index trial_index) {
  TrialRecord record;
  record.cell = derive_cell(cfg, delta, rho);
  record.trial = trial_index;
  const Index n = cfg.signal_length;
  const Index m = record.cell.m;
  const Index s = record.cell.s;
  require(m >= 1 && s >= 1 && m <= n, "invalid cell");

  const RngSpec stream = trial_stream(cfg, delta, rho, trial_index);
  const DenseMatrix a = cfg.ensemble == Ensemble::identity
                            ? DenseMatrix(Matrix::Identity(m, n))
                            : generate_gaussian_matrix(m, n, stream.child("matrix"), true);
  const SparseVector x_star = generate_sparse_signal(n, s, stream.child("signal"));
  const Vector b = apply(a, x_star);
  const Vector truth = x_star.to_dense();
  const double scale = truth.norm();

  for (Algorithm algorithm : cfg.algorithms) {
    AlgorithmTrial result;
    result.algorithm = algorithm;
    const auto start = std::chrono::steady_clock::now();
    try {
      const RecoveryOutcome outcome = run_algorithm(algorithm, a, b, s, cfg.htp_config);
      const double err = (outcome.estimate.to_dense() - truth).norm();
      result.relative_error = scale > 0.0 ? err / scale : err;
      result.iterations = outcome.iterations;
      result.converged = outcome.converged;
      result.success = result.relative_error <= cfg.success_tolerance;
    } catch (const Error& e) {
      result.failure = to_string(e.code());
      result.relative_error = std::numeric_limits<double>::infinity();
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    record.results.push_back(std::move(result));
  }
  return record;
}

double PhaseCell::success_rate(std::size_t algorithm_slot) const {
  return trials > 0 ? static_cast<double>(successes.at(algorithm_slot)) / static_cast<double>(trials) : 0.0;
}

const PhaseCell& PhaseGrid::cell(std::size_t delta_slot, std::size_t rho_slot) const {
  return cells.at(delta_slot * rho_values.size() + rho_slot);
}

std::size_t PhaseGrid::slot(Algorithm algorithm) const {
  const auto it = std::find(algorithms.begin(), algorithms.end(), algorithm);
  if (it == algorithms.end()) {
    throw Error(ErrorCode::invalid_argument, fmt::format("algorithm {} not in grid", to_string(algorithm)));
  }
  return static_cast<std::size_t>(it - algorithms.begin());
}

double PhaseGrid::rate(Algorithm algorithm, std::size_t delta_slot, std::size_t rho_slot) const {
  return cell(delta_slot, rho_slot).success_rate(slot(algorithm));
}

PhaseGrid run_phase_grid(const RunConfig& cfg, Execution execution, int workers, bool keep_trials) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n_rho = cfg.rho_values.size();
  const std::size_t n_cells = cfg.delta_values.size() * n_rho;
  const auto per_cell = static_cast<std::size_t>(cfg.trials_per_cell);

  std::vector<TrialRecord> records(n_cells * per_cell);
  detail::for_each_index(static_cast<std::int64_t>(records.size()), execution, workers, [&](std::int64_t i) {
    const auto item = static_cast<std::size_t>(i);
    const std::size_t c = item / per_cell;
    records[item] = run_trial(cfg, cfg.delta_values[c / n_rho], cfg.rho_values[c % n_rho],
                              static_cast<Index>(item % per_cell));
  });

  PhaseGrid grid;
  grid.algorithms = cfg.algorithms;
  grid.delta_values = cfg.delta_values;
  grid.rho_values = cfg.rho_values;
  grid.cells.reserve(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    PhaseCell cell;
    cell.key = derive_cell(cfg, cfg.delta_values[c / n_rho], cfg.rho_values[c % n_rho]);
    cell.trials = cfg.trials_per_cell;
    cell.successes.assign(cfg.algorithms.size(), 0);
    for (std::size_t t = 0; t < per_cell; ++t) {
      const TrialRecord& rec = records[c * per_cell + t];
      for (std::size_t k = 0; k < rec.results.size(); ++k) cell.successes[k] += rec.results[k].success ? 1 : 0;
    }
    grid.cells.push_back(std::move(cell));
  }
  if (keep_trials) grid.trials = std::move(records);
  grid.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return grid;
}

std::vector<ContourPoint> extract_success_contour(const PhaseGrid& grid, Algorithm algorithm, double level) {
  require(level > 0.0 && level <= 1.0, "contour level must lie in (0, 1]");
  const std::size_t slot = grid.slot(algorithm);
  std::vector<std::size_t> order(grid.rho_values.size());
  for (std::size_t r = 0; r < order.size(); ++r) order[r] = r;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return grid.rho_values[x] < grid.rho_values[y]; });

  std::vector<ContourPoint> contour;
  for (std::size_t d = 0; d < grid.delta_values.size(); ++d) {
    std::optional<double> reached;
    for (std::size_t r : order) {
      if (grid.cell(d, r).success_rate(slot) < level) break;
      reached = grid.rho_values[r];
    }
    if (reached) contour.push_back({grid.delta_values[d], *reached});
  }
  return contour;
}

}  // namespace htpkit
