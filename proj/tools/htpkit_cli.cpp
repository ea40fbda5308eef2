// Command-line front end: single recoveries, phase grids, exact RICs,
// uniqueness constructions and the seeded verification suites.

#include <cstdint>
#include <cstring>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "htpkit/analysis.hpp"
#include "htpkit/fixture_io.hpp"
#include "htpkit/harness.hpp"
#include "htpkit/uniqueness.hpp"

using namespace htpkit;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  bool seed_given = false;
  int workers = 0;
  bool override_budget = false;
  bool serial = false;
};

Execution execution_of(const Globals& g) { return g.serial ? Execution::serial : Execution::parallel; }

EnumerationBudget budget_of(EnumerationBudget budget, const Globals& g) {
  budget.override_limits = g.override_budget;
  return budget;
}

// FNV-1a over raw bytes; identifies the inputs of a verify record.
class Digest {
 public:
  Digest& add(const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= bytes[i];
      hash_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Digest& add(const Matrix& m) {
    const Index dims[2] = {m.rows(), m.cols()};
    add(dims, sizeof dims);
    return add(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }
  Digest& add(std::int64_t v) { return add(&v, sizeof v); }
  Digest& add(double v) { return add(&v, sizeof v); }
  std::string hex() const { return fmt::format("{:016x}", hash_); }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::string join(const IndexSet& set) { return set.empty() ? "none" : fmt::format("{}", fmt::join(set, ",")); }

IndexSet parse_index_list(const std::string& text) {
  IndexSet out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, comma - start);
    if (!item.empty()) out.push_back(static_cast<Index>(std::stoll(item)));
    start = comma + 1;
  }
  return detail::sorted(std::move(out));
}

DenseMatrix load_sensing_matrix(const std::string& path, bool normalize) {
  Matrix entries = io::load_matrix(path);
  return normalize ? DenseMatrix::with_normalized_columns(std::move(entries)) : DenseMatrix(std::move(entries));
}

void print_outcome(std::string_view name, const RecoveryOutcome& out) {
  std::cout << fmt::format("algorithm={} iterations={} converged={} residual_norm={} support={}\n", name,
                           out.iterations, out.converged, io::format_real(out.residual_norm), join(out.support));
  for (std::size_t k = 0; k < out.estimate.support().size(); ++k) {
    std::cout << fmt::format("index={} value={}\n", out.estimate.support()[k],
                             io::format_real(out.estimate.values()[k]));
  }
  if (out.trace) {
    for (std::size_t n = 0; n < out.trace->size(); ++n) {
      const auto& t = (*out.trace)[n];
      std::cout << fmt::format("trace={} support={} residual_norm={}\n", n + 1, join(t.support),
                               io::format_real(t.residual_norm));
    }
  }
}

// --------------------------------------------------------------------------
// verify

struct VerifyTally {
  int passed = 0;
  int failed = 0;
  int vacuous = 0;

  void record(std::string_view name, const std::string& digest, const std::string& quantities, bool pass,
              bool hypothesis = true) {
    const char* result = !hypothesis ? "vacuous" : pass ? "pass" : "fail";
    std::cout << fmt::format("check={} inputs={} {} result={}\n", name, digest, quantities, result);
    if (!hypothesis) ++vacuous;
    else if (pass) ++passed;
    else ++failed;
  }
};

void verify_interlacing(const Globals& g, int cases, VerifyTally& tally) {
  const RngSpec root(g.seed);
  for (int c = 0; c < cases; ++c) {
    Engine pick = root.child("verify.interlacing.shape", {static_cast<std::uint64_t>(c)}).engine();
    const Index m = std::uniform_int_distribution<Index>(5, 8)(pick);
    const Index n = std::uniform_int_distribution<Index>(m + 1, 12)(pick);
    const Index k = std::uniform_int_distribution<Index>(2, std::min<Index>(4, m))(pick);
    const Index pivot = std::uniform_int_distribution<Index>(0, n - 1)(pick);
    const DenseMatrix a =
        generate_gaussian_matrix(m, n, root.child("verify.interlacing.matrix", {static_cast<std::uint64_t>(c)}), true);
    const auto r = verify_deflation_interlacing(a, k, pivot, budget_of(EnumerationBudget::for_ric(), g), execution_of(g));
    tally.record("interlacing", Digest().add(a.entries()).add(k).add(pivot).hex(),
                 fmt::format("m={} n={} k={} pivot={} delta_before={} delta_after={}", m, n, k, pivot,
                             io::format_real(r.delta_before), io::format_real(r.delta_after)),
                 r.holds, r.hypothesis_met);

    const IndexSet pivots = {pivot, 0};
    if (k >= 3) {
      const auto chain = verify_deflation_chain(a, k, pivots, budget_of(EnumerationBudget::for_ric(), g), execution_of(g));
      std::string deltas;
      for (const auto& step : chain.steps) deltas += fmt::format("{}{}", deltas.empty() ? "" : ",", io::format_real(step.delta));
      tally.record("interlacing_chain", Digest().add(a.entries()).add(k).add(pivot).hex(),
                   fmt::format("k={} delta_original={} step_deltas={}", k, io::format_real(chain.delta_original), deltas),
                   chain.holds(), chain.hypothesis_met);
    }
  }
}

void verify_projection(const Globals& g, int cases, VerifyTally& tally) {
  const RngSpec root(g.seed);
  for (int c = 0; c < cases; ++c) {
    const DenseMatrix b =
        generate_gaussian_matrix(10, 5, root.child("verify.projection", {static_cast<std::uint64_t>(c)}), true);
    const auto r = check_projection_inner_products(b, Split::three_way);
    const std::string digest = Digest().add(b.entries()).hex();
    tally.record("projection_interval", digest,
                 fmt::format("delta={} b2_pb2={}", io::format_real(r.delta), io::format_real(r.b2_pb2)),
                 r.interval_holds, !r.vacuous);
    tally.record("projection_cross", digest,
                 fmt::format("delta={} b3_pb2={}", io::format_real(r.delta), io::format_real(*r.b3_pb2)),
                 r.cross_bound_holds, !r.vacuous);
  }
}

void verify_thresholds(VerifyTally& tally) {
  const double omp0 = gamma_threshold_omp(0.0);
  tally.record("threshold_omp_zero", Digest().add(0.0).hex(), fmt::format("value={}", io::format_real(omp0)), omp0 == 1.0);
  const double dp0 = gamma_threshold_dp(0.0, 1.0);
  tally.record("threshold_dp_zero", Digest().add(0.0).add(1.0).hex(), fmt::format("value={}", io::format_real(dp0)),
               dp0 == 2.0);
  for (double delta : {0.5, 0.75}) {
    bool dp_threw = false;
    bool omp_threw = false;
    try {
      gamma_threshold_dp(delta, 0.5);
    } catch (const Error& e) {
      dp_threw = e.code() == ErrorCode::threshold_undefined;
    }
    try {
      gamma_threshold_omp(delta);
    } catch (const Error& e) {
      omp_threw = e.code() == ErrorCode::threshold_undefined;
    }
    tally.record("threshold_undefined", Digest().add(delta).hex(), fmt::format("delta={}", delta), dp_threw && omp_threw);
  }
}

int run_verify(const Globals& g, int cases, const std::string& suite) {
  VerifyTally tally;
  if (suite == "all" || suite == "interlacing") verify_interlacing(g, cases, tally);
  if (suite == "all" || suite == "projection") verify_projection(g, cases, tally);
  if (suite == "all" || suite == "thresholds") verify_thresholds(tally);
  std::cout << fmt::format("summary passed={} failed={} vacuous={}\n", tally.passed, tally.failed, tally.vacuous);
  return tally.failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hard thresholding pursuit toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Base seed");
  app.add_option("--workers", g.workers, "OpenMP worker threads (0: runtime default)")->check(CLI::NonNegativeNumber);
  app.add_flag("--override-budget", g.override_budget, "Lift enumeration limits");
  app.add_flag("--serial", g.serial, "Use the serial reference kernels");

  // recover
  auto* recover = app.add_subcommand("recover", "Recover one signal from fixture files");
  std::string matrix_path, rhs_path, algorithm_name = "htp";
  Index sparsity = 1;
  bool normalize = false, trace = false;
  HtpConfig htp_cfg;
  recover->add_option("--matrix", matrix_path, "Sensing matrix fixture")->required();
  recover->add_option("--rhs", rhs_path, "Measurement vector fixture")->required();
  recover->add_option("-s,--sparsity", sparsity, "Sparsity level")->required();
  recover->add_option("--algorithm", algorithm_name, "htp, dp_htp, omp or sp");
  recover->add_option("--max-iterations", htp_cfg.max_iterations, "Iteration cap");
  recover->add_flag("--normalize", normalize, "Normalize matrix columns first");
  recover->add_flag("--trace", trace, "Print the iteration trace");

  // phase
  auto* phase = app.add_subcommand("phase", "Run a phase-transition grid");
  std::string config_path, out_dir = "phase_out", algorithms_csv;
  Index trials_override = 0;
  bool keep_trials = false;
  phase->add_option("--config", config_path, "Run configuration (key = value lines)");
  phase->add_option("--out", out_dir, "Output directory");
  phase->add_option("--algorithms", algorithms_csv, "Comma-separated algorithm list");
  phase->add_option("--trials", trials_override, "Override trials_per_cell");
  phase->add_flag("--keep-trials", keep_trials, "Also write trials.csv");

  // ric
  auto* ric = app.add_subcommand("ric", "Exact restricted isometry constant of a fixture matrix");
  Index order = 2;
  bool ric_normalize = false;
  ric->add_option("--matrix", matrix_path, "Matrix fixture")->required();
  ric->add_option("-k,--order", order, "RIC order")->required();
  ric->add_flag("--normalize", ric_normalize, "Normalize matrix columns first");

  // uniqueness
  auto* uniq = app.add_subcommand("uniqueness", "Exhaustive oracle and uniqueness constructions");
  std::string mode = "oracle", signal_path, s_prime_csv, s_dprime_csv;
  double tol = kExactFitTolerance;
  Index j_prime = -1;
  uniq->add_option("--mode", mode, "oracle, rank, alternative or phi")
      ->check(CLI::IsMember({"oracle", "rank", "alternative", "phi"}));
  uniq->add_option("--matrix", matrix_path, "Matrix fixture")->required();
  uniq->add_option("--rhs", rhs_path, "Measurement vector fixture (oracle)");
  uniq->add_option("--signal", signal_path, "Dense signal fixture (alternative)");
  uniq->add_option("-s,--sparsity", sparsity, "Sparsity level");
  uniq->add_option("--tol", tol, "Exact-fit tolerance, relative to ||b||");
  uniq->add_option("--j-prime", j_prime, "Column outside supp(x) (alternative)");
  uniq->add_option("--s-prime", s_prime_csv, "Comma-separated S' (phi)");
  uniq->add_option("--s-dprime", s_dprime_csv, "Comma-separated S'' (phi)");
  uniq->add_flag("--normalize", normalize, "Normalize matrix columns first");

  // verify
  auto* verify = app.add_subcommand("verify", "Seeded interlacing, projection and threshold checks");
  int cases = 20;
  std::string suite = "all";
  verify->add_option("--cases", cases, "Random cases per suite")->check(CLI::PositiveNumber);
  verify->add_option("--suite", suite, "all, interlacing, projection or thresholds")
      ->check(CLI::IsMember({"all", "interlacing", "projection", "thresholds"}));

  CLI11_PARSE(app, argc, argv);
  g.seed_given = seed_opt->count() > 0;
  if (g.workers > 0) omp_set_num_threads(g.workers);

  try {
    if (*recover) {
      const DenseMatrix a = load_sensing_matrix(matrix_path, normalize);
      const Vector b = io::load_vector(rhs_path);
      htp_cfg.record_trace = trace;
      const Algorithm algorithm = parse_algorithm(algorithm_name);
      RecoveryOutcome out;
      switch (algorithm) {
        case Algorithm::htp: out = htp(a, b, sparsity, SparseVector::zero(a.cols()), htp_cfg); break;
        case Algorithm::dp_htp: out = dp_htp(a, b, sparsity, htp_cfg); break;
        case Algorithm::omp: out = omp(a, b, sparsity); break;
        case Algorithm::sp: out = subspace_pursuit(a, b, sparsity, htp_cfg); break;
      }
      print_outcome(to_string(algorithm), out);
      return 0;
    }

    if (*phase) {
      RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
      if (g.seed_given) cfg.base_seed = g.seed;
      if (!algorithms_csv.empty()) cfg.algorithms = parse_algorithm_list(algorithms_csv);
      if (trials_override > 0) cfg.trials_per_cell = trials_override;
      cfg.validate();
      ensure_writable_directory(out_dir);
      const PhaseGrid grid = run_phase_grid(cfg, execution_of(g), g.workers, keep_trials);
      const OutputFiles files = emit_outputs(grid, cfg, out_dir);
      std::cout << fmt::format("cells={} runtime_seconds={:.2f}\n", grid.cells.size(), grid.runtime_seconds);
      std::cout << fmt::format("wrote {} {} {}\n", files.cells.string(), files.contour.string(), files.metadata.string());
      for (const auto& h : files.heatmaps) std::cout << fmt::format("wrote {}\n", h.string());
      return 0;
    }

    if (*ric) {
      const DenseMatrix a = load_sensing_matrix(matrix_path, ric_normalize);
      const auto budget = budget_of(EnumerationBudget::for_ric(), g);
      const RicEstimate r = a.column_normalized() ? exact_ric(a, order, budget, execution_of(g))
                                                  : quadratic_form_ric(a, order, budget, execution_of(g));
      std::cout << fmt::format("record=ric order={} delta={} sigma_min={} sigma_max={} worst_support={}\n", r.order,
                               io::format_real(r.delta), io::format_real(r.sigma_min), io::format_real(r.sigma_max),
                               join(r.worst_support));
      return 0;
    }

    if (*uniq) {
      const DenseMatrix a = load_sensing_matrix(matrix_path, normalize);
      const auto budget = budget_of(EnumerationBudget::for_uniqueness(), g);
      if (mode == "oracle") {
        if (rhs_path.empty()) throw Error(ErrorCode::invalid_argument, "--rhs is required for the oracle");
        write_records(std::cout, solve_l0_exhaustive(a, io::load_vector(rhs_path), sparsity, tol, budget, execution_of(g)));
      } else if (mode == "rank") {
        write_records(std::cout, check_2s_rank_condition(a, sparsity, budget, execution_of(g)), sparsity);
      } else if (mode == "alternative") {
        if (signal_path.empty()) throw Error(ErrorCode::invalid_argument, "--signal is required");
        const SparseVector x = SparseVector::from_dense(io::load_vector(signal_path));
        const SparseVector alt = construct_alternative_solution(a, x, j_prime);
        std::cout << fmt::format("record=alternative j_prime={} support={} values=", j_prime, join(alt.support()));
        for (std::size_t k = 0; k < alt.values().size(); ++k)
          std::cout << (k ? "," : "") << io::format_real(alt.values()[k]);
        std::cout << '\n';
      } else {
        write_records(std::cout, phi_dimension_report(a, parse_index_list(s_prime_csv), parse_index_list(s_dprime_csv), sparsity));
      }
      return 0;
    }

    if (*verify) return run_verify(g, cases, suite);
  } catch (const Error& e) {
    std::cerr << fmt::format("error [{}]: {}\n", to_string(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
