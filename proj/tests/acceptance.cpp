// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [output-dir]   (phase-grid outputs land there; default ./acceptance_out)

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "htpkit/analysis.hpp"
#include "htpkit/harness.hpp"
#include "htpkit/solvers.hpp"
#include "htpkit/uniqueness.hpp"

using namespace htpkit;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Verdict {
  bool pass = false;
  std::string detail;
};

IndexSet random_subset(Index n, Index k, std::mt19937_64& rng) {
  IndexSet all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

double relative_residual(const DenseMatrix& a, const SparseVector& z, const Vector& b) {
  return (a.entries() * z.to_dense() - b).norm() / b.norm();
}

RunConfig criterion1_config() {
  RunConfig cfg;
  cfg.signal_length = 200;
  cfg.delta_values = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  cfg.rho_values = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  cfg.trials_per_cell = 100;
  cfg.algorithms = {Algorithm::htp, Algorithm::dp_htp};
  cfg.base_seed = kSeed;
  return cfg;
}

std::string csv_of(const PhaseGrid& g, bool contour) {
  std::ostringstream out;
  if (contour)
    write_contour_csv(out, g, {0.5, 0.95});
  else
    write_cells_csv(out, g);
  return out.str();
}

Verdict phase_gap(const PhaseGrid& g) {
  const std::size_t htp_slot = g.slot(Algorithm::htp);
  const std::size_t dp_slot = g.slot(Algorithm::dp_htp);
  int violations = 0;
  double worst = 0.0;
  std::vector<std::string> gap_cells;
  for (const PhaseCell& c : g.cells) {
    const double h = c.success_rate(htp_slot);
    const double d = c.success_rate(dp_slot);
    if (d < h - 0.10) ++violations;
    worst = std::max(worst, h - d);
    if (c.key.rho >= 0.6 - 1e-12 && d >= 0.7 && h <= 0.3)
      gap_cells.push_back(fmt::format("({},{}) dp={} htp={}", c.key.delta, c.key.rho, d, h));
  }
  std::string listed;
  for (const auto& s : gap_cells) listed += (listed.empty() ? "" : "; ") + s;
  return {violations == 0 && gap_cells.size() >= 3,
          fmt::format("(a) cells with dp < htp - 0.10: {} (largest htp - dp = {:.2f}); (b) gap cells at rho >= 0.6: "
                      "{} of 3 needed [{}]; grid runtime {:.1f} s",
                      violations, worst, gap_cells.size(), listed, g.runtime_seconds)};
}

Verdict htp_baseline() {
  int ok = 0;
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const RngSpec spec = RngSpec(kSeed).child("baseline", {t});
    const DenseMatrix a = generate_gaussian_matrix(50, 100, spec.child("matrix"), true);
    const SparseVector x = generate_sparse_signal(100, 5, spec.child("signal"));
    const RecoveryOutcome out = htp(a, apply(a, x), 5, SparseVector::zero(100));
    const double err = (out.estimate.to_dense() - x.to_dense()).norm() / x.norm();
    if (err <= 1e-6) {
      ++ok;
      worst = std::max(worst, err);
    }
  }
  return {ok >= 99, fmt::format("{}/100 recovered to 1e-6 (largest error among them {:.2e})", ok, worst)};
}

Verdict alternative_solutions() {
  std::mt19937_64 rng(kSeed);
  int ok = 0;
  std::string first_failure;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const Index m = 2 + static_cast<Index>(t % 4);
    const Index n = std::uniform_int_distribution<Index>(m + 1, 12)(rng);
    const RngSpec spec = RngSpec(kSeed).child("alternative", {t});
    const DenseMatrix a = generate_gaussian_matrix(m, n, spec.child("matrix"), true);
    const SparseVector x = generate_sparse_signal(n, m, spec.child("signal"));
    IndexSet free;
    for (Index j = 0; j < n; ++j)
      if (x.at(j) == 0.0) free.push_back(j);
    const Index j_prime = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    try {
      const SparseVector alt = construct_alternative_solution(a, x, j_prime);
      const Vector b = apply(a, x);
      const SolutionSet set = solve_l0_exhaustive(a, b, m);
      const bool good = !same_solution(alt, x) && alt.nnz() <= m && relative_residual(a, alt, b) <= 1e-8 &&
                        set.contains(alt) && set.contains(x);
      if (good)
        ++ok;
      else if (first_failure.empty())
        first_failure = fmt::format(" first failure: instance {}", t);
    } catch (const Error& e) {
      if (first_failure.empty()) first_failure = fmt::format(" first failure: instance {}: {}", t, e.what());
    }
  }
  return {ok == 100, fmt::format("{}/100 alternative solutions oracle-confirmed{}", ok, first_failure)};
}

Verdict rank_condition_equivalence() {
  std::mt19937_64 rng(kSeed + 1);
  int holds = 0, unique = 0, draws = 0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    const Index s = 1 + static_cast<Index>(t % 3);
    const Index m = 2 * s + static_cast<Index>(t % 2);
    const Index n = std::uniform_int_distribution<Index>(m + 1, 12)(rng);
    const RngSpec spec = RngSpec(kSeed).child("rank", {t});
    const DenseMatrix a = generate_gaussian_matrix(m, n, spec.child("matrix"), true);
    holds += check_2s_rank_condition(a, s).holds;
    for (std::uint64_t r = 0; r < 20; ++r) {
      const SparseVector x = generate_sparse_signal(n, s, spec.child("signal", {r}));
      const SolutionSet set = solve_l0_exhaustive(a, apply(a, x), s);
      ++draws;
      unique += set.unique() && same_solution(set.solutions[0], x);
    }
  }
  int failed = 0, witnessed = 0;
  for (std::uint64_t t = 0; t < 10; ++t) {
    const Index s = 2 + static_cast<Index>(t % 2);
    const Index m = 2 * s + 1;
    const Index n = 12;
    const RngSpec spec = RngSpec(kSeed).child("planted", {t});
    Matrix raw = generate_gaussian_matrix(m, n, spec.child("matrix"), false).entries();
    const IndexSet w = random_subset(n, 2 * s, rng);
    Vector combo = Vector::Zero(m);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) combo += raw.col(w[i]) * static_cast<double>(i + 1);
    raw.col(w.back()) = combo;
    const DenseMatrix a = DenseMatrix::with_normalized_columns(raw);
    const RankCondition rc = check_2s_rank_condition(a, s);
    if (rc.holds || !rc.witness) continue;
    ++failed;
    const NonUniqueInstance inst = non_unique_instance(a, *rc.witness);
    const SolutionSet set = solve_l0_exhaustive(a, inst.rhs, s);
    const bool ok = !same_solution(inst.first, inst.second) && inst.first.nnz() <= s && inst.second.nnz() <= s &&
                    relative_residual(a, inst.first, inst.rhs) <= 1e-8 &&
                    relative_residual(a, inst.second, inst.rhs) <= 1e-8 && set.solutions.size() >= 2;
    witnessed += ok;
  }
  return {holds == 50 && unique == draws && failed == 10 && witnessed == 10,
          fmt::format("condition holds on {}/50 Gaussian matrices, oracle unique on {}/{} draws; planted: condition "
                      "fails on {}/10, non-unique witness confirmed on {}/10",
                      holds, unique, draws, failed, witnessed)};
}

Verdict phi_bound() {
  std::mt19937_64 rng(kSeed + 2);
  int bound_ok = 0, samples = 0, confirmed = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const Index s = 3 + static_cast<Index>(t % 3);
    const Index m = std::uniform_int_distribution<Index>(s + 1, 2 * s - 1)(rng);
    const Index n = 12;
    const RngSpec spec = RngSpec(kSeed).child("phi", {t});
    const DenseMatrix a = generate_gaussian_matrix(m, n, spec.child("matrix"), true);
    const IndexSet sp = random_subset(n, s, rng);
    const IndexSet sdp = random_subset(n, s, rng);
    const PhiReport rep = phi_dimension_report(a, sp, sdp, s);
    const bool ok = rep.psi_dim <= rep.kernel_dim &&
                    (rep.kernel_dim == 0 || rep.psi_dim + rep.omega_dim <= 2 * s - m);
    bound_ok += ok;
    const auto member = sample_phi_member(a, sp, sdp, spec.child("sample"));
    if (!member) continue;
    ++samples;
    const SolutionSet set = solve_l0_exhaustive(a, apply(a, *member), s);
    confirmed += set.contains(*member) && set.solutions.size() >= 2;
  }
  return {bound_ok == 100 && confirmed == samples && samples > 0,
          fmt::format("bound holds on {}/100 pairs; {}/{} sampled members oracle-confirmed non-unique", bound_ok,
                      confirmed, samples)};
}

Verdict interlacing() {
  std::mt19937_64 rng(kSeed + 3);
  int steps = 0, held = 0, chains = 0, chains_held = 0;
  double worst = -1.0;
  for (std::uint64_t t = 0; steps < 100 && t < 10000; ++t) {
    const Index k = 2 + static_cast<Index>(t % 3);
    const Index m = std::uniform_int_distribution<Index>(k + 4, 10)(rng);
    const Index n = std::uniform_int_distribution<Index>(m + 1, 12)(rng);
    const DenseMatrix a = generate_gaussian_matrix(m, n, RngSpec(kSeed).child("interlacing", {t}), true);
    const Index pivot = std::uniform_int_distribution<Index>(0, n - 1)(rng);
    const InterlacingReport r = verify_deflation_interlacing(a, k, pivot);
    if (!r.hypothesis_met) continue;
    ++steps;
    held += r.holds;
    worst = std::max(worst, r.delta_after - r.delta_before);

    IndexSet pivots;
    for (Index p = 0; p + 1 < k; ++p) pivots.push_back(std::uniform_int_distribution<Index>(0, n - 1 - p)(rng));
    const ChainReport chain = verify_deflation_chain(a, k, pivots);
    ++chains;
    chains_held += chain.holds();
  }
  return {steps == 100 && held == 100 && chains_held == chains,
          fmt::format("{}/{} single steps hold (largest delta_after - delta_before = {:.3e}); {}/{} chains hold",
                      held, steps, worst, chains_held, chains)};
}

Verdict propositions() {
  std::mt19937_64 rng(kSeed + 4);
  int checked = 0, interval = 0, cross = 0;
  for (std::uint64_t t = 0; checked < 1000 && t < 100000; ++t) {
    const Index k = std::uniform_int_distribution<Index>(3, 5)(rng);
    const Index m = std::uniform_int_distribution<Index>(4 * k, 30)(rng);
    const DenseMatrix b = generate_gaussian_matrix(m, k, RngSpec(kSeed).child("propositions", {t}), true);
    const ProjectionReport r = check_projection_inner_products(b, Split::three_way);
    if (r.vacuous) continue;
    ++checked;
    interval += r.interval_holds;
    cross += r.cross_bound_holds;
  }
  return {checked == 1000 && interval == 1000 && cross == 1000,
          fmt::format("{} matrices with delta < 1: interval containment {}, cross bound {}", checked, interval,
                      cross)};
}

Verdict thresholds() {
  const bool exact = gamma_threshold_omp(0.0) == 1.0 && gamma_threshold_dp(0.0, 1.0) == 2.0;
  int errors = 0;
  for (double d : {0.5, 0.75, 1.0}) {
    try {
      gamma_threshold_omp(d);
    } catch (const Error& e) {
      errors += e.code() == ErrorCode::threshold_undefined;
    }
    try {
      gamma_threshold_dp(d, 1.0);
    } catch (const Error& e) {
      errors += e.code() == ErrorCode::threshold_undefined;
    }
  }
  return {exact && errors == 6, fmt::format("closed forms exact: {}; undefined-threshold errors {}/6",
                                            exact ? "yes" : "no", errors)};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out_dir = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  std::vector<std::pair<int, std::function<Verdict()>>> quick = {
      {2, htp_baseline}, {3, alternative_solutions}, {4, rank_condition_equivalence}, {5, phi_bound},
      {6, interlacing},  {7, propositions},          {8, thresholds},
  };

  bool all = true;
  auto report = [&](int id, const Verdict& v) {
    fmt::print("criterion {}: {} {}\n", id, v.pass ? "PASS" : "FAIL", v.detail);
    std::fflush(stdout);
    all = all && v.pass;
  };
  auto guarded = [](const std::function<Verdict()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Verdict{false, fmt::format("threw: {}", e.what())};
    }
  };

  const RunConfig cfg = criterion1_config();
  std::optional<PhaseGrid> first;
  report(1, guarded([&] {
           first = run_phase_grid(cfg, Execution::parallel);
           emit_outputs(*first, cfg, out_dir);
           return phase_gap(*first);
         }));
  for (const auto& [id, f] : quick) report(id, guarded(f));
  report(9, guarded([&] {
           if (!first) return Verdict{false, "first grid run did not complete"};
           const PhaseGrid second = run_phase_grid(cfg, Execution::serial);
           const bool cells = csv_of(*first, false) == csv_of(second, false);
           const bool contour = csv_of(*first, true) == csv_of(second, true);
           return Verdict{cells && contour,
                          fmt::format("second run (serial path): cells CSV {}, contour CSV {}",
                                      cells ? "identical" : "differs", contour ? "identical" : "differs")};
         }));
  fmt::print("acceptance: {}\n", all ? "all criteria pass" : "some criteria FAIL");
  return all ? 0 : 1;
}
