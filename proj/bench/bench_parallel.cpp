// Serial reference vs OpenMP kernels: wall time and agreement.
//
//   bench_parallel [repeats]

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <omp.h>

#include <fmt/format.h>

#include "htpkit/analysis.hpp"
#include "htpkit/harness.hpp"
#include "htpkit/uniqueness.hpp"

using namespace htpkit;

namespace {

template <typename F>
double best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool same) {
  std::cout << fmt::format("{:<28} serial {:9.4f} s   parallel {:9.4f} s   speedup {:5.2f}x   {}\n", name, serial,
                           parallel, serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  std::cout << fmt::format("threads {}\n", omp_get_max_threads());
  const RngSpec root(2024);

  {
    const DenseMatrix a = generate_gaussian_matrix(10, 16, root.child("ric"), true);
    RicEstimate s, p;
    const double ts = best_of(repeats, [&] { s = exact_ric(a, 5, EnumerationBudget::for_ric(), Execution::serial); });
    const double tp = best_of(repeats, [&] { p = exact_ric(a, 5, EnumerationBudget::for_ric(), Execution::parallel); });
    report("exact_ric N=16 k=5", ts, tp, s.delta == p.delta && s.worst_support == p.worst_support);
  }

  {
    const DenseMatrix a = generate_gaussian_matrix(12, 20, root.child("oracle.matrix"), true);
    const Vector b = apply(a, generate_sparse_signal(20, 6, root.child("oracle.signal")));
    SolutionSet s, p;
    const double ts = best_of(repeats, [&] { s = solve_l0_exhaustive(a, b, 6, kExactFitTolerance, {}, Execution::serial); });
    const double tp = best_of(repeats, [&] { p = solve_l0_exhaustive(a, b, 6, kExactFitTolerance, {}, Execution::parallel); });
    report("l0 oracle N=20 s=6", ts, tp, s.solutions == p.solutions);
  }

  {
    RunConfig cfg;
    cfg.signal_length = 100;
    cfg.delta_values = {0.3, 0.5, 0.7};
    cfg.rho_values = {0.2, 0.4, 0.6};
    cfg.trials_per_cell = 10;
    cfg.algorithms = {Algorithm::htp, Algorithm::dp_htp, Algorithm::omp, Algorithm::sp};
    cfg.base_seed = 7;
    std::string s, p;
    const double ts = best_of(repeats, [&] {
      std::ostringstream out;
      write_cells_csv(out, run_phase_grid(cfg, Execution::serial));
      s = out.str();
    });
    const double tp = best_of(repeats, [&] {
      std::ostringstream out;
      write_cells_csv(out, run_phase_grid(cfg, Execution::parallel));
      p = out.str();
    });
    report("phase grid 3x3x10, N=100", ts, tp, s == p);
  }
  return 0;
}
