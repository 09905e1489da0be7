// SPDX-License-Identifier: Apache-2.0
//
// Minimal usage example: assemble the coupled pencil at one (omega, beta)
// point on a deliberately coarse grid, solve it over the physical window, and
// print the classified mode inventory. Run time is a few seconds.
#include <cstdio>

#include "zakspec/classify.hpp"

int main() {
  const auto grid = zakspec::build_grid(30.0, 241);
  const double omega = 0.01;
  const double beta = 0.5;

  zakspec::Thresholds th;
  zakspec::SweepOptions opts;
  opts.solve.seed = 20260823ULL;

  const auto profiles = zakspec::soliton_profiles(grid);
  const auto point = zakspec::sweep_point(grid, profiles, omega, beta, th, opts);

  std::printf("mode inventory at omega = %g, beta = %g  (L = %g, n = %zu)\n", omega, beta,
              grid.half_width, grid.size());
  std::printf("%14s %12s %12s %22s\n", "lambda", "residual", "localization", "class");
  for (const auto& m : point.modes)
    std::printf("%14.6f %12.2e %12.4f %22s\n", m.lambda.real(), m.residual, m.localization,
                zakspec::to_string(m.tag));
  std::printf("kernel count: %d   internal candidates: %d   red flags: %zu\n", point.kernel_count,
              point.internal_candidates, point.red_flags.size());
  return 0;
}
