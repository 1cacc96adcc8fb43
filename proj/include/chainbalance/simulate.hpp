#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "chainbalance/parallel.hpp"
#include "chainbalance/rng.hpp"

namespace chainbalance {

// Probability that one particular majority example is kept by at least one
// of `chains` independent undersamplings of a label with `minority` minority
// and `majority` majority examples.
struct ExploitationQuery {
  std::size_t minority = 0;
  std::size_t majority = 0;
  std::size_t chains = 10;
  std::size_t runs = 10000;

  void validate() const;
};

// 1 - (1 - m/M)^c
double exploitation_probability(const ExploitationQuery& query);

// Fraction of runs in which a designated majority index lands in at least one
// of c draws of m indices without replacement from M. Run r uses substream
// rng.derive({r}), so the estimate does not depend on the thread count.
double exploitation_probability_mc(const ExploitationQuery& query, const RngStream& rng,
                                   Execution exec = Execution::kParallel);

struct SweepRow {
  std::size_t minority = 0;
  std::size_t majority = 0;
  double imr = 0.0;
  double closed_form = 0.0;
  double monte_carlo = 0.0;
};

struct SweepConfig {
  std::size_t total = 1000;  // n; majority = n - m
  std::size_t chains = 10;
  std::size_t m_start = 20;
  std::size_t m_end = 400;
  std::size_t m_step = 20;
  std::size_t runs = 10000;
};

std::vector<SweepRow> sweep(const SweepConfig& config, const RngStream& rng,
                            Execution exec = Execution::kParallel);
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace chainbalance
