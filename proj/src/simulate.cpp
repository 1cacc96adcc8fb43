#include <cmath>
#include <ostream>

#include "chainbalance/error.hpp"
#include "chainbalance/simulate.hpp"

namespace chainbalance {

void ExploitationQuery::validate() const {
  if (minority == 0) throw Error(ErrorKind::kInvalidArgument, "minority count must be positive");
  if (majority < minority) throw Error(ErrorKind::kInvalidArgument, "majority must be >= minority");
  if (chains == 0) throw Error(ErrorKind::kInvalidArgument, "chain count must be positive");
  if (runs == 0) throw Error(ErrorKind::kInvalidArgument, "run count must be positive");
}

double exploitation_probability(const ExploitationQuery& query) {
  query.validate();
  const double keep = static_cast<double>(query.minority) / static_cast<double>(query.majority);
  return 1.0 - std::pow(1.0 - keep, static_cast<double>(query.chains));
}

namespace {

// One undersampling: a partial Fisher-Yates shuffle choosing `draws` of
// `population` slots. Only the designated element (initially slot 0) is
// tracked, which is exact and needs no array.
bool designated_drawn(std::size_t draws, std::size_t population, RngStream& rng) {
  std::size_t at = 0;
  for (std::size_t k = 0; k < draws; ++k) {
    const std::size_t j = k + rng.uniform_index(population - k);
    if (j == at) return true;
    if (k == at) at = j;
  }
  return false;
}

bool run_succeeds(const ExploitationQuery& query, const RngStream& rng, std::size_t run) {
  RngStream stream = rng.derive({run});
  for (std::size_t c = 0; c < query.chains; ++c) {
    if (designated_drawn(query.minority, query.majority, stream)) return true;
  }
  return false;
}

}  // namespace

double exploitation_probability_mc(const ExploitationQuery& query, const RngStream& rng,
                                   Execution exec) {
  query.validate();
  const auto runs = static_cast<std::ptrdiff_t>(query.runs);
  std::size_t successes = 0;
#pragma omp parallel for schedule(static) reduction(+ : successes) if (exec == Execution::kParallel)
  for (std::ptrdiff_t r = 0; r < runs; ++r) {
    successes += run_succeeds(query, rng, static_cast<std::size_t>(r)) ? 1 : 0;
  }
  return static_cast<double>(successes) / static_cast<double>(query.runs);
}

std::vector<SweepRow> sweep(const SweepConfig& config, const RngStream& rng, Execution exec) {
  if (config.m_step == 0 || config.m_start == 0 || config.m_start > config.m_end ||
      2 * config.m_end > config.total) {
    throw Error(ErrorKind::kInvalidArgument, "sweep range must lie within (0, n/2]");
  }
  std::vector<SweepRow> rows;
  for (std::size_t m = config.m_start; m <= config.m_end; m += config.m_step) {
    const ExploitationQuery query{m, config.total - m, config.chains, config.runs};
    SweepRow row;
    row.minority = m;
    row.majority = query.majority;
    row.imr = static_cast<double>(query.majority) / static_cast<double>(m);
    row.closed_form = exploitation_probability(query);
    row.monte_carlo = exploitation_probability_mc(query, rng.derive({m}), exec);
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "minority,majority,imr,p_closed,p_mc\n";
  const auto old_precision = out.precision(10);
  for (const auto& r : rows) {
    out << r.minority << ',' << r.majority << ',' << r.imr << ',' << r.closed_form << ','
        << r.monte_carlo << '\n';
  }
  out.precision(old_precision);
}

}  // namespace chainbalance
