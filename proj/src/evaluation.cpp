#include "htlab/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "htlab/errors.hpp"
#include "htlab/numeric.hpp"
#include "htlab/prng.hpp"

namespace htlab {

MomentReport exact_moments(const Estimator& estimator, const Design& d,
                           const InterferenceGraph& g, ExposureModel m,
                           const PotentialOutcomeTable& table, const Estimand& est) {
  MomentReport rep;
  rep.mode = "exact";
  rep.theta = true_effect(table, est);

  double mean = 0.0;
  d.for_each_support([&](const Assignment& z, double prob) {
    mean += prob * estimator.evaluate(realize(table, m, g, z));
  });
  double var = 0.0, mse = 0.0;
  d.for_each_support([&](const Assignment& z, double prob) {
    const double v = estimator.evaluate(realize(table, m, g, z));
    var += prob * (v - mean) * (v - mean);
    mse += prob * (v - rep.theta) * (v - rep.theta);
  });
  rep.expectation = mean;
  rep.bias = mean - rep.theta;
  rep.variance = var;
  rep.mse = mse;
  rep.identity_gap = std::abs(mse - (var + rep.bias * rep.bias));
  return rep;
}

MomentReport mc_moments(const Estimator& estimator, const Design& d,
                        const InterferenceGraph& g, ExposureModel m,
                        const PotentialOutcomeTable& table, const Estimand& est,
                        long long reps, std::uint64_t seed, int workers) {
  if (reps < 2) throw ValidationError("mc_moments: reps must be >= 2");
  MomentReport rep;
  rep.mode = "mc";
  rep.reps = reps;
  rep.theta = true_effect(table, est);

  workers = std::max(1, workers);
  struct Partial {
    double sum = 0.0, sum_sq = 0.0, sum_err_sq = 0.0, sum_err_4 = 0.0;
  };
  std::vector<Partial> partials(workers);
  std::vector<long long> chunk(workers, reps / workers);
  for (long long r = 0; r < reps % workers; ++r) ++chunk[r];

  const auto run_chunk = [&](int w) {
    Prng rng(derive_seed(seed, static_cast<std::uint64_t>(w)));
    Partial acc;
    for (long long r = 0; r < chunk[w]; ++r) {
      const double v = estimator.evaluate(realize(table, m, g, d.sample(rng)));
      const double err_sq = (v - rep.theta) * (v - rep.theta);
      acc.sum += v;
      acc.sum_sq += v * v;
      acc.sum_err_sq += err_sq;
      acc.sum_err_4 += err_sq * err_sq;
    }
    partials[w] = acc;
  };
  if (workers == 1) {
    run_chunk(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run_chunk, w);
    for (auto& th : pool) th.join();
  }
  // Fixed reduce order keeps the result a function of (seed, workers).
  double sum = 0.0, sum_sq = 0.0, sum_err_sq = 0.0, sum_err_4 = 0.0;
  for (const Partial& p : partials) {
    sum += p.sum;
    sum_sq += p.sum_sq;
    sum_err_sq += p.sum_err_sq;
    sum_err_4 += p.sum_err_4;
  }
  const double r = static_cast<double>(reps);
  rep.expectation = sum / r;
  rep.variance = std::max(0.0, (sum_sq - sum * sum / r) / (r - 1.0));
  rep.mse = sum_err_sq / r;
  rep.bias = rep.expectation - rep.theta;
  rep.se_expectation = std::sqrt(rep.variance / r);
  rep.se_variance = rep.variance * std::sqrt(2.0 / std::max(1.0, r - 1.0));
  const double var_of_err_sq =
      std::max(0.0, (sum_err_4 - sum_err_sq * sum_err_sq / r) / std::max(1.0, r - 1.0));
  rep.se_mse = std::sqrt(var_of_err_sq / r);
  rep.identity_gap = std::abs(rep.mse - (rep.variance + rep.bias * rep.bias));
  return rep;
}

PotentialOutcomeTable TableSpace::to_table(const InterferenceGraph& g, ExposureModel m,
                                           const std::vector<double>& coeffs) const {
  if (coeffs.size() != coords.size()) {
    throw ValidationError("table space: coefficient count mismatch");
  }
  PotentialOutcomeTable table(g, m);
  for (std::size_t c = 0; c < coords.size(); ++c) {
    table.set(coords[c].unit, coords[c].tau.z, coords[c].tau.e, coeffs[c]);
  }
  return table;
}

TableSpace model_table_space(const InterferenceGraph& g, ExposureModel m) {
  TableSpace space;
  for (int i = 0; i < g.num_units(); ++i) {
    for (int z = 0; z <= 1; ++z) {
      for (int e = 0; e < num_levels(m, g, i); ++e) {
        space.coords.push_back({i, {z, e}});
      }
    }
  }
  return space;
}

TableSpace identified_table_space(const InterferenceGraph& g, ExposureModel m,
                                  const PropensityTable& exact) {
  TableSpace space;
  for (int i = 0; i < g.num_units(); ++i) {
    for (int z = 0; z <= 1; ++z) {
      for (int e = 0; e < num_levels(m, g, i); ++e) {
        if (exact.pi[i][z * exact.levels[i] + e] > 0.0) {
          space.coords.push_back({i, {z, e}});
        }
      }
    }
  }
  return space;
}

std::vector<NamedTable> sphere_tables(const TableSpace& space,
                                      const InterferenceGraph& g, ExposureModel m,
                                      int count, std::uint64_t seed) {
  std::vector<NamedTable> out;
  out.reserve(count);
  Prng rng(derive_seed(seed, 11));
  const std::size_t dim = space.coords.size();
  for (int t = 0; t < count; ++t) {
    std::vector<double> v(dim);
    double nrm = 0.0;
    do {
      nrm = 0.0;
      for (double& x : v) {
        x = rng.normal();
        nrm += x * x;
      }
    } while (nrm <= 1e-12);
    nrm = std::sqrt(nrm);
    for (double& x : v) x /= nrm;
    out.emplace_back("sphere-" + std::to_string(t), space.to_table(g, m, v));
  }
  return out;
}

std::vector<NamedTable> axis_tables(const TableSpace& space, const InterferenceGraph& g,
                                    ExposureModel m) {
  std::vector<NamedTable> out;
  out.reserve(space.coords.size());
  for (std::size_t c = 0; c < space.coords.size(); ++c) {
    std::vector<double> v(space.coords.size(), 0.0);
    v[c] = 1.0;
    const auto& coord = space.coords[c];
    out.emplace_back("axis-u" + std::to_string(coord.unit) + "-z" +
                         std::to_string(coord.tau.z) + "-e" +
                         std::to_string(coord.tau.e),
                     space.to_table(g, m, v));
  }
  return out;
}

DominanceVerdict dominance_check(const Estimator& a, const Estimator& b,
                                 const Design& d, const InterferenceGraph& g,
                                 ExposureModel m, const Estimand& est,
                                 const std::vector<NamedTable>& tables, double rel_tol,
                                 double strict_margin, int workers) {
  if (tables.size() < 2) {
    throw ValidationError("dominance_check: need at least two tables");
  }
  DominanceVerdict verdict;
  verdict.estimator_a = a.name();
  verdict.estimator_b = b.name();
  verdict.rel_tol = rel_tol;
  verdict.strict_margin = strict_margin;
  verdict.rows.resize(tables.size());

  workers = std::max(1, workers);
  const auto run_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      const auto& [id, table] = tables[t];
      verdict.rows[t].table_id = id;
      verdict.rows[t].mse_a = exact_moments(a, d, g, m, table, est).mse;
      verdict.rows[t].mse_b = exact_moments(b, d, g, m, table, est).mse;
    }
  };
  if (workers == 1) {
    run_range(0, tables.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t per = (tables.size() + workers - 1) / workers;
    for (std::size_t lo = 0; lo < tables.size(); lo += per) {
      pool.emplace_back(run_range, lo, std::min(tables.size(), lo + per));
    }
    for (auto& th : pool) th.join();
  }

  bool a_leq = true, b_leq = true, a_strict = false, b_strict = false;
  std::string a_witness, b_witness;
  for (const DominanceRow& row : verdict.rows) {
    const double scale = std::max({std::abs(row.mse_a), std::abs(row.mse_b), 1e-300});
    if (row.mse_a > row.mse_b + rel_tol * scale) a_leq = false;
    if (row.mse_b > row.mse_a + rel_tol * scale) b_leq = false;
    if (row.mse_a < row.mse_b - strict_margin * scale && !a_strict) {
      a_strict = true;
      a_witness = row.table_id;
    }
    if (row.mse_b < row.mse_a - strict_margin * scale && !b_strict) {
      b_strict = true;
      b_witness = row.table_id;
    }
  }
  if (a_leq && b_leq) {
    verdict.verdict = "tied";
  } else if (a_leq && a_strict) {
    verdict.verdict = "A-dominates";
    verdict.witness_id = a_witness;
  } else if (b_leq && b_strict) {
    verdict.verdict = "B-dominates";
    verdict.witness_id = b_witness;
  } else {
    verdict.verdict = "incomparable";
  }
  return verdict;
}

}  // namespace htlab
