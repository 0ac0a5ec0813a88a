#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "htlab/errors.hpp"
#include "htlab/estimators.hpp"
#include "htlab/numeric.hpp"

namespace htlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CountMoments {
  double mean1 = 0.0, mean0 = 0.0;
  double var1 = 0.0, var0 = 0.0, cov = 0.0;
};

CountMoments count_moments(const Design& d, const InterferenceGraph& g, ExposureModel m,
                           const Estimand& est) {
  const int n = d.num_units();
  long long min1 = std::numeric_limits<long long>::max();
  long long min0 = std::numeric_limits<long long>::max();
  long long max1 = std::numeric_limits<long long>::min();
  long long max0 = std::numeric_limits<long long>::min();
  double m1 = 0.0, m0 = 0.0;
  const auto counts = [&](const Assignment& z, long long& c1, long long& c0) {
    c1 = 0;
    c0 = 0;
    for (int i = 0; i < n; ++i) {
      const TreatmentExposure tau{z[i] ? 1 : 0, exposure_level(m, g, z, i)};
      if (tau == est.tau1) ++c1;
      if (tau == est.tau0) ++c0;
    }
  };
  d.for_each_support([&](const Assignment& z, double prob) {
    long long c1, c0;
    counts(z, c1, c0);
    min1 = std::min(min1, c1);
    max1 = std::max(max1, c1);
    min0 = std::min(min0, c0);
    max0 = std::max(max0, c0);
    m1 += prob * static_cast<double>(c1);
    m0 += prob * static_cast<double>(c0);
  });
  CountMoments out;
  // Degenerate counts get the exact integer mean so central moments vanish
  // exactly rather than to rounding error.
  out.mean1 = (min1 == max1) ? static_cast<double>(min1) : m1;
  out.mean0 = (min0 == max0) ? static_cast<double>(min0) : m0;
  d.for_each_support([&](const Assignment& z, double prob) {
    long long c1, c0;
    counts(z, c1, c0);
    const double d1 = static_cast<double>(c1) - out.mean1;
    const double d0 = static_cast<double>(c0) - out.mean0;
    out.var1 += prob * d1 * d1;
    out.var0 += prob * d0 * d0;
    out.cov += prob * d1 * d0;
  });
  return out;
}

// Linearized view of the on-support H-T estimator: theta_hat(z) = s_z . T and
// theta = b . T over the identified table coordinates.
struct QuotientProblem {
  struct Coord {
    int unit;
    TreatmentExposure tau;
  };
  std::vector<Coord> coords;
  std::vector<double> probs;
  std::vector<std::vector<std::pair<int, double>>> rows;  // per support point
  std::vector<double> b;

  double objective(const std::vector<double>& t) const {
    double mean = 0.0;
    std::vector<double> values(rows.size());
    for (std::size_t s = 0; s < rows.size(); ++s) {
      double v = 0.0;
      for (const auto& [c, coeff] : rows[s]) v += coeff * t[c];
      values[s] = v;
      mean += probs[s] * v;
    }
    double var = 0.0;
    for (std::size_t s = 0; s < rows.size(); ++s) {
      const double dev = values[s] - mean;
      var += probs[s] * dev * dev;
    }
    double theta = 0.0;
    for (std::size_t c = 0; c < b.size(); ++c) theta += b[c] * t[c];
    const double denom = var + theta * theta;
    if (denom <= 1e-300) return kInf;
    return 2.0 * var / denom;
  }
};

QuotientProblem build_problem(const Design& d, const InterferenceGraph& g,
                              ExposureModel m, const Estimand& est,
                              const PropensityTable& exact) {
  QuotientProblem prob;
  const int n = d.num_units();
  std::vector<std::vector<int>> coord_of(n);
  for (int i = 0; i < n; ++i) {
    coord_of[i].assign(2 * exact.levels[i], -1);
    for (int z = 0; z <= 1; ++z) {
      for (int e = 0; e < exact.levels[i]; ++e) {
        if (exact.pi[i][z * exact.levels[i] + e] > 0.0) {
          coord_of[i][z * exact.levels[i] + e] = static_cast<int>(prob.coords.size());
          prob.coords.push_back({i, {z, e}});
        }
      }
    }
  }
  prob.b.assign(prob.coords.size(), 0.0);
  for (std::size_t c = 0; c < prob.coords.size(); ++c) {
    if (prob.coords[c].tau == est.tau1) prob.b[c] = 1.0 / n;
    if (prob.coords[c].tau == est.tau0) prob.b[c] = -1.0 / n;
  }
  d.for_each_support([&](const Assignment& z, double p) {
    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < n; ++i) {
      const TreatmentExposure tau{z[i] ? 1 : 0, exposure_level(m, g, z, i)};
      const double pi = exact.value(i, tau);
      if (tau == est.tau1) {
        row.emplace_back(coord_of[i][tau.z * exact.levels[i] + tau.e], 1.0 / (n * pi));
      } else if (tau == est.tau0) {
        row.emplace_back(coord_of[i][tau.z * exact.levels[i] + tau.e], -1.0 / (n * pi));
      }
    }
    prob.rows.push_back(std::move(row));
    prob.probs.push_back(p);
  });
  return prob;
}

void normalize(std::vector<double>& t) {
  double nrm = 0.0;
  for (double v : t) nrm += v * v;
  nrm = std::sqrt(nrm);
  if (nrm > 0.0) {
    for (double& v : t) v /= nrm;
  }
}

std::vector<double> random_sphere_point(std::size_t dim, Prng& rng) {
  std::vector<double> t(dim);
  for (double& v : t) v = rng.normal();
  normalize(t);
  return t;
}

struct DescentOutcome {
  double value = kInf;
  std::vector<double> point;
  int iterations = 0;
};

DescentOutcome projected_gradient_descent(const QuotientProblem& prob,
                                          std::vector<double> t, int max_iterations,
                                          double tolerance) {
  DescentOutcome out;
  double f = prob.objective(t);
  if (!std::isfinite(f)) {
    out.value = f;
    out.point = std::move(t);
    return out;
  }
  const std::size_t dim = t.size();
  std::vector<double> grad(dim);
  const double h = 1e-6;
  int stall = 0;
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    // Finite-difference gradient; the objective is scale-invariant, so the
    // off-sphere perturbations are harmless.
    for (std::size_t c = 0; c < dim; ++c) {
      const double saved = t[c];
      t[c] = saved + h;
      const double fp = prob.objective(t);
      t[c] = saved - h;
      const double fm = prob.objective(t);
      t[c] = saved;
      grad[c] = (std::isfinite(fp) && std::isfinite(fm)) ? (fp - fm) / (2.0 * h) : 0.0;
    }
    double gt_dot_t = 0.0;
    for (std::size_t c = 0; c < dim; ++c) gt_dot_t += grad[c] * t[c];
    double gnorm2 = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      grad[c] -= gt_dot_t * t[c];
      gnorm2 += grad[c] * grad[c];
    }
    if (gnorm2 <= tolerance * tolerance * std::max(1.0, f * f)) break;

    double eta = 0.25;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      std::vector<double> trial(dim);
      for (std::size_t c = 0; c < dim; ++c) trial[c] = t[c] - eta * grad[c];
      normalize(trial);
      const double ft = prob.objective(trial);
      if (std::isfinite(ft) && ft < f - 1e-4 * eta * gnorm2) {
        const double improvement = f - ft;
        t = std::move(trial);
        f = ft;
        accepted = true;
        stall = improvement <= tolerance * std::max(1.0, std::abs(f)) ? stall + 1 : 0;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted || stall >= 3) break;
  }
  out.value = f;
  out.point = std::move(t);
  out.iterations = iter;
  return out;
}

}  // namespace

ShrinkageResult shrinkage_k(const Design& d, const InterferenceGraph& g,
                            ExposureModel m, const Estimand& est,
                            const ShrinkageSearch& search) {
  ShrinkageResult result;
  const int n = d.num_units();

  // A zero-variance table with nonzero effect exists exactly when the
  // covariance matrix of (N_tau1, N_tau0) is singular along a direction whose
  // induced effect is nonzero; then no shrinkage factor can dominate.
  const CountMoments cm = count_moments(d, g, m, est);
  const double scale = std::max({cm.var1, cm.var0, std::abs(cm.cov), 1e-30});
  std::vector<std::pair<double, double>> null_dirs;
  if (cm.var1 + cm.var0 <= 1e-12 * std::max(1.0, scale)) {
    null_dirs = {{1.0, 0.0}, {0.0, 1.0}};
  } else {
    if (cm.var1 <= 1e-12 * scale) null_dirs.push_back({1.0, 0.0});
    if (cm.var0 <= 1e-12 * scale) null_dirs.push_back({0.0, 1.0});
    const double det = cm.var1 * cm.var0 - cm.cov * cm.cov;
    if (null_dirs.empty() && det <= 1e-12 * scale * scale) {
      // Var(c1 N1 - c2 N0) vanishes along (c1, c2) = (cov, var1).
      null_dirs.push_back({cm.cov, cm.var1});
    }
  }
  for (auto [c1, c2] : null_dirs) {
    const double nrm = std::sqrt(c1 * c1 + c2 * c2);
    c1 /= nrm;
    c2 /= nrm;
    const double theta = (c1 * cm.mean1 - c2 * cm.mean0) / n;
    if (std::abs(theta) > 1e-9 * std::max(1.0, (cm.mean1 + cm.mean0) / n)) {
      result.hypothesis_fails = true;
      result.witness_note =
          "zero-variance table Y(tau1) = " + format_double(c1) +
          "*pi(tau1), Y(tau0) = " + format_double(c2) +
          "*pi(tau0) has theta = " + format_double(theta) +
          "; Var(N_tau1) = " + format_double(cm.var1) +
          ", Var(N_tau0) = " + format_double(cm.var0) +
          ", Cov = " + format_double(cm.cov);
      return result;
    }
  }

  const PropensityTable exact = propensity_table_exact(d, g, m);
  const QuotientProblem prob = build_problem(d, g, m, est, exact);
  const std::size_t dim = prob.coords.size();
  if (dim == 0) throw ValidationError("shrinkage_k: design has no identified coordinates");

  // Coarse pre-pass: axis tables, propensity-profile tables, random sphere points.
  std::vector<std::vector<double>> candidates;
  for (std::size_t c = 0; c < dim; ++c) {
    std::vector<double> t(dim, 0.0);
    t[c] = 1.0;
    candidates.push_back(std::move(t));
  }
  for (auto [c1, c2] : std::initializer_list<std::pair<double, double>>{
           {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {1.0, -1.0}}) {
    std::vector<double> t(dim, 0.0);
    for (std::size_t c = 0; c < dim; ++c) {
      const auto& coord = prob.coords[c];
      const double pi = exact.value(coord.unit, coord.tau);
      if (coord.tau == est.tau1) t[c] = c1 * pi;
      if (coord.tau == est.tau0) t[c] = c2 * pi;
    }
    normalize(t);
    candidates.push_back(std::move(t));
  }
  Prng prepass_rng(derive_seed(search.seed, 7));
  for (int i = 0; i < search.prepass; ++i) {
    candidates.push_back(random_sphere_point(dim, prepass_rng));
  }
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double f = prob.objective(candidates[i]);
    if (std::isfinite(f)) ranked.emplace_back(f, i);
  }
  std::sort(ranked.begin(), ranked.end());

  const int restarts = std::max(1, search.restarts);
  std::vector<std::vector<double>> starts;
  for (int r = 0; r < restarts; ++r) {
    if (static_cast<std::size_t>(r) < ranked.size()) {
      starts.push_back(candidates[ranked[r].second]);
    } else {
      starts.push_back(random_sphere_point(dim, prepass_rng));
    }
  }

  std::vector<DescentOutcome> outcomes(starts.size());
  const int workers = std::max(1, search.workers);
  if (workers == 1) {
    for (std::size_t r = 0; r < starts.size(); ++r) {
      outcomes[r] = projected_gradient_descent(prob, starts[r], search.iterations,
                                               search.tolerance);
    }
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    const std::size_t per = (starts.size() + workers - 1) / workers;
    for (int w = 0; w < workers && next < starts.size(); ++w) {
      const std::size_t lo = next;
      const std::size_t hi = std::min(starts.size(), lo + per);
      next = hi;
      pool.emplace_back([&, lo, hi]() {
        for (std::size_t r = lo; r < hi; ++r) {
          outcomes[r] = projected_gradient_descent(prob, starts[r], search.iterations,
                                                   search.tolerance);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  double best = kInf, worst_finite = -kInf;
  std::size_t best_idx = 0;
  int agreeing = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    result.iterations_used = std::max(result.iterations_used, outcomes[r].iterations);
    if (!std::isfinite(outcomes[r].value)) continue;
    worst_finite = std::max(worst_finite, outcomes[r].value);
    if (outcomes[r].value < best) {
      best = outcomes[r].value;
      best_idx = r;
    }
  }
  if (!std::isfinite(best)) {
    throw ValidationError("shrinkage_k: search found no finite objective value");
  }
  for (const auto& o : outcomes) {
    if (std::isfinite(o.value) &&
        o.value - best <= search.tolerance * std::max(1.0, std::abs(best)) * 100.0) {
      ++agreeing;
    }
  }
  result.restarts_run = static_cast<int>(outcomes.size());
  result.k0 = best;
  result.objective = best;
  result.k = std::min(best, 1.0);
  result.certified = agreeing == result.restarts_run;
  result.minimizer = outcomes[best_idx].point;
  return result;
}

}  // namespace htlab
