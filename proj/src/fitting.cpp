// Copyright 2026 The opokit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "opo/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace opo {

namespace {

constexpr ModelParameter kAllParameters[] = {
    ModelParameter::xi,         ModelParameter::threshold_power,   ModelParameter::f_hwhm,
    ModelParameter::efficiency, ModelParameter::escape_efficiency, ModelParameter::internal_loss,
    ModelParameter::phase_jitter};

// Physical parameters the closed-form model consumes.
struct ModelPoint {
  double xi = 0.0;
  double f_hwhm = 0.0;
  double eta_rho = 0.0;
  double theta = 0.0;
};

class ModelMap {
 public:
  explicit ModelMap(const FitProblem& problem) : problem_(problem) {
    for (const auto& [p, spec] : problem.parameters) {
      if (spec.free) free_.push_back(p);
    }
  }

  const std::vector<ModelParameter>& free() const { return free_; }

  Eigen::VectorXd initial() const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(free_.size()));
    for (std::size_t j = 0; j < free_.size(); ++j)
      x(static_cast<Eigen::Index>(j)) = problem_.parameters.at(free_[j]).value;
    return x;
  }
  Eigen::VectorXd lower() const { return bound(true); }
  Eigen::VectorXd upper() const { return bound(false); }

  double value(ModelParameter p, const Eigen::VectorXd& x) const {
    for (std::size_t j = 0; j < free_.size(); ++j)
      if (free_[j] == p) return x(static_cast<Eigen::Index>(j));
    return problem_.parameters.at(p).value;
  }

  ModelPoint resolve(const Eigen::VectorXd& x) const {
    ModelPoint m;
    const auto& params = problem_.parameters;
    if (params.contains(ModelParameter::xi)) {
      m.xi = value(ModelParameter::xi, x);
    } else {
      m.xi = std::sqrt(problem_.pump_power / value(ModelParameter::threshold_power, x));
    }
    double rho;
    if (params.contains(ModelParameter::escape_efficiency)) {
      rho = value(ModelParameter::escape_efficiency, x);
    } else {
      const double t = problem_.transmissivity;
      rho = t / (t + value(ModelParameter::internal_loss, x));
    }
    m.f_hwhm = value(ModelParameter::f_hwhm, x);
    m.eta_rho = value(ModelParameter::efficiency, x) * rho;
    m.theta = value(ModelParameter::phase_jitter, x);
    return m;
  }

 private:
  Eigen::VectorXd bound(bool lower) const {
    Eigen::VectorXd b(static_cast<Eigen::Index>(free_.size()));
    for (std::size_t j = 0; j < free_.size(); ++j) {
      const auto& spec = problem_.parameters.at(free_[j]);
      b(static_cast<Eigen::Index>(j)) = lower ? spec.lower : spec.upper;
    }
    return b;
  }

  const FitProblem& problem_;
  std::vector<ModelParameter> free_;
};

VariancePair<double> model_at(const ModelPoint& m, double f) {
  return apply_phase_noise(raw_variances(m.xi, m.eta_rho, f / m.f_hwhm), m.theta);
}

struct LmRun {
  Eigen::VectorXd x;
  Eigen::VectorXd residual;
  double cost = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

// Levenberg-Marquardt with box constraints by projection. Every accepted step
// strictly lowers the sum of squares.
template <typename ResidualFn>
class DampedLeastSquares {
 public:
  DampedLeastSquares(ResidualFn residual, Eigen::VectorXd lower, Eigen::VectorXd upper,
                     double jacobian_step)
      : residual_(std::move(residual)),
        lower_(std::move(lower)),
        upper_(std::move(upper)),
        step_(jacobian_step) {}

  LmRun start(const Eigen::VectorXd& x0) const {
    LmRun run;
    run.x = clamp(x0);
    run.residual = residual_(run.x);
    run.cost = run.residual.squaredNorm();
    run.history.push_back(run.cost);
    return run;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& r0) const {
    Eigen::MatrixXd jac(r0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double range = upper_(j) - lower_(j);
      double h = step_ * std::max(std::abs(x(j)), 1e-3 * range);
      if (h == 0.0) h = step_;
      if (x(j) + h > upper_(j)) h = -h;
      Eigen::VectorXd xp = x;
      xp(j) += h;
      jac.col(j) = (residual_(xp) - r0) / h;
    }
    return jac;
  }

  void iterate(LmRun& run, int max_iterations) const {
    const auto k = run.x.size();
    if (k == 0 || run.converged) {
      run.converged = true;
      return;
    }
    for (int it = 0; it < max_iterations; ++it) {
      ++run.iterations;
      if (run.cost <= 1e-28 * static_cast<double>(run.residual.size())) {
        run.converged = true;
        return;
      }
      const Eigen::MatrixXd jac = jacobian(run.x, run.residual);
      const Eigen::MatrixXd normal = jac.transpose() * jac;
      const Eigen::VectorXd gradient = jac.transpose() * run.residual;
      const double diag_max = normal.diagonal().maxCoeff();
      if (!(diag_max > 0.0)) {
        run.converged = true;
        return;
      }
      bool accepted = false;
      while (!accepted) {
        Eigen::MatrixXd damped = normal;
        for (Eigen::Index j = 0; j < k; ++j)
          damped(j, j) += lambda_ * std::max(normal(j, j), 1e-12 * diag_max);
        const Eigen::VectorXd delta = damped.ldlt().solve(-gradient);
        const Eigen::VectorXd trial = clamp(run.x + delta);
        const Eigen::VectorXd moved = trial - run.x;
        bool negligible = true;
        for (Eigen::Index j = 0; j < k; ++j) {
          if (std::abs(moved(j)) > 1e-13 * (std::abs(run.x(j)) + 1e-9 * (upper_(j) - lower_(j))))
            negligible = false;
        }
        if (negligible) {
          run.converged = true;
          return;
        }
        const Eigen::VectorXd r = residual_(trial);
        const double cost = r.squaredNorm();
        if (std::isfinite(cost) && cost < run.cost) {
          const double gain = (run.cost - cost) / run.cost;
          run.x = trial;
          run.residual = r;
          run.cost = cost;
          run.history.push_back(cost);
          lambda_ = std::max(lambda_ / 3.0, 1e-15);
          accepted = true;
          if (gain < 1e-14) {
            run.converged = true;
            return;
          }
        } else {
          lambda_ *= 4.0;
          if (lambda_ > 1e16) {
            run.converged = true;
            return;
          }
        }
      }
    }
  }

  void reset_damping() const { lambda_ = 1e-3; }

  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lower_).cwiseMin(upper_);
  }

 private:
  ResidualFn residual_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  double step_;
  mutable double lambda_ = 1e-3;
};

// Start points: the caller's initial guess, then a regular interior grid.
std::vector<Eigen::VectorXd> start_grid(const Eigen::VectorXd& initial, const Eigen::VectorXd& lower,
                                        const Eigen::VectorXd& upper, int points, int max_starts) {
  const auto k = static_cast<int>(initial.size());
  std::vector<Eigen::VectorXd> starts{initial};
  if (k == 0) return starts;
  int g = std::max(points, 1);
  while (g > 1 && std::pow(static_cast<double>(g), k) > max_starts) --g;
  long total = 1;
  for (int j = 0; j < k; ++j) total *= g;
  for (long idx = 0; idx < total; ++idx) {
    Eigen::VectorXd x(k);
    long rest = idx;
    for (int j = 0; j < k; ++j) {
      const long cell = rest % g;
      rest /= g;
      x(j) = lower(j) + (static_cast<double>(cell) + 0.5) / g * (upper(j) - lower(j));
    }
    starts.push_back(x);
  }
  return starts;
}

}  // namespace

std::string_view to_string(ModelParameter p) {
  switch (p) {
    case ModelParameter::xi:
      return "xi";
    case ModelParameter::threshold_power:
      return "threshold_power";
    case ModelParameter::f_hwhm:
      return "f_hwhm";
    case ModelParameter::efficiency:
      return "efficiency";
    case ModelParameter::escape_efficiency:
      return "escape_efficiency";
    case ModelParameter::internal_loss:
      return "internal_loss";
    case ModelParameter::phase_jitter:
      return "phase_jitter";
  }
  return "unknown";
}

std::optional<ModelParameter> parse_model_parameter(std::string_view name) {
  for (ModelParameter p : kAllParameters)
    if (to_string(p) == name) return p;
  return std::nullopt;
}

ParameterSpec default_spec(ModelParameter p, double value, bool free, double pump_power) {
  switch (p) {
    case ModelParameter::xi:
      return {value, 0.0, 0.999, free};
    case ModelParameter::threshold_power:
      return {value, pump_power * 1.0001, std::max(pump_power * 100.0, value * 10.0), free};
    case ModelParameter::f_hwhm:
      return {value, 1e6, 1e9, free};
    case ModelParameter::efficiency:
      return {value, 0.01, 1.0, free};
    case ModelParameter::escape_efficiency:
      return {value, 0.01, 1.0, free};
    case ModelParameter::internal_loss:
      return {value, 0.0, 0.5, free};
    case ModelParameter::phase_jitter:
      return {value, 0.0, 10.0 * M_PI / 180.0, free};
  }
  return {value, value, value, false};
}

void SpectrumData::validate() const {
  const auto n = frequencies.size();
  if (n == 0) throw InvalidArgument("spectrum data is empty");
  if (squeezed_db.size() != n || antisqueezed_db.size() != n || mask.size() != n ||
      (shot_db && shot_db->size() != n))
    throw InvalidArgument("spectrum columns are not aligned");
  if (!(frequencies >= 0.0).all()) throw InvalidArgument("frequencies must be nonnegative");
}

std::size_t SpectrumData::residual_count() const {
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < frequencies.size(); ++i) {
    if (!mask(i)) continue;
    count += std::isfinite(squeezed_db(i)) ? 1 : 0;
    count += std::isfinite(antisqueezed_db(i)) ? 1 : 0;
  }
  return count;
}

Eigen::Array<bool, Eigen::Dynamic, 1> default_mask(const Eigen::ArrayXd& frequencies, double f_min) {
  return frequencies >= f_min;
}

void FitProblem::validate() const {
  auto has = [&](ModelParameter p) { return parameters.contains(p); };
  if (has(ModelParameter::xi) == has(ModelParameter::threshold_power))
    throw InvalidArgument("give exactly one of xi and threshold_power");
  if (has(ModelParameter::escape_efficiency) == has(ModelParameter::internal_loss))
    throw InvalidArgument("give exactly one of escape_efficiency and internal_loss");
  for (ModelParameter p :
       {ModelParameter::f_hwhm, ModelParameter::efficiency, ModelParameter::phase_jitter})
    if (!has(p)) throw InvalidArgument("fit problem is missing " + std::string(to_string(p)));
  if (has(ModelParameter::threshold_power) && !(pump_power > 0.0))
    throw InvalidArgument("threshold_power needs a positive pump power");
  if (has(ModelParameter::internal_loss) && !(transmissivity > 0.0 && transmissivity < 1.0))
    throw InvalidArgument("internal_loss needs a transmissivity in (0, 1)");
  for (const auto& [p, spec] : parameters) {
    if (!(spec.lower <= spec.value && spec.value <= spec.upper))
      throw InvalidArgument(std::string(to_string(p)) + " initial value lies outside its bounds");
  }
  const auto check_range = [&](ModelParameter p, double lo, double hi, bool lo_open, bool hi_open) {
    if (!has(p)) return;
    const auto& s = parameters.at(p);
    const bool ok = (lo_open ? s.lower > lo : s.lower >= lo) && (hi_open ? s.upper < hi : s.upper <= hi);
    if (!ok) throw InvalidArgument(std::string(to_string(p)) + " bounds violate its physical range");
  };
  check_range(ModelParameter::xi, 0.0, 1.0, false, true);
  check_range(ModelParameter::f_hwhm, 0.0, std::numeric_limits<double>::infinity(), true, true);
  check_range(ModelParameter::efficiency, 0.0, 1.0, false, false);
  check_range(ModelParameter::escape_efficiency, 0.0, 1.0, true, false);
  check_range(ModelParameter::internal_loss, 0.0, 1.0, false, true);
  check_range(ModelParameter::phase_jitter, 0.0, M_PI / 2, false, true);
  if (has(ModelParameter::threshold_power) &&
      !(parameters.at(ModelParameter::threshold_power).lower > pump_power))
    throw InvalidArgument("threshold_power lower bound must exceed the pump power");
  if (options.max_iterations < 1 || options.grid_points < 1 || options.max_starts < 1)
    throw InvalidArgument("fit options must be positive");
}

std::size_t FitProblem::free_count() const {
  return static_cast<std::size_t>(std::count_if(parameters.begin(), parameters.end(),
                                                [](const auto& kv) { return kv.second.free; }));
}

FitProblem standard_problem(const OpoParams& opo, const DetectionChain& chain) {
  FitProblem problem;
  problem.pump_power = opo.pump_power;
  problem.transmissivity = opo.transmissivity;
  const double eta = chain.efficiency(0.0) * opo.escape_efficiency();
  problem.parameters = {
      {ModelParameter::xi, default_spec(ModelParameter::xi, opo.normalized_pump(), true)},
      {ModelParameter::f_hwhm, default_spec(ModelParameter::f_hwhm, opo.f_hwhm, true)},
      {ModelParameter::efficiency, default_spec(ModelParameter::efficiency, eta, true)},
      {ModelParameter::escape_efficiency,
       default_spec(ModelParameter::escape_efficiency, 1.0, false)},
      {ModelParameter::phase_jitter,
       default_spec(ModelParameter::phase_jitter, chain.phase_jitter_rms, true)},
  };
  return problem;
}

SpectrumPair model_spectrum(const FitProblem& problem, const Eigen::ArrayXd& frequencies) {
  problem.validate();
  const ModelMap map(problem);
  const ModelPoint m = map.resolve(map.initial());
  const Eigen::Index n = frequencies.size();
  SpectrumPair out;
  out.squeezed = {frequencies, Eigen::ArrayXd(n), SpectrumLabel::squeezed,
                  Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n, true), 0};
  out.antisqueezed = out.squeezed;
  out.antisqueezed.label = SpectrumLabel::antisqueezed;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto v = model_at(m, frequencies(i));
    out.squeezed.values(i) = v.squeezed;
    out.antisqueezed.values(i) = v.antisqueezed;
  }
  return out;
}

FitResult fit_spectrum(const SpectrumData& data, const FitProblem& problem) {
  data.validate();
  problem.validate();
  auto is_free = [&](ModelParameter p) {
    return problem.parameters.contains(p) && problem.parameters.at(p).free;
  };
  if (is_free(ModelParameter::efficiency) &&
      (is_free(ModelParameter::escape_efficiency) || is_free(ModelParameter::internal_loss)))
    throw NumericalError(
        "unidentifiable problem: the model depends on efficiency and escape efficiency only "
        "through their product; free at most one of them");

  const ModelMap map(problem);
  const std::size_t k = map.free().size();
  const std::size_t m = data.residual_count();
  if (m < 2 * k || m == 0)
    throw InvalidArgument("need at least twice as many unmasked residuals as free parameters");

  // Rows that enter the residual, in a fixed order.
  struct Row {
    double f;
    double target;
    bool squeezed;
  };
  std::vector<Row> rows;
  rows.reserve(m);
  const bool linear = problem.options.residual_space == ResidualSpace::linear;
  for (Eigen::Index i = 0; i < data.frequencies.size(); ++i) {
    if (!data.mask(i)) continue;
    if (std::isfinite(data.squeezed_db(i)))
      rows.push_back({data.frequencies(i), data.squeezed_db(i), true});
    if (std::isfinite(data.antisqueezed_db(i)))
      rows.push_back({data.frequencies(i), data.antisqueezed_db(i), false});
  }
  if (linear)
    for (auto& r : rows) r.target = from_db(r.target);

  auto residual = [&](const Eigen::VectorXd& x) {
    const ModelPoint point = map.resolve(x);
    Eigen::VectorXd r(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto v = model_at(point, rows[i].f);
      const double model = rows[i].squeezed ? v.squeezed : v.antisqueezed;
      r(static_cast<Eigen::Index>(i)) = (linear ? model : to_db(model)) - rows[i].target;
    }
    return r;
  };

  DampedLeastSquares solver(residual, map.lower(), map.upper(), problem.options.jacobian_step);
  const auto starts = start_grid(map.initial(), map.lower(), map.upper(),
                                 problem.options.grid_points, problem.options.max_starts);

  // Short runs from every start, then polish the most promising few.
  constexpr int kScreeningIterations = 20;
  constexpr std::size_t kPolished = 5;
  std::vector<LmRun> runs;
  runs.reserve(starts.size());
  for (const auto& x0 : starts) {
    solver.reset_damping();
    LmRun run = solver.start(x0);
    solver.iterate(run, std::min(kScreeningIterations, problem.options.max_iterations));
    runs.push_back(std::move(run));
  }
  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return runs[a].cost < runs[b].cost; });
  const std::size_t polish = std::min(kPolished, order.size());
  for (std::size_t i = 0; i < polish; ++i) {
    LmRun& run = runs[order[i]];
    if (run.converged) continue;
    solver.reset_damping();
    solver.iterate(run, problem.options.max_iterations - run.iterations);
  }
  const LmRun* best = &runs[order[0]];
  for (std::size_t i = 0; i < polish; ++i)
    if (runs[order[i]].cost < best->cost) best = &runs[order[i]];

  FitResult result;
  result.objective = best->cost;
  result.residual_count = rows.size();
  result.residual_rms = std::sqrt(best->cost / static_cast<double>(rows.size()));
  result.converged = best->converged;
  result.iterations = best->iterations;
  result.starts = static_cast<int>(starts.size());
  result.objective_history = best->history;
  for (const auto& [p, spec] : problem.parameters) result.estimates[p] = map.value(p, best->x);

  if (k > 0) {
    // Covariance in parameter units scaled to O(1) so the rank test is meaningful.
    const Eigen::VectorXd range = map.upper() - map.lower();
    const Eigen::VectorXd scale = best->x.cwiseAbs().cwiseMax(1e-3 * range);
    const Eigen::MatrixXd jac =
        solver.jacobian(best->x, best->residual) * scale.asDiagonal();
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(normal);
    const double dof = static_cast<double>(rows.size()) - static_cast<double>(k);
    const double s2 = dof > 0.0 ? best->cost / dof : std::numeric_limits<double>::infinity();
    const bool full_rank = cod.rank() == static_cast<Eigen::Index>(k);
    const Eigen::MatrixXd cov = full_rank ? Eigen::MatrixXd(cod.pseudoInverse() * s2)
                                          : Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k),
                                                                  static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      result.standard_errors[map.free()[j]] =
          full_rank ? scale(jj) * std::sqrt(std::max(cov(jj, jj), 0.0))
                    : std::numeric_limits<double>::infinity();
    }
  }
  return result;
}

ThresholdEstimate estimate_threshold(std::span<const PumpPoint> points,
                                     const ThresholdModel& model) {
  if (points.size() < 3) throw InvalidArgument("threshold estimation needs at least 3 pump points");
  if (!(model.f_hwhm > 0.0) || !(model.efficiency >= 0.0 && model.efficiency <= 1.0) ||
      !(model.escape_efficiency > 0.0 && model.escape_efficiency <= 1.0) ||
      !(model.phase_jitter >= 0.0 && model.phase_jitter < M_PI / 2) || !(model.f_probe >= 0.0))
    throw InvalidArgument("threshold model parameters are out of range");

  double max_pump = 0.0;
  std::size_t residuals = 0;
  std::vector<double> pumps;
  for (const auto& p : points) {
    if (!(p.pump_power >= 0.0) || !std::isfinite(p.pump_power))
      throw InvalidArgument("pump powers must be non-negative");
    if (std::isfinite(p.squeezing_db) && std::isfinite(p.antisqueezing_db) &&
        p.squeezing_db > p.antisqueezing_db)
      throw PhysicsError("pump point has squeezing above anti-squeezing; not a sub-threshold OPO");
    residuals += std::isfinite(p.squeezing_db) ? 1 : 0;
    residuals += std::isfinite(p.antisqueezing_db) ? 1 : 0;
    max_pump = std::max(max_pump, p.pump_power);
    pumps.push_back(p.pump_power);
  }
  if (residuals < 2) throw InvalidArgument("pump points carry fewer than two measured levels");
  if (!(max_pump > 0.0)) throw InvalidArgument("at least one pump power must be positive");

  // Forward model: pump_sweep with an OPO whose escape efficiency matches.
  const double t = 0.01;
  OpoParams opo;
  opo.transmissivity = t;
  opo.internal_loss = t * (1.0 / model.escape_efficiency - 1.0);
  opo.f_hwhm = model.f_hwhm;
  DetectionChain chain;
  chain.photodiode_efficiency = model.efficiency;
  chain.phase_jitter_rms = model.phase_jitter;

  auto residual = [&](double threshold) {
    opo.threshold_power = threshold;
    const auto rows = pump_sweep(opo, chain, model.f_probe, pumps);
    Eigen::VectorXd r(static_cast<Eigen::Index>(residuals));
    Eigen::Index i = 0;
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (std::isfinite(points[j].squeezing_db)) r(i++) = rows[j].squeezing_db - points[j].squeezing_db;
      if (std::isfinite(points[j].antisqueezing_db))
        r(i++) = rows[j].antisqueezing_db - points[j].antisqueezing_db;
    }
    return r;
  };
  // P_th = max_pump (1 + 10^s); scan s, then golden-section in the best cell.
  auto threshold_of = [&](double s) { return max_pump * (1.0 + std::pow(10.0, s)); };
  auto cost = [&](double s) { return residual(threshold_of(s)).squaredNorm(); };
  constexpr double s_lo = -4.0, s_hi = 2.0;
  constexpr int kScan = 600;
  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kScan; ++i) {
    const double c = cost(s_lo + (s_hi - s_lo) * i / kScan);
    if (c < best_cost) {
      best_cost = c;
      best = i;
    }
  }
  if (best == 0)
    throw PhysicsError("pump points are inconsistent with the sub-threshold model: "
                       "the best threshold coincides with the highest pump power");
  double a = s_lo + (s_hi - s_lo) * (best - 1) / kScan;
  double b = s_lo + (s_hi - s_lo) * std::min(best + 1, kScan) / kScan;
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a), x2 = a + kInvPhi * (b - a);
  double f1 = cost(x1), f2 = cost(x2);
  while (b - a > 1e-12) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = cost(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = cost(x2);
    }
  }
  ThresholdEstimate out;
  out.threshold_power = threshold_of(0.5 * (a + b));
  const Eigen::VectorXd r = residual(out.threshold_power);
  out.residual_count = residuals;
  out.residual_rms_db = std::sqrt(r.squaredNorm() / static_cast<double>(residuals));
  const double h = 1e-6 * out.threshold_power;
  const Eigen::VectorXd slope = (residual(out.threshold_power + h) - residual(out.threshold_power - h)) / (2.0 * h);
  const double dof = static_cast<double>(residuals) - 1.0;
  out.standard_error = dof > 0.0 && slope.squaredNorm() > 0.0
                           ? std::sqrt(r.squaredNorm() / dof / slope.squaredNorm())
                           : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace opo
