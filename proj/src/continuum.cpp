#include "slowstart/continuum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace slowstart {

void GridParams::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("grid_step must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (dt > h * h * (1.0 + 1e-12)) throw ResolutionError("dt must not exceed grid_step^2");
  if (!(extent.lo <= extent.hi)) throw std::invalid_argument("extent_lo must not exceed extent_hi");
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("evaluation time must be positive");
}

std::int64_t GridParams::steps_per_spacing() const {
  auto m = static_cast<std::int64_t>(std::ceil(h / dt - 1e-9));
  if (m % 2 != 0) ++m;
  return m;
}

std::int64_t GridParams::starters() const {
  return static_cast<std::int64_t>(std::floor((extent.hi - extent.lo) / h + 1e-9)) + 1;
}

namespace {

int valuation(std::int64_t index) {
  return index == 0 ? 64 : std::countr_zero(static_cast<std::uint64_t>(index));
}

struct Class {
  double value;
  std::int64_t first;  // starter indices
  std::int64_t last;
  int rep_valuation;
  RngStream stream;
};

class Stepper {
 public:
  Stepper(std::uint64_t seed, Coupling coupling, double step)
      : seed_(seed), coupling_(coupling),
        scale_(std::sqrt(step / static_cast<double>(coupling.substeps))) {}

  Class make(std::int64_t starter, double value) const {
    const std::int64_t index = starter * coupling_.stride;
    return {value, starter, starter, valuation(index),
            derive_stream(seed_, StreamTag::oracle(index))};
  }

  double increment(RngStream& stream) const {
    double sum = 0.0;
    for (int s = 0; s < coupling_.substeps; ++s) sum += stream.standard_normal();
    return scale_ * sum;
  }

  // Merges the top of `classes` while adjacent values are out of order.
  void settle(std::vector<Class>& classes, ContinuumDiagnostics& diag) const {
    while (classes.size() >= 2) {
      Class& lower = classes[classes.size() - 2];
      Class& upper = classes.back();
      if (lower.value < upper.value) break;
      lower.value = 0.5 * (lower.value + upper.value);
      lower.last = upper.last;
      if (upper.rep_valuation > lower.rep_valuation) {
        lower.rep_valuation = upper.rep_valuation;
        lower.stream = upper.stream;
      }
      classes.pop_back();
      ++diag.merges;
    }
  }

  void merge_pass(std::vector<Class>& classes, std::vector<Class>& scratch,
                  ContinuumDiagnostics& diag) const {
    scratch.clear();
    for (auto& c : classes) {
      scratch.push_back(std::move(c));
      settle(scratch, diag);
    }
    classes.swap(scratch);
    for (std::size_t k = 1; k < classes.size(); ++k) {
      if (!(classes[k - 1].value < classes[k].value)) ++diag.order_violations;
    }
  }

 private:
  std::uint64_t seed_;
  Coupling coupling_;
  double scale_;
};

std::vector<std::int64_t> step_counts(const std::vector<double>& times, double step) {
  std::vector<std::int64_t> out;
  for (double t : times) {
    if (!(t > 0.0)) throw std::invalid_argument("evaluation times must be positive");
    out.push_back(std::max<std::int64_t>(1, std::llround(t / step)));
  }
  return out;
}

void check_coupling(const Coupling& c) {
  if (c.stride < 1 || c.substeps < 1) throw std::invalid_argument("coupling factors must be >= 1");
}

}  // namespace

ContinuumRun simulate_coalescing_bm(const GridParams& grid, const std::vector<double>& times,
                                    std::uint64_t seed, Coupling coupling) {
  grid.validate();
  check_coupling(coupling);
  const double step = grid.step();
  const auto eval = step_counts(times, step);
  const Stepper stepper(seed, coupling, step);
  const std::int64_t n_starters = grid.starters();
  auto position = [&](std::int64_t k) { return grid.extent.lo + static_cast<double>(k) * grid.h; };

  ContinuumRun run;
  run.snapshots.resize(times.size());
  run.spreads.resize(times.size());
  std::vector<Class> classes;
  std::vector<Class> scratch;
  classes.reserve(static_cast<std::size_t>(n_starters));
  for (std::int64_t k = 0; k < n_starters; ++k) classes.push_back(stepper.make(k, position(k)));

  const std::int64_t last_step = eval.empty() ? 0 : *std::max_element(eval.begin(), eval.end());
  for (std::int64_t n = 1; n <= last_step; ++n) {
    for (auto& c : classes) c.value += stepper.increment(c.stream);
    stepper.merge_pass(classes, scratch, run.diagnostics);
    ++run.diagnostics.steps;
    for (std::size_t ti = 0; ti < eval.size(); ++ti) {
      if (eval[ti] != n) continue;
      auto& snap = run.snapshots[ti];
      snap.t = times[ti];
      snap.frame = Frame::Continuum;
      for (std::size_t k = 1; k < classes.size(); ++k) {
        const double y = 0.5 * (position(classes[k - 1].last) + position(classes[k].first));
        snap.points.push_back({y, classes[k].value - classes[k - 1].value});
      }
      run.spreads[ti] = classes.back().value - classes.front().value;
    }
  }
  return run;
}

MarkedPointSet simulate_coalescing_bm(const GridParams& grid, std::uint64_t seed) {
  return simulate_coalescing_bm(grid, {grid.t}, seed).snapshots.front();
}

ContinuumRun simulate_reflected_web(const GridParams& grid, const std::vector<double>& times,
                                    std::uint64_t seed, Coupling coupling) {
  grid.validate();
  check_coupling(coupling);
  const double step = grid.step();
  const std::int64_t m = grid.steps_per_spacing();
  const auto eval = step_counts(times, step);
  for (auto n_t : eval) {
    if (n_t < m / 2) throw std::invalid_argument("evaluation time below half the grid step");
  }
  const Stepper stepper(seed, coupling, step);
  const std::int64_t n_starters = grid.starters();
  const std::int64_t max_eval = eval.empty() ? 0 : *std::max_element(eval.begin(), eval.end());
  const std::int64_t last_step = (n_starters - 1) * m + m / 2 + max_eval;

  ContinuumRun run;
  run.snapshots.resize(times.size());
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    run.snapshots[ti].t = times[ti];
    run.snapshots[ti].frame = Frame::Continuum;
  }
  auto w_stream = derive_stream(seed, StreamTag::driving_path());
  double w = 0.0;
  std::vector<Class> classes;
  std::vector<Class> scratch;

  for (std::int64_t n = 0;; ++n) {
    if (n % m == 0 && n / m < n_starters) {
      classes.push_back(stepper.make(n / m, w));
      stepper.settle(classes, run.diagnostics);
    }
    for (std::size_t ti = 0; ti < eval.size(); ++ti) {
      const std::int64_t offset = n - m / 2 - eval[ti];
      if (offset < 0 || offset % m != 0) continue;
      const std::int64_t k = offset / m;
      if (k + 1 >= n_starters) continue;
      // Class holding starter k; starter k + 1 is born, so a boundary after k
      // exists iff that class ends at k.
      const auto it = std::lower_bound(classes.begin(), classes.end(), k,
                                       [](const Class& c, std::int64_t s) { return c.last < s; });
      if (it == classes.end() || it->last != k || it + 1 == classes.end()) continue;
      const double y = grid.extent.lo + (static_cast<double>(k) + 0.5) * grid.h;
      run.snapshots[ti].points.push_back({y, (it + 1)->value - it->value});
    }
    if (n == last_step) break;
    w += stepper.increment(w_stream);
    for (auto& c : classes) {
      c.value = std::min(c.value + stepper.increment(c.stream), w);
      if (c.value > w) ++run.diagnostics.reflection_violations;
    }
    stepper.merge_pass(classes, scratch, run.diagnostics);
    ++run.diagnostics.steps;
  }
  return run;
}

MarkedPointSet simulate_reflected_web(const GridParams& grid, std::uint64_t seed) {
  return simulate_reflected_web(grid, {grid.t}, seed).snapshots.front();
}

Functionals extract_functionals(const MarkedPointSet& mps, Interval window, double mass_floor) {
  Functionals f;
  double previous = 0.0;
  for (const auto& p : mps.points) {
    if (!window.contains(p.position) || !(p.mass > mass_floor)) continue;
    if (f.count > 0) f.spacings.push_back(p.position - previous);
    previous = p.position;
    ++f.count;
    f.total_mass += p.mass;
    f.max_mass = std::max(f.max_mass, p.mass);
  }
  return f;
}

}  // namespace slowstart
