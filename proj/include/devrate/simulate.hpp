#pragma once

#include "devrate/error.hpp"
#include "devrate/field.hpp"
#include "devrate/grid.hpp"
#include "devrate/model.hpp"
#include "devrate/rng.hpp"
#include "devrate/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace devrate {

/// One time step of the model's SDE. Langevin models use the BAOAB splitting (half kick, half drift,
/// exact Ornstein-Uhlenbeck momentum update, half drift, half kick); other models use Euler-Maruyama.
class Integrator {
 public:
  Integrator(const DiffusionModel& model, double dt) : model_(&model), dt_(dt) {
    if (!(dt > 0.0)) fail(ErrorKind::parameter, "time step must be positive");
    if (const Langevin* lv = model.langevin()) {
      langevin_ = true;
      d_ = lv->position_dim;
      damping_ = std::exp(-lv->gamma * dt);
      kick_noise_ = std::sqrt(1.0 - damping_ * damping_);
    }
  }

  double dt() const { return dt_; }

  void step(Vec& x, Gaussian& noise) const {
    if (langevin_) {
      const ScalarField& V = model_->langevin()->potential;
      auto q = [&]() -> Vec { return x.head(d_); };
      x.tail(d_) -= 0.5 * dt_ * V.gradient(q());
      x.head(d_) += 0.5 * dt_ * x.tail(d_);
      for (int i = 0; i < d_; ++i) x[d_ + i] = damping_ * x[d_ + i] + kick_noise_ * noise();
      x.head(d_) += 0.5 * dt_ * x.tail(d_);
      x.tail(d_) -= 0.5 * dt_ * V.gradient(q());
      return;
    }
    const Vec b = model_->drift(x);
    const Mat s = model_->sigma(x);
    x += dt_ * b + std::sqrt(dt_) * (s * noise.vector(static_cast<int>(s.cols())));
  }

 private:
  const DiffusionModel* model_;
  double dt_;
  bool langevin_ = false;
  int d_ = 0;
  double damping_ = 1.0;
  double kick_noise_ = 0.0;
};

struct SimulationOptions {
  double dt = 1e-2;
  double T = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double safety_box = 1e6;  // |x|_inf beyond this is a blow-up
  std::vector<ScalarField> observables;
  std::optional<Mesh> histogram;
};

/// Running time, integrals of the observables (midpoint rule), and the empirical measure as
/// cloud-in-cell time weights on a mesh.
struct TrajectoryAccumulator {
  double t = 0.0;
  long steps = 0;
  std::vector<double> integrals;
  Vector histogram;
  double outside_time = 0.0;  // time spent beyond a truncated histogram axis (deposited at the edge)
  Vec state;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  double time_average(std::size_t k) const { return integrals.at(k) / t; }

  /// L_t as a probability vector on the histogram mesh.
  Vector empirical_measure() const { return histogram / histogram.sum(); }
};

inline bool outside_box(const Vec& x, double box) { return !(x.cwiseAbs().maxCoeff() <= box); }

inline TrajectoryAccumulator simulate(const DiffusionModel& model, const Vec& x0, const SimulationOptions& opts) {
  if (x0.size() != model.dimension()) fail(ErrorKind::parameter, "initial state has the wrong dimension");
  if (!(opts.dt > 0.0) || !(opts.T >= opts.dt)) fail(ErrorKind::parameter, "need dt > 0 and T >= dt");
  const Integrator integrator(model, opts.dt);
  Gaussian noise(make_stream(opts.seed, opts.stream));
  TrajectoryAccumulator acc;
  acc.seed = opts.seed;
  acc.stream = opts.stream;
  acc.integrals.assign(opts.observables.size(), 0.0);
  if (opts.histogram) {
    if (opts.histogram->dimension() != model.dimension()) fail(ErrorKind::mesh, "histogram mesh has the wrong dimension");
    acc.histogram = Vector::Zero(static_cast<Eigen::Index>(opts.histogram->size()));
  }
  const long steps = std::lround(opts.T / opts.dt);
  Vec x = x0;
  for (long n = 0; n < steps; ++n) {
    const Vec prev = x;
    integrator.step(x, noise);
    if (outside_box(x, opts.safety_box))
      fail(ErrorKind::blow_up, "state left the safety box at t = " + std::to_string((n + 1) * opts.dt));
    const Vec mid = 0.5 * (prev + x);
    for (std::size_t k = 0; k < opts.observables.size(); ++k) acc.integrals[k] += opts.dt * opts.observables[k](mid);
    if (opts.histogram) {
      const Mesh& m = *opts.histogram;
      bool inside = true;
      for (int k = 0; k < m.dimension(); ++k)
        if (m.axis(k).mode == Boundary::truncated && (mid[k] < m.axis(k).lo || mid[k] > m.axis(k).hi)) inside = false;
      if (!inside) acc.outside_time += opts.dt;
      multilinear_weights(m, mid, [&](std::size_t i, double w) { acc.histogram[static_cast<Eigen::Index>(i)] += w * opts.dt; });
    }
  }
  acc.t = steps * opts.dt;
  acc.steps = steps;
  acc.state = x;
  return acc;
}

}  // namespace devrate
