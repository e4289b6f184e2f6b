#pragma once

// Analytical model of one (weighted) round-robin arbitration point.
//
// Every class i is turned into an independent single-server queue whose
// service time is the *effective* service time T^_i: the raw service time
// plus the time the head packet waits while the arbiter serves the other
// queues. The pipeline is
//
//   effective service mean  ->  total occupancy (maximum entropy)
//     -> residual time (RR) / alpha fit (WRR)  ->  effective service SCV
//     -> waiting time per class  ->  departure SCV per class and merged.
//
// All functions are pure; nothing here holds state between calls.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wrrnoc/errors.hpp"
#include "wrrnoc/traffic.hpp"

namespace wrrnoc {

struct TrafficClassSpec {
  ArrivalSpec arrival;
  int weight = 1;
};

/// Raw service time moments, shared by all classes at one arbiter.
struct ServiceSpec {
  double mean = 1.0;
  double scv = 0.0;
};

struct EffectiveService {
  double batch_mean = 0.0;   // time to serve a batch of `weight` packets
  double mean = 0.0;         // batch_mean / weight
  double scv = 0.0;
  double utilization = 0.0;  // rate * mean
  double delta = 0.0;        // mean - raw service mean
};

enum class ArbitrationMode { RoundRobin, Weighted };

struct SolverOptions {
  double tolerance = 0.01;
  int max_iterations = 100;
};

/// Fixed point of the effective service equation for one class.
struct EffectiveTime {
  double batch_mean = 0.0;
  double mean = 0.0;
  int iterations = 0;
};

struct ClassSolution {
  EffectiveService service;
  double waiting = 0.0;
  double departure_scv = 0.0;
  int iterations = 0;
};

/// Flags raised when a formula left its physical range and was clamped.
struct Diagnostics {
  bool occupancy_clamped = false;
  bool negative_residual = false;
  int scv_clamped = 0;
  int departure_clamped = 0;
  bool degenerate_alpha = false;
  bool alpha_clamped = false;
  double unclamped_alpha = 1.0;
};

struct ArbiterSolution {
  ArbitrationMode mode = ArbitrationMode::Weighted;
  std::vector<ClassSolution> per_class;
  double n_sum = 0.0;
  double residual = 0.0;  // equal-residual R of the round-robin model
  double alpha = 1.0;     // SCV scale factor; 1 for round-robin
  double merged_departure_scv = 0.0;
  Diagnostics diagnostics;
};

namespace detail {

inline double harmonic(int n) {
  double h = 0.0;
  for (int k = 1; k <= n; ++k) h += 1.0 / static_cast<double>(k);
  return h;
}

inline int weight_of(const TrafficClassSpec& c, bool unit_weights) {
  return unit_weights ? 1 : c.weight;
}

inline void validate(std::span<const TrafficClassSpec> classes, const ServiceSpec& service) {
  if (!(service.mean > 0.0) || !std::isfinite(service.mean))
    throw InvalidArgument("service mean must be positive");
  if (!(service.scv >= 0.0) || !std::isfinite(service.scv))
    throw InvalidArgument("service scv must be >= 0");
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i].weight < 1)
      throw InvalidArgument("class " + std::to_string(i) + ": weight must be >= 1");
    wrrnoc::validate(classes[i].arrival);
  }
}

[[noreturn]] inline void saturated_class(std::size_t i, double utilization, const std::string& where) {
  SaturationSite site;
  site.class_index = static_cast<int>(i);
  site.utilization = utilization;
  throw SaturatedError(where + ": class " + std::to_string(i) + " saturated (utilization " +
                           std::to_string(utilization) + ")",
                       site);
}

/// Batch effective service time of class i:
///   x = w_i T + (T / w_i) min(1, l_i x) sum_{j != i} min(1, H(w_j) l_j x)
/// with H the harmonic number. Seeded by the smaller root of the
/// unconstrained quadratic and iterated until successive change < tolerance.
inline EffectiveTime batch_time(std::span<const TrafficClassSpec> classes, std::size_t i,
                                const ServiceSpec& service, const SolverOptions& opts,
                                bool unit_weights) {
  const double t = service.mean;
  const double wi = static_cast<double>(weight_of(classes[i], unit_weights));
  const double li = classes[i].arrival.rate;

  std::vector<double> other;  // H(w_j) * l_j for j != i
  other.reserve(classes.size());
  double other_sum = 0.0;
  for (std::size_t j = 0; j < classes.size(); ++j) {
    if (j == i) continue;
    const double v = harmonic(weight_of(classes[j], unit_weights)) * classes[j].arrival.rate;
    other.push_back(v);
    other_sum += v;
  }

  const double a = (t / wi) * li * other_sum;
  const double c = wi * t;
  const double disc = 1.0 - 4.0 * a * c;
  double x = disc >= 0.0 ? 2.0 * c / (1.0 + std::sqrt(disc)) : c;

  auto rhs = [&](double v) {
    double z = 0.0;
    for (double o : other) z += std::min(1.0, o * v);
    return c + (t / wi) * std::min(1.0, li * v) * z;
  };

  int k = 0;
  double delta = 0.0;
  do {
    if (k >= opts.max_iterations) throw NoConvergenceError(i, k);
    const double next = rhs(x);
    delta = next - x;
    x = next;
    ++k;
  } while (std::abs(delta) >= opts.tolerance);

  return {x, x / wi, k};
}

inline std::vector<EffectiveTime> effective_times(std::span<const TrafficClassSpec> classes,
                                                  const ServiceSpec& service,
                                                  const SolverOptions& opts, bool unit_weights) {
  validate(classes, service);
  if (!(opts.tolerance > 0.0) || opts.max_iterations < 1)
    throw InvalidArgument("solver tolerance must be positive and max_iterations >= 1");
  std::vector<EffectiveTime> out;
  out.reserve(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    out.push_back(batch_time(classes, i, service, opts, unit_weights));
    const double u = classes[i].arrival.rate * out.back().mean;
    if (u >= 1.0) saturated_class(i, u, "effective service");
  }
  return out;
}

/// Maximum-entropy multi-class occupancy for given per-class utilizations and
/// service SCVs. Zero-rate classes must already be filtered out.
inline double me_occupancy(std::span<const double> rates, std::span<const double> utilization,
                           std::span<const double> arrival_scv,
                           std::span<const double> service_scv) {
  double load = 0.0, total_rate = 0.0, first = 0.0, inner = 0.0;
  for (std::size_t k = 0; k < rates.size(); ++k) {
    load += utilization[k];
    total_rate += rates[k];
    first += utilization[k] * (arrival_scv[k] - 1.0);
    inner += utilization[k] * utilization[k] * (arrival_scv[k] + service_scv[k]) / rates[k];
  }
  return 0.5 * (first + total_rate * inner / (1.0 - load));
}

}  // namespace detail

/// Basic round-robin effective service times (all weights treated as 1).
inline std::vector<EffectiveTime> rr_effective_service(std::span<const TrafficClassSpec> classes,
                                                       const ServiceSpec& service,
                                                       const SolverOptions& opts = {}) {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i].weight != 1)
      throw InvalidArgument("rr_effective_service: class " + std::to_string(i) +
                            " has weight != 1");
  return detail::effective_times(classes, service, opts, true);
}

inline std::vector<EffectiveTime> wrr_effective_service(std::span<const TrafficClassSpec> classes,
                                                        const ServiceSpec& service,
                                                        const SolverOptions& opts = {}) {
  return detail::effective_times(classes, service, opts, false);
}

/// Mean total queue occupancy from the raw utilizations rate * T. Zero-rate
/// classes are dropped. The value is not clamped.
inline double me_total_occupancy(std::span<const TrafficClassSpec> classes,
                                 const ServiceSpec& service) {
  detail::validate(classes, service);
  std::vector<double> rate, util, ca, cs;
  double load = 0.0;
  for (const auto& c : classes) {
    if (c.arrival.rate <= 0.0) continue;
    rate.push_back(c.arrival.rate);
    util.push_back(c.arrival.rate * service.mean);
    ca.push_back(c.arrival.scv);
    cs.push_back(service.scv);
    load += util.back();
  }
  if (rate.empty()) return 0.0;
  if (load >= 1.0) {
    SaturationSite site;
    site.utilization = load;
    throw SaturatedError("total occupancy: arbiter load " + std::to_string(load) + " >= 1", site);
  }
  return detail::me_occupancy(rate, util, ca, cs);
}

/// Equal residual time of the round-robin model, from
///   n_sum = sum_i l_i (R / (1 - l_i T^_i) + dT_i).
/// A negative numerator is clamped to zero and flagged.
inline double rr_residual(std::span<const TrafficClassSpec> classes,
                          std::span<const EffectiveService> eff, double n_sum,
                          bool* negative = nullptr) {
  double num = n_sum, den = 0.0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const double l = classes[i].arrival.rate;
    const double u = l * eff[i].mean;
    if (u >= 1.0) detail::saturated_class(i, u, "residual");
    num -= l * eff[i].delta;
    den += l / (1.0 - u);
  }
  if (negative) *negative = num < 0.0;
  if (den <= 0.0 || num <= 0.0) return 0.0;
  return num / den;
}

/// Effective service SCV of one class from the residual time. Undefined for
/// a zero-rate class.
inline double rr_scv(const TrafficClassSpec& cls, const EffectiveService& eff, double residual,
                     bool* clamped = nullptr) {
  const double u = eff.utilization;
  if (!(u > 0.0)) throw InvalidArgument("rr_scv: zero effective utilization");
  const double v = (2.0 * residual / eff.mean + 1.0 - cls.arrival.scv - u) / u;
  if (clamped) *clamped = v < 0.0;
  return std::max(0.0, v);
}

struct AlphaFit {
  double alpha = 0.0;
  double unclamped = 0.0;
  bool degenerate = false;
  std::vector<double> scv;  // alpha * rr_scv_i / w_i^2
};

/// Scales the round-robin SCV upper bounds by alpha / w_i^2 and picks alpha
/// so that the maximum-entropy occupancy written with the effective
/// utilizations reproduces `n_sum`. The relation is linear in alpha; the
/// solution is clamped to [0, 1].
inline AlphaFit wrr_scv(std::span<const TrafficClassSpec> classes,
                        std::span<const EffectiveService> eff,
                        std::span<const double> rr_scv_upper, double n_sum) {
  double load = 0.0, total_rate = 0.0, first = 0.0, fixed = 0.0, coeff = 0.0;
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const double l = classes[k].arrival.rate;
    if (l <= 0.0) continue;
    const double u = eff[k].utilization;
    const double w = static_cast<double>(classes[k].weight);
    load += u;
    total_rate += l;
    first += u * (classes[k].arrival.scv - 1.0);
    fixed += u * u * classes[k].arrival.scv / l;
    coeff += u * u * rr_scv_upper[k] / (w * w * l);
  }
  if (load >= 1.0) {
    SaturationSite site;
    site.utilization = load;
    throw SaturatedError("alpha fit: effective load " + std::to_string(load) + " >= 1", site);
  }

  AlphaFit fit;
  const double scale = 0.5 * total_rate / (1.0 - load);
  const double a = scale * coeff;
  if (a <= 0.0) {
    fit.degenerate = true;
  } else {
    fit.unclamped = (n_sum - 0.5 * first - scale * fixed) / a;
    fit.alpha = std::clamp(fit.unclamped, 0.0, 1.0);
  }
  fit.scv.resize(classes.size());
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const double w = static_cast<double>(classes[k].weight);
    fit.scv[k] = fit.alpha * rr_scv_upper[k] / (w * w);
  }
  return fit;
}

/// Mean waiting time (queueing plus head-of-line arbitration delay, raw
/// service excluded). Never below dT_i; equals dT_i for a zero-rate class.
inline double waiting_time(const TrafficClassSpec& cls, const EffectiveService& eff) {
  const double l = cls.arrival.rate;
  if (l <= 0.0) return eff.delta;
  const double u = l * eff.mean;
  if (u >= 1.0) detail::saturated_class(0, u, "waiting time");
  const double w =
      0.5 * eff.mean * (u - 1.0 + cls.arrival.scv + u * eff.scv) / (1.0 - u) + eff.delta;
  return std::max(w, eff.delta);
}

/// Inter-departure SCV of one class; utilization is the effective one.
inline double departure_scv(const TrafficClassSpec& cls, const EffectiveService& eff,
                            bool* clamped = nullptr) {
  const double u = std::clamp(eff.utilization, 0.0, 1.0);
  const double v = u * u * (eff.scv + 1.0) + (1.0 - u) * cls.arrival.scv + u * (1.0 - 2.0 * u);
  if (clamped) *clamped = v < 0.0;
  return std::max(0.0, v);
}

namespace detail {

inline std::vector<EffectiveService> to_effective(std::span<const TrafficClassSpec> classes,
                                                  std::span<const EffectiveTime> times,
                                                  const ServiceSpec& service) {
  std::vector<EffectiveService> eff(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    eff[i].batch_mean = times[i].batch_mean;
    eff[i].mean = times[i].mean;
    eff[i].utilization = classes[i].arrival.rate * times[i].mean;
    eff[i].delta = std::max(0.0, times[i].mean - service.mean);
    eff[i].scv = service.scv;
  }
  return eff;
}

inline void finish(std::span<const TrafficClassSpec> classes, ArbiterSolution& sol) {
  double rate = 0.0, weighted = 0.0, plain = 0.0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    auto& pc = sol.per_class[i];
    pc.waiting = waiting_time(classes[i], pc.service);
    bool clamped = false;
    pc.departure_scv = departure_scv(classes[i], pc.service, &clamped);
    if (clamped) ++sol.diagnostics.departure_clamped;
    rate += classes[i].arrival.rate;
    weighted += classes[i].arrival.rate * pc.departure_scv;
    plain += classes[i].arrival.scv;
  }
  if (rate > 0.0)
    sol.merged_departure_scv = weighted / rate;
  else if (!classes.empty())
    sol.merged_departure_scv = plain / static_cast<double>(classes.size());
}

/// Round-robin pipeline; weights are ignored.
inline ArbiterSolution solve_round_robin(std::span<const TrafficClassSpec> classes,
                                         const ServiceSpec& service, const SolverOptions& opts) {
  ArbiterSolution sol;
  sol.mode = ArbitrationMode::RoundRobin;
  const auto times = effective_times(classes, service, opts, true);
  const auto eff = to_effective(classes, times, service);

  double n = me_total_occupancy(classes, service);
  if (n < 0.0) {
    sol.diagnostics.occupancy_clamped = true;
    n = 0.0;
  }
  sol.n_sum = n;
  sol.residual = rr_residual(classes, eff, n, &sol.diagnostics.negative_residual);
  sol.alpha = 1.0;

  sol.per_class.resize(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    auto& pc = sol.per_class[i];
    pc.service = eff[i];
    pc.iterations = times[i].iterations;
    if (classes[i].arrival.rate > 0.0) {
      bool clamped = false;
      pc.service.scv = rr_scv(classes[i], eff[i], sol.residual, &clamped);
      if (clamped) ++sol.diagnostics.scv_clamped;
    }
  }
  finish(classes, sol);
  return sol;
}

}  // namespace detail

/// Solves one arbitration point. In Weighted mode with every weight equal to
/// one the round-robin solution is returned (alpha = 1), so both modes agree
/// exactly on round-robin instances.
inline ArbiterSolution solve_arbiter(std::span<const TrafficClassSpec> classes,
                                     const ServiceSpec& service,
                                     ArbitrationMode mode = ArbitrationMode::Weighted,
                                     const SolverOptions& opts = {}) {
  detail::validate(classes, service);
  const bool all_unit = std::all_of(classes.begin(), classes.end(),
                                    [](const TrafficClassSpec& c) { return c.weight == 1; });
  if (mode == ArbitrationMode::RoundRobin || all_unit) {
    auto sol = detail::solve_round_robin(classes, service, opts);
    sol.mode = mode;
    return sol;
  }

  // Round-robin upper bounds on the effective service SCV.
  const auto rr = detail::solve_round_robin(classes, service, opts);
  std::vector<double> upper(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) upper[i] = rr.per_class[i].service.scv;

  ArbiterSolution sol;
  sol.mode = mode;
  sol.n_sum = rr.n_sum;
  sol.residual = rr.residual;
  sol.diagnostics.occupancy_clamped = rr.diagnostics.occupancy_clamped;
  sol.diagnostics.negative_residual = rr.diagnostics.negative_residual;

  const auto times = detail::effective_times(classes, service, opts, false);
  const auto eff = detail::to_effective(classes, times, service);
  const auto fit = wrr_scv(classes, eff, upper, sol.n_sum);
  sol.alpha = fit.alpha;
  sol.diagnostics.degenerate_alpha = fit.degenerate;
  sol.diagnostics.unclamped_alpha = fit.unclamped;
  sol.diagnostics.alpha_clamped = !fit.degenerate && fit.alpha != fit.unclamped;

  sol.per_class.resize(classes.size());
  for (std::size_t i = 0; i < classes.size(); ++i) {
    auto& pc = sol.per_class[i];
    pc.service = eff[i];
    pc.iterations = times[i].iterations;
    if (classes[i].arrival.rate > 0.0) pc.service.scv = fit.scv[i];
  }
  detail::finish(classes, sol);
  return sol;
}

}  // namespace wrrnoc
