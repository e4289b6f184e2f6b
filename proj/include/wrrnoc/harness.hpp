#pragma once

// Sweep execution: runs the analytical model and/or the simulator for every
// point of a scenario and collects comparison rows.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "wrrnoc/errors.hpp"
#include "wrrnoc/network_analysis.hpp"
#include "wrrnoc/report.hpp"
#include "wrrnoc/scenario.hpp"
#include "wrrnoc/simulator.hpp"

namespace wrrnoc {

enum class RunMode { Analyze, Simulate, Compare };

struct SweepPoint {
  std::string id;
  double lambda = 0.0;
  double p_burst = 0.0;
  WeightPair weights;
};

/// Points of the `compare`-style sweep (lambda only), or with `cross` the
/// product weights x p_burst x lambda used by the `sweep` subcommand.
inline std::vector<SweepPoint> sweep_points(const Scenario& sc, bool cross = false) {
  std::vector<SweepPoint> pts;
  const WeightPair base{sc.router.weight_ring, sc.router.weight_src};
  if (!cross) {
    for (double l : sc.lambdas) pts.push_back({sc.id, l, sc.p_burst, base});
    return pts;
  }
  const auto weights = sc.weight_sweep.empty() ? std::vector<WeightPair>{base} : sc.weight_sweep;
  const auto bursts = sc.burst_sweep.empty() ? std::vector<double>{sc.p_burst} : sc.burst_sweep;
  for (const auto& w : weights)
    for (double pb : bursts) {
      char suffix[64];
      std::snprintf(suffix, sizeof suffix, "/w%d-%d/p%g", w.ring, w.src, pb);
      for (double l : sc.lambdas) pts.push_back({sc.id + suffix, l, pb, w});
    }
  return pts;
}

/// Injection rate at which the busiest arbiter reaches full utilization
/// (the throughput limit of both engines), capped at 1 packet/cycle/source.
inline double saturation_rate(const Scenario& sc) {
  constexpr double probe = 1e-3;
  const auto net = make_network(sc, probe, 0.0, {1, 1});
  const auto pc = aggregate_port_classes(net.topology, net.flows, net.router);
  double peak = 0.0;
  for (const auto& a : pc.arbiters) peak = std::max(peak, a.utilization);
  if (!(peak > 0.0)) return 1.0;
  return std::min(1.0, probe / peak);
}

struct PointOptions {
  RunMode mode = RunMode::Compare;
  std::uint64_t seed = 1;
  std::ostream* event_log = nullptr;  // simulator trace, single point only
};

inline ComparisonRow run_point(const Scenario& sc, const SweepPoint& pt, const PointOptions& opt) {
  ComparisonRow row;
  row.scenario = pt.id;
  row.lambda = pt.lambda;
  row.p_burst = pt.p_burst;
  row.w_ring = pt.weights.ring;
  row.w_src = pt.weights.src;
  NetworkSpec net;
  try {
    net = make_network(sc, pt.lambda, pt.p_burst, pt.weights);
  } catch (const std::exception& e) {
    row.error = e.what();
    return row;
  }

  if (opt.mode != RunMode::Simulate) {
    try {
      row.analytic = analyze(net).average;
    } catch (const SaturatedError&) {
      row.saturated = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  } else {
    // Only the offered-load check; the model itself is not run.
    try {
      (void)aggregate_port_classes(net.topology, net.flows, net.router);
    } catch (const SaturatedError&) {
      row.saturated = true;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }

  if (opt.mode != RunMode::Analyze) {
    try {
      SimConfig cfg;
      cfg.total_cycles = sc.total_cycles;
      cfg.warmup_cycles = sc.warmup_cycles;
      cfg.seed = opt.seed;
      cfg.event_log = opt.event_log;
      const auto stats = simulate(net, cfg);
      if (stats.measured_packets > 0) row.sim = stats.average_latency;
      else if (row.error.empty()) row.error = "no packets measured";
    } catch (const std::exception& e) {
      if (row.error.empty()) row.error = e.what();
    }
  }
  return row;
}

/// Runs the points on `jobs` worker threads. Rows come back in point order
/// and do not depend on `jobs`.
inline std::vector<ComparisonRow> run_points(const Scenario& sc, const std::vector<SweepPoint>& pts,
                                             const PointOptions& opt, int jobs = 1) {
  std::vector<ComparisonRow> rows(pts.size());
  jobs = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(pts.size(), 1)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < pts.size(); ++i) rows[i] = run_point(sc, pts[i], opt);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < pts.size();) rows[i] = run_point(sc, pts[i], opt);
    });
  for (auto& t : pool) t.join();
  return rows;
}

inline std::vector<ComparisonRow> run_compare(const Scenario& sc, int jobs = 1) {
  return run_points(sc, sweep_points(sc), {RunMode::Compare, sc.seed, nullptr}, jobs);
}

}  // namespace wrrnoc
