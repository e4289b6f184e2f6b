#pragma once

// End-to-end latency by queue decomposition.
//
// Each router output arbiter is solved in isolation. The class of an input
// port aggregates every flow entering the arbiter through that port. Classes
// fed by a neighbouring router take the merged departure SCV of the upstream
// arbiter as their arrival SCV; local classes keep the source SCV. Because a
// ring closes dependency cycles between arbiters, the SCVs are propagated by
// Jacobi sweeps until they stop changing; on acyclic meshes the sweeps finish
// after one pass per stage of the longest chain.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wrrnoc/arbiter_analysis.hpp"
#include "wrrnoc/errors.hpp"
#include "wrrnoc/network.hpp"
#include "wrrnoc/topology.hpp"

namespace wrrnoc {

struct ArbiterClass {
  int in_port = 0;
  TrafficClassSpec spec;
};

struct ArbiterLoad {
  int router = 0;
  int out_port = 0;
  std::vector<ArbiterClass> classes;
  double utilization = 0.0;  // sum of class rates * T
};

/// Per-arbiter traffic classes, indexed by Topology::arbiter_id.
struct PortClasses {
  std::vector<ArbiterLoad> arbiters;
  std::vector<int> class_index;  // [arbiter * inputs + in_port] -> class, or -1
  int inputs = 0;

  int class_of(int arbiter, int in_port) const {
    return class_index[static_cast<std::size_t>(arbiter * inputs + in_port)];
  }
};

struct NetworkSolution {
  PortClasses classes;  // with propagated arrival SCVs
  std::vector<std::optional<ArbiterSolution>> arbiters;
  int sweeps = 0;
};

struct FlowLatency {
  FlowSpec flow;
  double waiting = 0.0;
  double free_delay = 0.0;
  double latency = 0.0;
};

struct LatencyReport {
  std::vector<FlowLatency> per_flow;
  double average = 0.0;
  NetworkSolution network;
};

namespace detail {

inline std::vector<double> utilization_map(const PortClasses& pc) {
  std::vector<double> u(pc.arbiters.size());
  for (std::size_t a = 0; a < u.size(); ++a) u[a] = pc.arbiters[a].utilization;
  return u;
}

[[noreturn]] inline void saturated_arbiter(const PortClasses& pc, int arbiter, double utilization,
                                           const std::string& why) {
  SaturationSite site;
  site.router = pc.arbiters[static_cast<std::size_t>(arbiter)].router;
  site.out_port = pc.arbiters[static_cast<std::size_t>(arbiter)].out_port;
  site.utilization = utilization;
  throw SaturatedError("arbiter (router " + std::to_string(site.router) + ", port " +
                           std::to_string(site.out_port) + ") saturated: " + why,
                       site, utilization_map(pc));
}

}  // namespace detail

/// Groups flows into one class per (arbiter, input port). Class rates add;
/// class SCVs are the rate-weighted merge of the flows' source SCVs.
inline PortClasses aggregate_port_classes(const Topology& topo, std::span<const FlowSpec> flows,
                                          const RouterConfig& router) {
  validate(router);
  validate_flows(topo, flows);
  const int inputs = topo.input_count();
  const std::size_t slots = static_cast<std::size_t>(topo.arbiter_count() * inputs);
  std::vector<double> rate(slots, 0.0), scv_mass(slots, 0.0);

  for (const auto& f : flows) {
    for_each_stage(topo, f.source, f.destination, [&](const Stage& s) {
      const auto k = static_cast<std::size_t>(topo.arbiter_id(s.router, s.out_port) * inputs + s.in_port);
      rate[k] += f.arrival.rate;
      scv_mass[k] += f.arrival.rate * f.arrival.scv;
    });
  }

  PortClasses pc;
  pc.inputs = inputs;
  pc.arbiters.resize(static_cast<std::size_t>(topo.arbiter_count()));
  pc.class_index.assign(slots, -1);
  const double t = router.service_mean;
  std::optional<int> overloaded;
  for (int r = 0; r < topo.node_count(); ++r) {
    for (int p = 0; p < topo.port_count(); ++p) {
      const int a = topo.arbiter_id(r, p);
      auto& load = pc.arbiters[static_cast<std::size_t>(a)];
      load.router = r;
      load.out_port = p;
      double total = 0.0;
      for (int in = 0; in < inputs; ++in) {
        const auto k = static_cast<std::size_t>(a * inputs + in);
        if (rate[k] <= 0.0) continue;
        pc.class_index[k] = static_cast<int>(load.classes.size());
        load.classes.push_back(
            {in, {{rate[k], scv_mass[k] / rate[k]}, router.weight(r, p, in)}});
        total += rate[k];
      }
      load.utilization = total * t;
      if (load.utilization >= 1.0 && !overloaded) overloaded = a;
    }
  }
  if (overloaded)
    detail::saturated_arbiter(pc, *overloaded,
                              pc.arbiters[static_cast<std::size_t>(*overloaded)].utilization,
                              "offered load >= 1");
  return pc;
}

struct DecompositionOptions {
  double scv_tolerance = 1e-12;
  int max_sweeps = 2000;
};

/// Solves every loaded arbiter and propagates departure SCVs downstream.
/// Throws SaturatedError naming the first arbiter the model cannot solve.
inline NetworkSolution solve_network(const Topology& topo, PortClasses classes,
                                     const RouterConfig& router, ArbitrationMode mode,
                                     const SolverOptions& solver = {},
                                     const DecompositionOptions& opts = {}) {
  const int n_arb = topo.arbiter_count();
  const int inputs = classes.inputs;
  const ServiceSpec service = router.service();

  // Upstream arbiter of every ring-role class.
  std::vector<int> upstream(static_cast<std::size_t>(n_arb * inputs), -1);
  for (int a = 0; a < n_arb; ++a) {
    const auto& load = classes.arbiters[static_cast<std::size_t>(a)];
    for (const auto& c : load.classes) {
      if (c.in_port == port::kLocalInput) continue;
      const int dir = c.in_port - 1;
      const int from = topo.neighbor(load.router, Topology::reverse(dir));
      upstream[static_cast<std::size_t>(a * inputs + c.in_port)] = topo.arbiter_id(from, dir);
    }
  }

  NetworkSolution net;
  net.arbiters.resize(static_cast<std::size_t>(n_arb));
  std::vector<double> departure(static_cast<std::size_t>(n_arb), 1.0);
  std::vector<double> next(departure.size(), 1.0);
  std::vector<TrafficClassSpec> specs;

  for (int sweep = 1;; ++sweep) {
    double change = 0.0;
    for (int a = 0; a < n_arb; ++a) {
      auto& load = classes.arbiters[static_cast<std::size_t>(a)];
      if (load.classes.empty()) continue;
      specs.clear();
      for (auto& c : load.classes) {
        const int up = upstream[static_cast<std::size_t>(a * inputs + c.in_port)];
        if (up >= 0 && sweep > 1) c.spec.arrival.scv = departure[static_cast<std::size_t>(up)];
        specs.push_back(c.spec);
      }
      try {
        auto sol = solve_arbiter(specs, service, mode, solver);
        next[static_cast<std::size_t>(a)] = sol.merged_departure_scv;
        net.arbiters[static_cast<std::size_t>(a)] = std::move(sol);
      } catch (const SaturatedError& e) {
        detail::saturated_arbiter(classes, a, e.site().utilization, e.what());
      }
      change = std::max(change, std::abs(next[static_cast<std::size_t>(a)] -
                                         departure[static_cast<std::size_t>(a)]));
    }
    departure.swap(next);
    net.sweeps = sweep;
    if (sweep > 1 && change < opts.scv_tolerance) break;
    if (sweep >= opts.max_sweeps) throw NoConvergenceError(0, sweep);
  }
  net.classes = std::move(classes);
  return net;
}

/// Sum of the class waiting times along the flow's stages. The arrival SCV of
/// the flow's class at stage j + 1 is the merged departure SCV of stage j.
inline double flow_waiting_time(const FlowSpec& flow, std::span<const Stage> stages,
                                const NetworkSolution& net, const Topology& topo,
                                int flow_index = -1) {
  (void)flow;
  double total = 0.0;
  for (std::size_t j = 0; j < stages.size(); ++j) {
    const int a = topo.arbiter_id(stages[j].router, stages[j].out_port);
    const auto& sol = net.arbiters[static_cast<std::size_t>(a)];
    const int k = net.classes.class_of(a, stages[j].in_port);
    if (!sol || k < 0) {
      SaturationSite site;
      site.router = stages[j].router;
      site.out_port = stages[j].out_port;
      site.flow_index = flow_index;
      site.stage_index = static_cast<int>(j);
      throw SaturatedError("flow " + std::to_string(flow_index) + ": stage " +
                               std::to_string(j) + " has no solution",
                           site);
    }
    total += sol->per_class[static_cast<std::size_t>(k)].waiting;
  }
  return total;
}

inline double free_packet_delay(const Topology& topo, const RouterConfig& router, int src,
                                int dst) {
  if (!topo.valid_node(src) || !topo.valid_node(dst))
    throw InvalidArgument("free_packet_delay: node id out of range");
  return static_cast<double>(topo.hop_count(src, dst)) *
         static_cast<double>(router.pipeline_depth + router.link_latency);
}

inline LatencyReport analyze(const NetworkSpec& spec) {
  const auto& topo = spec.topology;
  auto classes = aggregate_port_classes(topo, spec.flows, spec.router);

  LatencyReport report;
  report.network = solve_network(topo, std::move(classes), spec.router, spec.mode, spec.solver);
  const auto& net = report.network;

  report.per_flow.reserve(spec.flows.size());
  double rate_sum = 0.0, weighted = 0.0;
  for (const auto& f : spec.flows) {
    double w = 0.0;
    for_each_stage(topo, f.source, f.destination, [&](const Stage& s) {
      const int a = topo.arbiter_id(s.router, s.out_port);
      w += net.arbiters[static_cast<std::size_t>(a)]
               ->per_class[static_cast<std::size_t>(net.classes.class_of(a, s.in_port))]
               .waiting;
    });
    const double t = free_packet_delay(topo, spec.router, f.source, f.destination);
    report.per_flow.push_back({f, w, t, w + t});
    rate_sum += f.arrival.rate;
    weighted += f.arrival.rate * (w + t);
  }
  report.average = rate_sum > 0.0 ? weighted / rate_sum : 0.0;
  return report;
}

}  // namespace wrrnoc
