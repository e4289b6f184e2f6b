#pragma once

// Network description shared by the analytical model and the simulator.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wrrnoc/arbiter_analysis.hpp"
#include "wrrnoc/errors.hpp"
#include "wrrnoc/topology.hpp"
#include "wrrnoc/traffic.hpp"

namespace wrrnoc {

/// Pins the weight of one arbiter input, overriding the src/ring policy.
struct WeightOverride {
  int router = 0;
  int out_port = 0;
  int in_port = 0;
  int weight = 1;

  friend bool operator==(const WeightOverride&, const WeightOverride&) = default;
};

struct RouterConfig {
  double service_mean = 1.0;
  double service_scv = 0.0;
  int weight_ring = 1;  // inputs fed by neighbouring routers
  int weight_src = 1;   // local injection input
  int pipeline_depth = 2;
  int link_latency = 1;
  std::vector<WeightOverride> overrides;

  ServiceSpec service() const { return {service_mean, service_scv}; }

  int weight(int router, int out_port, int in_port) const {
    for (const auto& o : overrides)
      if (o.router == router && o.out_port == out_port && o.in_port == in_port) return o.weight;
    return in_port == port::kLocalInput ? weight_src : weight_ring;
  }

  int hop_delay() const { return pipeline_depth + link_latency; }

  friend bool operator==(const RouterConfig&, const RouterConfig&) = default;
};

struct FlowSpec {
  int source = 0;
  int destination = 0;
  ArrivalSpec arrival;
};

/// One injection process of the simulator. Every released packet picks a
/// destination with the given probabilities.
struct TrafficSource {
  int node = 0;
  GGeoSpec process;
  std::vector<int> destinations;
  std::vector<double> probabilities;
};

struct NetworkSpec {
  Topology topology;
  RouterConfig router;
  std::vector<FlowSpec> flows;      // analytical view
  std::vector<TrafficSource> sources;  // simulator view; empty = one source per flow
  ArbitrationMode mode = ArbitrationMode::Weighted;
  SolverOptions solver;
};

inline void validate(const RouterConfig& r) {
  if (!(r.service_mean > 0.0) || !std::isfinite(r.service_mean))
    throw InvalidArgument("router: service_mean must be positive");
  if (!(r.service_scv >= 0.0)) throw InvalidArgument("router: service_scv must be >= 0");
  if (r.weight_ring < 1 || r.weight_src < 1)
    throw InvalidArgument("router: weights must be >= 1");
  if (r.pipeline_depth < 0 || r.link_latency < 0)
    throw InvalidArgument("router: latencies must be >= 0");
  for (const auto& o : r.overrides)
    if (o.weight < 1) throw InvalidArgument("router: override weight must be >= 1");
}

inline void validate_flows(const Topology& topo, std::span<const FlowSpec> flows) {
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const auto& f = flows[i];
    const std::string where = "flow " + std::to_string(i) + ": ";
    if (!topo.valid_node(f.source) || !topo.valid_node(f.destination))
      throw InvalidArgument(where + "node id out of range");
    if (f.source == f.destination) throw InvalidArgument(where + "source equals destination");
    if (!(f.arrival.rate > 0.0)) throw InvalidArgument(where + "rate must be positive");
    validate(f.arrival);
  }
}

/// Analytical flows implied by simulator sources. Each flow is an independent
/// random thinning of its source process.
inline std::vector<FlowSpec> flows_from_sources(std::span<const TrafficSource> sources) {
  std::vector<FlowSpec> flows;
  for (const auto& s : sources) {
    const ArrivalSpec a = scv_from_burst(s.process);
    for (std::size_t k = 0; k < s.destinations.size(); ++k) {
      if (s.probabilities[k] <= 0.0 || a.rate <= 0.0) continue;
      flows.push_back({s.node, s.destinations[k], split_arrivals(a, s.probabilities[k])});
    }
  }
  return flows;
}

/// One GGeo source per flow. SCVs below the Bernoulli floor are raised to it.
inline std::vector<TrafficSource> sources_from_flows(std::span<const FlowSpec> flows) {
  std::vector<TrafficSource> sources;
  sources.reserve(flows.size());
  for (const auto& f : flows) {
    ArrivalSpec a = f.arrival;
    a.scv = std::max(a.scv, 1.0 - a.rate);
    sources.push_back({f.source, burst_from_scv(a), {f.destination}, {1.0}});
  }
  return sources;
}

}  // namespace wrrnoc
