#pragma once

// Cycle-accurate packet-level NoC simulator.
//
// Each router output port owns a WRR arbiter over unbounded input FIFOs
// (local injection plus one per incoming link). A granted packet holds the
// output for `service_mean` cycles and reaches the next router
// `pipeline_depth + link_latency` cycles after its grant (at least one
// cycle). Packets that reach their destination router are ejected at once.
//
// Within a cycle: link arrivals are enqueued, sources inject, then every
// idle arbiter grants at most one packet. A packet enqueued in cycle t can
// be granted in cycle t, so an uncontended hop costs exactly the hop delay.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "wrrnoc/errors.hpp"
#include "wrrnoc/network.hpp"
#include "wrrnoc/topology.hpp"
#include "wrrnoc/traffic.hpp"
#include "wrrnoc/wrr_arbiter.hpp"

namespace wrrnoc {

struct ScriptedPacket {
  std::uint64_t cycle = 0;
  int source = 0;
  int destination = 0;
};

struct SimConfig {
  std::uint64_t total_cycles = 200000;
  std::uint64_t warmup_cycles = 20000;
  std::uint64_t seed = 1;
  std::vector<ScriptedPacket> scripted;  // injected in addition to the sources
  std::ostream* event_log = nullptr;     // "cycle router port event" lines
};

struct QueueStats {
  std::uint64_t arrivals = 0;
  std::uint64_t served = 0;
  std::uint64_t waited = 0;  // packets with a recorded waiting time
  double mean_wait = 0.0;
  double mean_occupancy = 0.0;
  double arrival_rate = 0.0;
};

struct ArbiterStats {
  int router = 0;
  int out_port = 0;
  std::vector<QueueStats> inputs;
  std::uint64_t departures = 0;
  std::uint64_t gap_count = 0;
  double gap_sum = 0.0;
  double gap_sq_sum = 0.0;
  double busy_fraction = 0.0;
};

struct FlowStats {
  int source = 0;
  int destination = 0;
  std::uint64_t count = 0;
  double mean_latency = 0.0;
};

struct SimStats {
  std::vector<FlowStats> flows;         // flows with at least one measured packet
  std::vector<ArbiterStats> arbiters;   // indexed by Topology::arbiter_id
  double average_latency = 0.0;         // over all measured packets
  std::uint64_t measured_packets = 0;
  std::uint64_t injected = 0;           // whole run
  std::uint64_t delivered = 0;          // whole run
  std::uint64_t delivered_in_window = 0;
  std::uint64_t measured_cycles = 0;
  std::uint64_t seed = 0;
};

/// Sample SCV of the inter-departure gaps (in cycles) at one arbiter output.
inline double measure_departure_scv(const SimStats& stats, int arbiter,
                                    std::uint64_t min_samples = 10000) {
  const auto& a = stats.arbiters.at(static_cast<std::size_t>(arbiter));
  if (a.gap_count < min_samples) throw InsufficientSamplesError(a.gap_count, min_samples);
  const double n = static_cast<double>(a.gap_count);
  const double mean = a.gap_sum / n;
  return (a.gap_sq_sum / n - mean * mean) / (mean * mean);
}

namespace detail {

struct SimPacket {
  int source = 0;
  int destination = 0;
  int at = 0;  // router the packet is travelling to / waiting in
  int in_port = 0;
  std::uint64_t injected = 0;
  std::uint64_t enqueued = 0;
};

struct SimQueue {
  std::deque<std::uint32_t> fifo;
  std::uint64_t arrivals = 0;
  std::uint64_t served = 0;
  std::uint64_t waited = 0;
  double wait_sum = 0.0;
  double area = 0.0;
  std::uint64_t last_change = 0;
};

struct SimArbiter {
  std::vector<int> weights;
  WrrArbiterState state;
  std::uint64_t busy_until = 0;
  int pending = 0;
  std::uint64_t departures = 0;
  std::uint64_t busy_cycles = 0;
  bool has_last = false;
  std::uint64_t last_departure = 0;
  std::uint64_t gap_count = 0;
  double gap_sum = 0.0;
  double gap_sq_sum = 0.0;
};

struct SourceState {
  GGeoSource process;
  int node;
  std::vector<int> destinations;
  std::vector<double> cumulative;
};

}  // namespace detail

inline SimStats simulate(const NetworkSpec& net, const SimConfig& cfg) {
  const Topology& topo = net.topology;
  validate(net.router);
  if (cfg.warmup_cycles >= cfg.total_cycles)
    throw InvalidArgument("simulate: warmup_cycles must be below total_cycles");
  const double t_real = net.router.service_mean;
  if (t_real < 1.0 || std::floor(t_real) != t_real)
    throw InvalidArgument("simulate: service_mean must be a positive integer number of cycles");
  const auto service = static_cast<std::uint64_t>(t_real);
  const auto hop = static_cast<std::uint64_t>(std::max(1, net.router.hop_delay()));

  const int ports = topo.port_count();
  const int inputs = topo.input_count();
  const int n_nodes = topo.node_count();
  const int n_arb = topo.arbiter_count();
  const std::uint64_t warmup = cfg.warmup_cycles;

  // Sources.
  std::vector<detail::SourceState> sources;
  {
    std::vector<TrafficSource> owned;
    std::span<const TrafficSource> spec = net.sources;
    if (spec.empty()) {
      validate_flows(topo, net.flows);
      owned = sources_from_flows(net.flows);
      spec = owned;
    }
    sources.reserve(spec.size());
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const auto& s = spec[i];
      if (!topo.valid_node(s.node)) throw InvalidArgument("simulate: source node out of range");
      if (s.destinations.size() != s.probabilities.size() || s.destinations.empty())
        throw InvalidArgument("simulate: source destinations/probabilities mismatch");
      double total = 0.0;
      for (std::size_t k = 0; k < s.destinations.size(); ++k) {
        if (!topo.valid_node(s.destinations[k]) || s.destinations[k] == s.node)
          throw InvalidArgument("simulate: invalid destination for source " + std::to_string(i));
        if (s.probabilities[k] < 0.0) throw InvalidArgument("simulate: negative probability");
        total += s.probabilities[k];
      }
      if (!(total > 0.0)) throw InvalidArgument("simulate: probabilities sum to zero");
      detail::SourceState st{GGeoSource(s.process, cfg.seed, i), s.node, s.destinations, {}};
      double acc = 0.0;
      for (double p : s.probabilities) st.cumulative.push_back(acc += p / total);
      st.cumulative.back() = 1.0;
      sources.push_back(std::move(st));
    }
  }
  for (const auto& sp : cfg.scripted)
    if (!topo.valid_node(sp.source) || !topo.valid_node(sp.destination) || sp.source == sp.destination)
      throw InvalidArgument("simulate: invalid scripted packet");
  std::vector<ScriptedPacket> scripted = cfg.scripted;
  std::stable_sort(scripted.begin(), scripted.end(),
                   [](const ScriptedPacket& a, const ScriptedPacket& b) { return a.cycle < b.cycle; });
  std::size_t next_script = 0;

  // Arbiters and queues.
  std::vector<detail::SimArbiter> arbiters(static_cast<std::size_t>(n_arb));
  for (int r = 0; r < n_nodes; ++r)
    for (int p = 0; p < ports; ++p) {
      auto& a = arbiters[static_cast<std::size_t>(topo.arbiter_id(r, p))];
      for (int in = 0; in < inputs; ++in) a.weights.push_back(net.router.weight(r, p, in));
      a.state = initial_state(a.weights);
    }
  std::vector<detail::SimQueue> queues(static_cast<std::size_t>(n_arb * inputs));

  std::vector<detail::SimPacket> pool;
  std::vector<std::uint32_t> free_list;
  std::vector<std::vector<std::uint32_t>> wheel(static_cast<std::size_t>(hop + 1));

  std::vector<std::uint64_t> flow_count(static_cast<std::size_t>(n_nodes * n_nodes), 0);
  std::vector<double> flow_sum(flow_count.size(), 0.0);

  SimStats stats;
  stats.seed = cfg.seed;
  double latency_sum = 0.0;

  auto integrate = [&](detail::SimQueue& q, std::uint64_t now) {
    const std::uint64_t t = std::max(now, warmup);
    if (t > q.last_change) {
      q.area += static_cast<double>(q.fifo.size()) * static_cast<double>(t - q.last_change);
      q.last_change = t;
    }
  };
  auto log = [&](std::uint64_t cycle, int router, int port, const char* event) {
    if (cfg.event_log) *cfg.event_log << cycle << ' ' << router << ' ' << port << ' ' << event << '\n';
  };
  auto enqueue = [&](std::uint32_t id, std::uint64_t now) {
    auto& pkt = pool[id];
    const int out = topo.next_port(pkt.at, pkt.destination);
    const int a = topo.arbiter_id(pkt.at, out);
    auto& q = queues[static_cast<std::size_t>(a * inputs + pkt.in_port)];
    integrate(q, now);
    q.fifo.push_back(id);
    if (now >= warmup) ++q.arrivals;
    pkt.enqueued = now;
    ++arbiters[static_cast<std::size_t>(a)].pending;
  };
  auto inject = [&](int src, int dst, std::uint64_t now) {
    std::uint32_t id;
    if (free_list.empty()) {
      id = static_cast<std::uint32_t>(pool.size());
      pool.emplace_back();
    } else {
      id = free_list.back();
      free_list.pop_back();
    }
    pool[id] = {src, dst, src, port::kLocalInput, now, now};
    ++stats.injected;
    log(now, src, topo.next_port(src, dst), "inject");
    enqueue(id, now);
  };

  for (std::uint64_t cycle = 0; cycle < cfg.total_cycles; ++cycle) {
    // Link arrivals.
    auto& slot = wheel[static_cast<std::size_t>(cycle % (hop + 1))];
    for (std::uint32_t id : slot) {
      auto& pkt = pool[id];
      if (pkt.at == pkt.destination) {
        ++stats.delivered;
        log(cycle, pkt.at, -1, "eject");
        if (pkt.injected >= warmup) {
          const double lat = static_cast<double>(cycle - pkt.injected);
          const auto f = static_cast<std::size_t>(pkt.source * n_nodes + pkt.destination);
          ++flow_count[f];
          flow_sum[f] += lat;
          latency_sum += lat;
          ++stats.measured_packets;
        }
        if (cycle >= warmup) ++stats.delivered_in_window;
        free_list.push_back(id);
      } else {
        enqueue(id, cycle);
      }
    }
    slot.clear();

    // Injection.
    for (auto& s : sources) {
      for (unsigned n = s.process.next_cycle(); n > 0; --n) {
        std::size_t k = 0;
        if (s.destinations.size() > 1) {
          const double u = s.process.rng().uniform();
          k = static_cast<std::size_t>(std::upper_bound(s.cumulative.begin(), s.cumulative.end(), u) -
                                       s.cumulative.begin());
          k = std::min(k, s.destinations.size() - 1);
        }
        inject(s.node, s.destinations[k], cycle);
      }
    }
    while (next_script < scripted.size() && scripted[next_script].cycle == cycle) {
      inject(scripted[next_script].source, scripted[next_script].destination, cycle);
      ++next_script;
    }
    while (next_script < scripted.size() && scripted[next_script].cycle < cycle) ++next_script;

    // Arbitration.
    for (int a = 0; a < n_arb; ++a) {
      auto& arb = arbiters[static_cast<std::size_t>(a)];
      if (arb.pending == 0 || arb.busy_until > cycle) continue;
      auto* qs = &queues[static_cast<std::size_t>(a * inputs)];
      const int in = arbiter_grant(arb.state, std::span<const int>(arb.weights),
                                   [&](int i) { return !qs[i].fifo.empty(); });
      auto& q = qs[in];
      integrate(q, cycle);
      const std::uint32_t id = q.fifo.front();
      q.fifo.pop_front();
      --arb.pending;
      auto& pkt = pool[id];
      const int router = a / ports, out = a % ports;
      if (cycle >= warmup) {
        ++q.served;
        ++arb.departures;
        arb.busy_cycles += service;
        if (arb.has_last) {
          const double gap = static_cast<double>(cycle - arb.last_departure);
          ++arb.gap_count;
          arb.gap_sum += gap;
          arb.gap_sq_sum += gap * gap;
        }
        arb.has_last = true;
        arb.last_departure = cycle;
      }
      if (pkt.enqueued >= warmup) {
        ++q.waited;
        q.wait_sum += static_cast<double>(cycle - pkt.enqueued);
      }
      arb.busy_until = cycle + service;
      log(cycle, router, out, "grant");
      pkt.at = topo.neighbor(router, out);
      pkt.in_port = 1 + out;
      wheel[static_cast<std::size_t>((cycle + hop) % (hop + 1))].push_back(id);
    }
  }

  // Finalize.
  const std::uint64_t end = cfg.total_cycles;
  const double window = static_cast<double>(end - warmup);
  stats.measured_cycles = end - warmup;
  stats.arbiters.resize(static_cast<std::size_t>(n_arb));
  for (int a = 0; a < n_arb; ++a) {
    auto& out = stats.arbiters[static_cast<std::size_t>(a)];
    const auto& arb = arbiters[static_cast<std::size_t>(a)];
    out.router = a / ports;
    out.out_port = a % ports;
    out.departures = arb.departures;
    out.gap_count = arb.gap_count;
    out.gap_sum = arb.gap_sum;
    out.gap_sq_sum = arb.gap_sq_sum;
    out.busy_fraction = static_cast<double>(arb.busy_cycles) / window;
    out.inputs.resize(static_cast<std::size_t>(inputs));
    for (int in = 0; in < inputs; ++in) {
      auto& q = queues[static_cast<std::size_t>(a * inputs + in)];
      integrate(q, end);
      auto& qs = out.inputs[static_cast<std::size_t>(in)];
      qs.arrivals = q.arrivals;
      qs.served = q.served;
      qs.waited = q.waited;
      qs.mean_wait = q.waited ? q.wait_sum / static_cast<double>(q.waited) : 0.0;
      qs.mean_occupancy = q.area / window;
      qs.arrival_rate = static_cast<double>(q.arrivals) / window;
    }
  }
  for (int s = 0; s < n_nodes; ++s)
    for (int d = 0; d < n_nodes; ++d) {
      const auto f = static_cast<std::size_t>(s * n_nodes + d);
      if (flow_count[f] == 0) continue;
      stats.flows.push_back({s, d, flow_count[f], flow_sum[f] / static_cast<double>(flow_count[f])});
    }
  stats.average_latency =
      stats.measured_packets ? latency_sum / static_cast<double>(stats.measured_packets) : 0.0;
  return stats;
}

}  // namespace wrrnoc
