#pragma once

// Scenario files: JSON documents with top-level keys `topology`, `router`,
// `traffic`, `sweep`, `sim`, `output` (plus optional `id` and `model`).
// See docs/scenario.schema.json.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wrrnoc/arbiter_analysis.hpp"
#include "wrrnoc/errors.hpp"
#include "wrrnoc/network.hpp"
#include "wrrnoc/topology.hpp"
#include "wrrnoc/traffic.hpp"

namespace wrrnoc {

enum class TrafficPattern { UniformLlcHit, LlcMissHotspot, FlowList };

inline const char* to_string(TrafficPattern p) {
  switch (p) {
    case TrafficPattern::UniformLlcHit: return "uniform-llc-hit";
    case TrafficPattern::LlcMissHotspot: return "llc-miss-hotspot";
    case TrafficPattern::FlowList: return "flows";
  }
  return "?";
}

struct ExplicitFlow {
  int source = 0;
  int destination = 0;
  double rate = 0.0;  // multiplied by the sweep value
  double p_burst = 0.0;

  friend bool operator==(const ExplicitFlow&, const ExplicitFlow&) = default;
};

struct WeightPair {
  int ring = 1;
  int src = 1;

  friend bool operator==(const WeightPair&, const WeightPair&) = default;
};

struct Scenario {
  std::string id = "scenario";
  Topology topology;
  RouterConfig router;
  ArbitrationMode mode = ArbitrationMode::Weighted;
  double tolerance = 0.01;

  TrafficPattern pattern = TrafficPattern::UniformLlcHit;
  double p_burst = 0.0;
  int memory_controllers = 0;  // 0: 1 on a ring, 2 on a mesh
  std::vector<ExplicitFlow> flows;

  std::vector<double> lambdas;
  std::vector<double> burst_sweep;      // `sweep` subcommand only
  std::vector<WeightPair> weight_sweep;  // `sweep` subcommand only

  std::uint64_t total_cycles = 200000;
  std::uint64_t warmup_cycles = 20000;
  std::uint64_t seed = 1;

  std::string output_path;
  std::string output_format = "csv";

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Memory-controller nodes of the hotspot pattern. Ring: node 0 (and the
/// antipode for two). Mesh: midpoint of the left edge, then midpoint of the
/// right edge, point-symmetric to the first.
inline std::vector<int> memory_controller_nodes(const Topology& topo, int count) {
  if (count == 0) count = topo.kind() == TopologyKind::Ring ? 1 : 2;
  if (count < 1 || count > 2) throw InvalidArgument("memory_controllers must be 1 or 2");
  std::vector<int> mc;
  if (topo.kind() == TopologyKind::Ring) {
    mc.push_back(0);
    if (count == 2) mc.push_back(topo.node_count() / 2);
  } else {
    mc.push_back(topo.node_at(0, topo.rows() / 2));
    if (count == 2) mc.push_back(topo.node_at(topo.cols() - 1, (topo.rows() - 1) / 2));
  }
  if (mc.size() == 2 && mc[0] == mc[1])
    throw InvalidArgument("topology too small for two distinct memory controllers");
  return mc;
}

/// Network for one sweep point. `lambda` is the injection rate per source
/// (a rate multiplier for explicit flow lists).
inline NetworkSpec make_network(const Scenario& sc, double lambda, double p_burst,
                                WeightPair weights) {
  NetworkSpec net;
  net.topology = sc.topology;
  net.router = sc.router;
  net.router.weight_ring = weights.ring;
  net.router.weight_src = weights.src;
  net.mode = sc.mode;
  net.solver.tolerance = sc.tolerance;

  const int n = sc.topology.node_count();
  switch (sc.pattern) {
    case TrafficPattern::UniformLlcHit:
      for (int s = 0; s < n; ++s) {
        TrafficSource src{s, {lambda, p_burst}, {}, {}};
        for (int d = 0; d < n; ++d)
          if (d != s) {
            src.destinations.push_back(d);
            src.probabilities.push_back(1.0 / (n - 1));
          }
        net.sources.push_back(std::move(src));
      }
      break;
    case TrafficPattern::LlcMissHotspot: {
      const auto mc = memory_controller_nodes(sc.topology, sc.memory_controllers);
      for (int s = 0; s < n; ++s) {
        if (std::find(mc.begin(), mc.end(), s) != mc.end()) continue;
        TrafficSource src{s, {lambda, p_burst}, mc, {}};
        src.probabilities.assign(mc.size(), 1.0 / static_cast<double>(mc.size()));
        net.sources.push_back(std::move(src));
      }
      break;
    }
    case TrafficPattern::FlowList:
      for (const auto& f : sc.flows)
        net.sources.push_back({f.source, {f.rate * lambda, f.p_burst}, {f.destination}, {1.0}});
      break;
  }
  net.flows = flows_from_sources(net.sources);
  return net;
}

inline NetworkSpec make_network(const Scenario& sc, double lambda) {
  return make_network(sc, lambda, sc.p_burst, {sc.router.weight_ring, sc.router.weight_src});
}

// -- JSON ---------------------------------------------------------------------

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& path,
                           std::initializer_list<const char*> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ScenarioError(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }
}

inline const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ScenarioError(path, "expected an object");
  return j;
}

inline double get_number(const json& obj, const char* key, const std::string& path, double dflt,
                         bool required = false) {
  const std::string field = path.empty() ? key : path + "." + key;
  if (!obj.contains(key)) {
    if (required) throw ScenarioError(field, "missing required field");
    return dflt;
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ScenarioError(field, "expected a number");
  return v.get<double>();
}

inline long long get_integer(const json& obj, const char* key, const std::string& path,
                             long long dflt, bool required = false) {
  const std::string field = path.empty() ? key : path + "." + key;
  if (!obj.contains(key)) {
    if (required) throw ScenarioError(field, "missing required field");
    return dflt;
  }
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw ScenarioError(field, "expected an integer");
  return v.get<long long>();
}

inline std::string get_string(const json& obj, const char* key, const std::string& path,
                              const std::string& dflt) {
  const std::string field = path.empty() ? key : path + "." + key;
  if (!obj.contains(key)) return dflt;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ScenarioError(field, "expected a string");
  return v.get<std::string>();
}

inline void check(bool ok, const std::string& field, const std::string& msg) {
  if (!ok) throw ScenarioError(field, msg);
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& doc) {
  using detail::check;
  using detail::get_integer;
  using detail::get_number;
  using detail::get_string;
  detail::require_object(doc, "");
  detail::reject_unknown(doc, "", {"id", "topology", "router", "traffic", "sweep", "sim", "output", "model"});

  Scenario sc;
  sc.id = get_string(doc, "id", "", sc.id);
  check(!sc.id.empty(), "id", "must not be empty");

  // topology
  check(doc.contains("topology"), "topology", "missing required field");
  {
    const auto& t = detail::require_object(doc.at("topology"), "topology");
    detail::reject_unknown(t, "topology", {"kind", "nodes", "rows", "cols"});
    const std::string kind = get_string(t, "kind", "topology", "");
    if (kind == "ring") {
      const auto k = get_integer(t, "nodes", "topology", 0, true);
      check(k >= 2, "topology.nodes", "ring needs at least 2 nodes");
      sc.topology = Topology::ring(static_cast<int>(k));
    } else if (kind == "mesh") {
      const auto r = get_integer(t, "rows", "topology", 0, true);
      const auto c = get_integer(t, "cols", "topology", 0, true);
      check(r >= 1, "topology.rows", "must be >= 1");
      check(c >= 1, "topology.cols", "must be >= 1");
      check(r * c >= 2, "topology", "mesh needs at least 2 nodes");
      sc.topology = Topology::mesh(static_cast<int>(r), static_cast<int>(c));
    } else {
      throw ScenarioError("topology.kind", "expected \"ring\" or \"mesh\", got \"" + kind + "\"");
    }
  }
  const int nodes = sc.topology.node_count();

  // router
  if (doc.contains("router")) {
    const auto& r = detail::require_object(doc.at("router"), "router");
    detail::reject_unknown(r, "router", {"service_mean", "service_scv", "weight_ring", "weight_src",
                                         "pipeline_depth", "link_latency", "overrides"});
    auto& rc = sc.router;
    rc.service_mean = get_number(r, "service_mean", "router", rc.service_mean);
    check(rc.service_mean > 0.0 && std::isfinite(rc.service_mean), "router.service_mean", "must be positive");
    rc.service_scv = get_number(r, "service_scv", "router", rc.service_scv);
    check(rc.service_scv >= 0.0, "router.service_scv", "must be >= 0");
    rc.weight_ring = static_cast<int>(get_integer(r, "weight_ring", "router", rc.weight_ring));
    check(rc.weight_ring >= 1, "router.weight_ring", "must be >= 1");
    rc.weight_src = static_cast<int>(get_integer(r, "weight_src", "router", rc.weight_src));
    check(rc.weight_src >= 1, "router.weight_src", "must be >= 1");
    rc.pipeline_depth = static_cast<int>(get_integer(r, "pipeline_depth", "router", rc.pipeline_depth));
    check(rc.pipeline_depth >= 0, "router.pipeline_depth", "must be >= 0");
    rc.link_latency = static_cast<int>(get_integer(r, "link_latency", "router", rc.link_latency));
    check(rc.link_latency >= 0, "router.link_latency", "must be >= 0");
    if (r.contains("overrides")) {
      const auto& arr = r.at("overrides");
      check(arr.is_array(), "router.overrides", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = "router.overrides[" + std::to_string(i) + "]";
        const auto& o = detail::require_object(arr[i], p);
        detail::reject_unknown(o, p, {"router", "port", "input", "weight"});
        WeightOverride w;
        w.router = static_cast<int>(get_integer(o, "router", p, 0, true));
        w.out_port = static_cast<int>(get_integer(o, "port", p, 0, true));
        w.in_port = static_cast<int>(get_integer(o, "input", p, 0, true));
        w.weight = static_cast<int>(get_integer(o, "weight", p, 0, true));
        check(w.router >= 0 && w.router < nodes, p + ".router", "out of range");
        check(w.out_port >= 0 && w.out_port < sc.topology.port_count(), p + ".port", "out of range");
        check(w.in_port >= 0 && w.in_port < sc.topology.input_count(), p + ".input", "out of range");
        check(w.weight >= 1, p + ".weight", "must be >= 1");
        rc.overrides.push_back(w);
      }
    }
  }

  if (doc.contains("model")) {
    const auto& m = detail::require_object(doc.at("model"), "model");
    detail::reject_unknown(m, "model", {"arbitration", "tolerance"});
    const std::string arb = get_string(m, "arbitration", "model", "wrr");
    if (arb == "wrr") sc.mode = ArbitrationMode::Weighted;
    else if (arb == "rr") sc.mode = ArbitrationMode::RoundRobin;
    else throw ScenarioError("model.arbitration", "expected \"wrr\" or \"rr\"");
    sc.tolerance = get_number(m, "tolerance", "model", sc.tolerance);
    check(sc.tolerance > 0.0, "model.tolerance", "must be positive");
  }

  // traffic
  if (doc.contains("traffic")) {
    const auto& t = detail::require_object(doc.at("traffic"), "traffic");
    detail::reject_unknown(t, "traffic", {"pattern", "p_burst", "memory_controllers", "flows"});
    const std::string pat = get_string(t, "pattern", "traffic", "uniform-llc-hit");
    if (pat == "uniform-llc-hit") sc.pattern = TrafficPattern::UniformLlcHit;
    else if (pat == "llc-miss-hotspot") sc.pattern = TrafficPattern::LlcMissHotspot;
    else if (pat == "flows") sc.pattern = TrafficPattern::FlowList;
    else throw ScenarioError("traffic.pattern", "unknown pattern \"" + pat + "\"");
    sc.p_burst = get_number(t, "p_burst", "traffic", 0.0);
    check(sc.p_burst >= 0.0 && sc.p_burst < 1.0, "traffic.p_burst", "must lie in [0, 1)");
    sc.memory_controllers = static_cast<int>(get_integer(t, "memory_controllers", "traffic", 0));
    check(sc.memory_controllers >= 0 && sc.memory_controllers <= 2, "traffic.memory_controllers",
          "must be 1 or 2");
    if (t.contains("flows")) {
      const auto& arr = t.at("flows");
      check(arr.is_array(), "traffic.flows", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = "traffic.flows[" + std::to_string(i) + "]";
        const auto& o = detail::require_object(arr[i], p);
        detail::reject_unknown(o, p, {"source", "destination", "rate", "p_burst"});
        ExplicitFlow f;
        f.source = static_cast<int>(get_integer(o, "source", p, 0, true));
        f.destination = static_cast<int>(get_integer(o, "destination", p, 0, true));
        f.rate = get_number(o, "rate", p, 0.0, true);
        f.p_burst = get_number(o, "p_burst", p, sc.p_burst);
        check(f.source >= 0 && f.source < nodes, p + ".source", "out of range");
        check(f.destination >= 0 && f.destination < nodes, p + ".destination", "out of range");
        check(f.source != f.destination, p, "source equals destination");
        check(f.rate > 0.0 && f.rate < 1.0, p + ".rate", "must lie in (0, 1)");
        check(f.p_burst >= 0.0 && f.p_burst < 1.0, p + ".p_burst", "must lie in [0, 1)");
        sc.flows.push_back(f);
      }
    }
    if (sc.pattern == TrafficPattern::FlowList)
      check(!sc.flows.empty(), "traffic.flows", "pattern \"flows\" needs a non-empty flow list");
    if (sc.pattern == TrafficPattern::LlcMissHotspot) {
      try {
        (void)memory_controller_nodes(sc.topology, sc.memory_controllers);
      } catch (const InvalidArgument& e) {
        throw ScenarioError("traffic.memory_controllers", e.what());
      }
    }
  }

  // sweep
  check(doc.contains("sweep"), "sweep", "missing required field");
  {
    const auto& s = detail::require_object(doc.at("sweep"), "sweep");
    detail::reject_unknown(s, "sweep", {"lambda", "p_burst", "weights"});
    check(s.contains("lambda"), "sweep.lambda", "missing required field");
    const auto& arr = s.at("lambda");
    check(arr.is_array() && !arr.empty(), "sweep.lambda", "expected a non-empty array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = "sweep.lambda[" + std::to_string(i) + "]";
      check(arr[i].is_number(), p, "expected a number");
      const double v = arr[i].get<double>();
      check(v > 0.0, p, "must be positive");
      if (sc.pattern != TrafficPattern::FlowList) check(v < 1.0, p, "must be below 1");
      if (!sc.lambdas.empty()) check(v > sc.lambdas.back(), p, "sweep values must be increasing");
      sc.lambdas.push_back(v);
    }
    if (s.contains("p_burst")) {
      const auto& pb = s.at("p_burst");
      check(pb.is_array(), "sweep.p_burst", "expected an array");
      for (std::size_t i = 0; i < pb.size(); ++i) {
        const std::string p = "sweep.p_burst[" + std::to_string(i) + "]";
        check(pb[i].is_number(), p, "expected a number");
        const double v = pb[i].get<double>();
        check(v >= 0.0 && v < 1.0, p, "must lie in [0, 1)");
        sc.burst_sweep.push_back(v);
      }
    }
    if (s.contains("weights")) {
      const auto& ws = s.at("weights");
      check(ws.is_array(), "sweep.weights", "expected an array");
      for (std::size_t i = 0; i < ws.size(); ++i) {
        const std::string p = "sweep.weights[" + std::to_string(i) + "]";
        check(ws[i].is_array() && ws[i].size() == 2 && ws[i][0].is_number_integer() &&
                  ws[i][1].is_number_integer(),
              p, "expected [weight_ring, weight_src]");
        WeightPair w{ws[i][0].get<int>(), ws[i][1].get<int>()};
        check(w.ring >= 1 && w.src >= 1, p, "weights must be >= 1");
        sc.weight_sweep.push_back(w);
      }
    }
  }

  // sim
  if (doc.contains("sim")) {
    const auto& s = detail::require_object(doc.at("sim"), "sim");
    detail::reject_unknown(s, "sim", {"total_cycles", "warmup_cycles", "seed"});
    const auto total = get_integer(s, "total_cycles", "sim", static_cast<long long>(sc.total_cycles));
    const auto warm = get_integer(s, "warmup_cycles", "sim", static_cast<long long>(sc.warmup_cycles));
    const auto seed = get_integer(s, "seed", "sim", static_cast<long long>(sc.seed));
    check(total > 0, "sim.total_cycles", "must be positive");
    check(warm >= 0, "sim.warmup_cycles", "must be >= 0");
    check(warm < total, "sim.warmup_cycles", "must be below total_cycles");
    check(seed >= 0, "sim.seed", "must be >= 0");
    sc.total_cycles = static_cast<std::uint64_t>(total);
    sc.warmup_cycles = static_cast<std::uint64_t>(warm);
    sc.seed = static_cast<std::uint64_t>(seed);
  }

  // output
  if (doc.contains("output")) {
    const auto& o = detail::require_object(doc.at("output"), "output");
    detail::reject_unknown(o, "output", {"path", "format"});
    sc.output_path = get_string(o, "path", "output", "");
    sc.output_format = get_string(o, "format", "output", "csv");
    check(sc.output_format == "csv" || sc.output_format == "json", "output.format",
          "expected \"csv\" or \"json\"");
  }
  return sc;
}

inline nlohmann::json scenario_to_json(const Scenario& sc) {
  using json = nlohmann::json;
  json doc;
  doc["id"] = sc.id;
  if (sc.topology.kind() == TopologyKind::Ring)
    doc["topology"] = {{"kind", "ring"}, {"nodes", sc.topology.node_count()}};
  else
    doc["topology"] = {{"kind", "mesh"}, {"rows", sc.topology.rows()}, {"cols", sc.topology.cols()}};
  const auto& r = sc.router;
  doc["router"] = {{"service_mean", r.service_mean}, {"service_scv", r.service_scv},
                   {"weight_ring", r.weight_ring},   {"weight_src", r.weight_src},
                   {"pipeline_depth", r.pipeline_depth}, {"link_latency", r.link_latency}};
  if (!r.overrides.empty()) {
    json arr = json::array();
    for (const auto& o : r.overrides)
      arr.push_back({{"router", o.router}, {"port", o.out_port}, {"input", o.in_port}, {"weight", o.weight}});
    doc["router"]["overrides"] = arr;
  }
  doc["model"] = {{"arbitration", sc.mode == ArbitrationMode::Weighted ? "wrr" : "rr"},
                  {"tolerance", sc.tolerance}};
  json traffic = {{"pattern", to_string(sc.pattern)}, {"p_burst", sc.p_burst}};
  if (sc.memory_controllers != 0) traffic["memory_controllers"] = sc.memory_controllers;
  if (!sc.flows.empty()) {
    json arr = json::array();
    for (const auto& f : sc.flows)
      arr.push_back({{"source", f.source}, {"destination", f.destination}, {"rate", f.rate}, {"p_burst", f.p_burst}});
    traffic["flows"] = arr;
  }
  doc["traffic"] = traffic;
  json sweep = {{"lambda", sc.lambdas}};
  if (!sc.burst_sweep.empty()) sweep["p_burst"] = sc.burst_sweep;
  if (!sc.weight_sweep.empty()) {
    json arr = json::array();
    for (const auto& w : sc.weight_sweep) arr.push_back({w.ring, w.src});
    sweep["weights"] = arr;
  }
  doc["sweep"] = sweep;
  doc["sim"] = {{"total_cycles", sc.total_cycles}, {"warmup_cycles", sc.warmup_cycles}, {"seed", sc.seed}};
  json out = {{"format", sc.output_format}};
  if (!sc.output_path.empty()) out["path"] = sc.output_path;
  doc["output"] = out;
  return doc;
}

inline Scenario parse_scenario(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError("", std::string("malformed JSON: ") + e.what());
  }
  return scenario_from_json(doc);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("", "cannot read scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace wrrnoc
