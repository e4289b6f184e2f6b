#pragma once

// Ring and 2D-mesh topologies with deterministic minimal routing.
//
// Every router has `port_count()` network output ports, each with its own WRR
// arbiter. Arbiter inputs are numbered 0 for the local injection port and
// 1 + d for packets that arrived over a link while travelling in direction d.
// Ejection at the destination is not an arbitration stage.
//
// Mesh node ids are y * cols + x; routing is X first, then Y. Ring routing
// takes the shorter direction and breaks ties clockwise (increasing id).

#include <cstdlib>
#include <string>
#include <vector>

#include "wrrnoc/errors.hpp"

namespace wrrnoc {

enum class TopologyKind { Ring, Mesh };

namespace port {
// Ring directions.
inline constexpr int kClockwise = 0;
inline constexpr int kCounterClockwise = 1;
// Mesh directions.
inline constexpr int kXPlus = 0;
inline constexpr int kXMinus = 1;
inline constexpr int kYPlus = 2;
inline constexpr int kYMinus = 3;

inline constexpr int kLocalInput = 0;
}  // namespace port

enum class StageRole { Source, Ring };

struct Stage {
  int router = 0;
  int out_port = 0;
  int in_port = port::kLocalInput;
  StageRole role = StageRole::Source;

  friend bool operator==(const Stage&, const Stage&) = default;
};

using StageSequence = std::vector<Stage>;

class Topology {
public:
  Topology() : Topology(TopologyKind::Ring, 1, 2) {}

  static Topology ring(int nodes) {
    if (nodes < 2) throw InvalidArgument("ring needs at least 2 nodes");
    return Topology(TopologyKind::Ring, 1, nodes);
  }

  static Topology mesh(int rows, int cols) {
    if (rows < 1 || cols < 1) throw InvalidArgument("mesh dimensions must be >= 1");
    if (rows * cols < 2) throw InvalidArgument("mesh needs at least 2 nodes");
    return Topology(TopologyKind::Mesh, rows, cols);
  }

  TopologyKind kind() const { return kind_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int node_count() const { return rows_ * cols_; }
  int port_count() const { return kind_ == TopologyKind::Ring ? 2 : 4; }
  int input_count() const { return port_count() + 1; }
  int arbiter_count() const { return node_count() * port_count(); }
  int arbiter_id(int router, int out_port) const { return router * port_count() + out_port; }

  int x_of(int node) const { return node % cols_; }
  int y_of(int node) const { return node / cols_; }
  int node_at(int x, int y) const { return y * cols_ + x; }

  bool valid_node(int node) const { return node >= 0 && node < node_count(); }

  static int reverse(int out_port) { return out_port ^ 1; }

  /// Neighbour reached through `out_port`, or -1 at a mesh edge.
  int neighbor(int node, int out_port) const {
    if (kind_ == TopologyKind::Ring) {
      const int k = cols_;
      return out_port == port::kClockwise ? (node + 1) % k : (node + k - 1) % k;
    }
    const int x = x_of(node), y = y_of(node);
    switch (out_port) {
      case port::kXPlus: return x + 1 < cols_ ? node + 1 : -1;
      case port::kXMinus: return x > 0 ? node - 1 : -1;
      case port::kYPlus: return y + 1 < rows_ ? node + cols_ : -1;
      case port::kYMinus: return y > 0 ? node - cols_ : -1;
      default: return -1;
    }
  }

  /// Output port taken at `node` towards `dst`; -1 when node == dst.
  int next_port(int node, int dst) const {
    if (node == dst) return -1;
    if (kind_ == TopologyKind::Ring) {
      const int k = cols_;
      const int cw = ((dst - node) % k + k) % k;
      return cw <= k - cw ? port::kClockwise : port::kCounterClockwise;
    }
    const int dx = x_of(dst) - x_of(node);
    if (dx > 0) return port::kXPlus;
    if (dx < 0) return port::kXMinus;
    return y_of(dst) > y_of(node) ? port::kYPlus : port::kYMinus;
  }

  /// Number of links on the route.
  int hop_count(int src, int dst) const {
    if (kind_ == TopologyKind::Ring) {
      const int k = cols_;
      const int cw = ((dst - src) % k + k) % k;
      return cw <= k - cw ? cw : k - cw;
    }
    return std::abs(x_of(dst) - x_of(src)) + std::abs(y_of(dst) - y_of(src));
  }

  std::string name() const {
    if (kind_ == TopologyKind::Ring) return "ring" + std::to_string(cols_);
    return "mesh" + std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  friend bool operator==(const Topology&, const Topology&) = default;

private:
  Topology(TopologyKind kind, int rows, int cols) : kind_(kind), rows_(rows), cols_(cols) {}

  TopologyKind kind_;
  int rows_;
  int cols_;
};

/// Calls `fn(const Stage&)` for every arbitration stage from src to dst.
template <class Fn>
void for_each_stage(const Topology& topo, int src, int dst, Fn&& fn) {
  int node = src;
  int in = port::kLocalInput;
  while (node != dst) {
    const int out = topo.next_port(node, dst);
    fn(Stage{node, out, in, in == port::kLocalInput ? StageRole::Source : StageRole::Ring});
    in = 1 + out;
    node = topo.neighbor(node, out);
  }
}

inline StageSequence route(const Topology& topo, int src, int dst) {
  if (!topo.valid_node(src) || !topo.valid_node(dst))
    throw InvalidArgument("route: node id out of range (" + std::to_string(src) + " -> " +
                          std::to_string(dst) + ")");
  StageSequence stages;
  stages.reserve(static_cast<std::size_t>(topo.hop_count(src, dst)));
  for_each_stage(topo, src, dst, [&](const Stage& s) { stages.push_back(s); });
  return stages;
}

}  // namespace wrrnoc
