#pragma once

// Arrival-process descriptors and the GGeo (batch-Bernoulli) packet source.
//
// A GGeo source with mean rate `rate` and burst probability `p_burst` works
// per cycle: with probability rate * (1 - p_burst) a bulk starts, and every
// packet of the bulk is followed by one more same-cycle packet with
// probability p_burst. Inter-arrival gaps inside a bulk are zero cycles.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wrrnoc/errors.hpp"

namespace wrrnoc {

/// Rate (packets/cycle) and squared coefficient of variation of the
/// inter-arrival time.
struct ArrivalSpec {
  double rate = 0.0;
  double scv = 1.0;

  friend bool operator==(const ArrivalSpec&, const ArrivalSpec&) = default;
};

struct GGeoSpec {
  double rate = 0.0;
  double p_burst = 0.0;

  friend bool operator==(const GGeoSpec&, const GGeoSpec&) = default;
};

struct PacketTrace {
  std::vector<std::uint64_t> arrival_cycles;  // non-decreasing
};

inline void validate(const ArrivalSpec& a) {
  if (!(a.rate >= 0.0 && a.rate < 1.0))
    throw InvalidArgument("arrival rate must lie in [0, 1), got " + std::to_string(a.rate));
  if (!(a.scv >= 0.0) || !std::isfinite(a.scv))
    throw InvalidArgument("arrival scv must be finite and >= 0, got " + std::to_string(a.scv));
}

inline void validate(const GGeoSpec& g) {
  if (!(g.rate >= 0.0 && g.rate < 1.0))
    throw InvalidArgument("GGeo rate must lie in [0, 1), got " + std::to_string(g.rate));
  if (!(g.p_burst >= 0.0 && g.p_burst < 1.0))
    throw InvalidArgument("p_burst must lie in [0, 1), got " + std::to_string(g.p_burst));
}

/// Inter-arrival SCV of the GGeo source. A gap is zero with probability
/// p_burst and otherwise geometric on {1, 2, ...} with success probability
/// rate * (1 - p_burst), which gives 2 / (1 - p_burst) - rate - 1.
inline ArrivalSpec scv_from_burst(const GGeoSpec& g) {
  validate(g);
  return {g.rate, 2.0 / (1.0 - g.p_burst) - g.rate - 1.0};
}

/// Inverse of scv_from_burst at fixed rate. SCVs below the Bernoulli floor
/// (1 - rate) cannot be produced by the source and are rejected.
inline GGeoSpec burst_from_scv(const ArrivalSpec& a) {
  validate(a);
  const double floor = 1.0 - a.rate;
  if (a.scv < floor - 1e-12)
    throw InvalidArgument("scv " + std::to_string(a.scv) +
                          " is below the Bernoulli floor 1 - rate = " + std::to_string(floor));
  const double p = 1.0 - 2.0 / (a.scv + a.rate + 1.0);
  return {a.rate, p < 0.0 ? 0.0 : p};
}

/// Superposition approximated by the rate-weighted SCV average. With zero
/// total rate the SCV is the plain mean.
inline ArrivalSpec merge_arrivals(std::span<const ArrivalSpec> streams) {
  if (streams.empty()) throw InvalidArgument("merge_arrivals: empty stream list");
  double rate = 0.0;
  double weighted = 0.0;
  double plain = 0.0;
  for (const auto& s : streams) {
    rate += s.rate;
    weighted += s.rate * s.scv;
    plain += s.scv;
  }
  if (rate > 0.0) return {rate, weighted / rate};
  return {0.0, plain / static_cast<double>(streams.size())};
}

/// Independent random thinning: each packet is kept with probability
/// `fraction`.
inline ArrivalSpec split_arrivals(const ArrivalSpec& a, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw InvalidArgument("split fraction must lie in (0, 1]");
  return {a.rate * fraction, fraction * a.scv + 1.0 - fraction};
}

// -- random streams ---------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seeds one independent stream per (seed, stream id). mt19937_64 output is
/// fixed by the standard, so traces are identical across toolchains.
class RandomStream {
public:
  RandomStream(std::uint64_t seed, std::uint64_t stream)
      : engine_(splitmix64(seed ^ splitmix64(stream + 0x5851F42D4C957F2Dull))) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
  std::mt19937_64 engine_;
};

/// Per-cycle GGeo sampler.
class GGeoSource {
public:
  GGeoSource(const GGeoSpec& spec, std::uint64_t seed, std::uint64_t stream = 0)
      : spec_(spec), start_(spec.rate * (1.0 - spec.p_burst)), rng_(seed, stream) {
    validate(spec);
  }

  /// Number of packets released in the next cycle.
  unsigned next_cycle() {
    if (start_ <= 0.0) return 0;
    if (rng_.uniform() >= start_) return 0;
    unsigned n = 1;
    while (spec_.p_burst > 0.0 && rng_.uniform() < spec_.p_burst) ++n;
    return n;
  }

  RandomStream& rng() { return rng_; }
  const GGeoSpec& spec() const { return spec_; }

private:
  GGeoSpec spec_;
  double start_;
  RandomStream rng_;
};

inline PacketTrace sample_trace(const GGeoSpec& g, std::uint64_t cycles, std::uint64_t seed) {
  validate(g);
  if (cycles == 0) throw InvalidArgument("sample_trace: cycles must be positive");
  PacketTrace trace;
  trace.arrival_cycles.reserve(static_cast<std::size_t>(g.rate * static_cast<double>(cycles) * 1.1) + 16);
  GGeoSource source(g, seed);
  for (std::uint64_t c = 0; c < cycles; ++c)
    for (unsigned n = source.next_cycle(); n > 0; --n) trace.arrival_cycles.push_back(c);
  return trace;
}

/// Empirical rate over `cycles` and gap SCV (zero gaps included).
struct TraceMoments {
  double rate = 0.0;
  double gap_mean = 0.0;
  double gap_scv = 0.0;
  std::size_t gaps = 0;
};

inline TraceMoments trace_moments(const PacketTrace& t, std::uint64_t cycles) {
  TraceMoments m;
  const auto& a = t.arrival_cycles;
  if (cycles > 0) m.rate = static_cast<double>(a.size()) / static_cast<double>(cycles);
  if (a.size() < 2) return m;
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) {
    const double g = static_cast<double>(a[i] - a[i - 1]);
    s1 += g;
    s2 += g * g;
  }
  m.gaps = a.size() - 1;
  const double n = static_cast<double>(m.gaps);
  m.gap_mean = s1 / n;
  m.gap_scv = (s2 / n - m.gap_mean * m.gap_mean) / (m.gap_mean * m.gap_mean);
  return m;
}

}  // namespace wrrnoc
