#pragma once
// Single- and two-photon polarization optics behind the relay receivers:
// Jones vectors for the four signal states, the four-detector BB84 receiver,
// the exact Hong-Ou-Mandel two-photon distribution behind the Bell-state
// measurement, and the threshold-detector imperfection layer.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "qrelay/random.hpp"

namespace qrelay::optics {

using BitValue = std::uint8_t;  // 0 or 1

enum class Basis : std::uint8_t { Rectilinear, Diagonal };

// The four signal states: 0 deg, 90 deg, -45 deg, +45 deg.
enum class PolarizationState : std::uint8_t { H, V, DMinus, DPlus };

inline constexpr double inv_sqrt2 = 0.70710678118654752440;

struct Jones {
  std::complex<double> amp_h{0.0, 0.0};
  std::complex<double> amp_v{0.0, 0.0};

  double norm2() const { return std::norm(amp_h) + std::norm(amp_v); }
};

inline Jones jones_of(PolarizationState s) {
  switch (s) {
    case PolarizationState::H:
      return {1.0, 0.0};
    case PolarizationState::V:
      return {0.0, 1.0};
    case PolarizationState::DMinus:
      return {inv_sqrt2, -inv_sqrt2};
    case PolarizationState::DPlus:
      return {inv_sqrt2, inv_sqrt2};
  }
  throw std::logic_error("unreachable");
}

// Bit encoding shared by every party: rectilinear 0<->H, 1<->V;
// diagonal 0<->-45 deg, 1<->+45 deg.
inline PolarizationState encode(Basis basis, BitValue bit) {
  if (basis == Basis::Rectilinear) {
    return bit ? PolarizationState::V : PolarizationState::H;
  }
  return bit ? PolarizationState::DPlus : PolarizationState::DMinus;
}

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Physical polarization rotation by theta degrees:
// [cos, -sin; sin, cos] acting on (amp_h, amp_v).
inline Jones rotate(const Jones& s, double theta_deg) {
  const double t = deg_to_rad(theta_deg);
  const double c = std::cos(t);
  const double sn = std::sin(t);
  return {c * s.amp_h - sn * s.amp_v, sn * s.amp_h + c * s.amp_v};
}

// ---------------------------------------------------------------------------
// Detectors and detection patterns

// Port 1/2 of the interference splitter, H/V output of the port's PBS.
enum class DetectorId : std::uint8_t { H1 = 0, V1 = 1, H2 = 2, V2 = 3 };

inline constexpr std::array<DetectorId, 4> all_detectors = {
    DetectorId::H1, DetectorId::V1, DetectorId::H2, DetectorId::V2};

inline int port_of(DetectorId d) { return static_cast<int>(d) / 2 + 1; }
inline bool is_vertical(DetectorId d) { return static_cast<int>(d) % 2 == 1; }

inline std::string to_string(DetectorId d) {
  switch (d) {
    case DetectorId::H1: return "H1";
    case DetectorId::V1: return "V1";
    case DetectorId::H2: return "H2";
    case DetectorId::V2: return "V2";
  }
  return "?";
}

// Photon counts per detector in one time slot.
struct DetectionPattern {
  std::array<std::uint8_t, 4> counts{};

  static DetectionPattern none() { return {}; }
  static DetectionPattern single(DetectorId d) {
    DetectionPattern p;
    p.add(d);
    return p;
  }
  static DetectionPattern coincidence(DetectorId a, DetectorId b) {
    DetectionPattern p;
    p.add(a);
    p.add(b);
    return p;
  }

  void add(DetectorId d, std::uint8_t n = 1) { counts[static_cast<int>(d)] += n; }
  std::uint8_t count(DetectorId d) const { return counts[static_cast<int>(d)]; }
  int total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }

  // Canonical form: "H1+V2", "2xH1", "none"; detectors listed in H1,V1,H2,V2
  // order.
  std::string to_string() const {
    std::string out;
    for (DetectorId d : all_detectors) {
      const int n = count(d);
      if (n == 0) continue;
      if (!out.empty()) out += '+';
      if (n >= 2) out += std::to_string(n) + "x";
      out += optics::to_string(d);
    }
    return out.empty() ? "none" : out;
  }

  auto operator<=>(const DetectionPattern&) const = default;
};

enum class BsmOutcome : std::uint8_t { Singlet, Triplet, Failure };

inline std::string to_string(BsmOutcome o) {
  switch (o) {
    case BsmOutcome::Singlet: return "singlet";
    case BsmOutcome::Triplet: return "triplet";
    case BsmOutcome::Failure: return "failure";
  }
  return "?";
}

// A successful Bell-state measurement is a coincidence at two orthogonally
// polarized detectors: same port -> triplet, different ports -> singlet.
// Single clicks, empty slots, double clicks at one detector, and parallel
// coincidences (H1+H2, V1+V2) all fail.
inline BsmOutcome classify(const DetectionPattern& p) {
  if (p.total() != 2) return BsmOutcome::Failure;
  int first = -1, second = -1;
  for (int i = 0; i < 4; ++i) {
    if (p.counts[i] == 2) return BsmOutcome::Failure;
    if (p.counts[i] == 1) (first < 0 ? first : second) = i;
  }
  const auto a = static_cast<DetectorId>(first);
  const auto b = static_cast<DetectorId>(second);
  if (is_vertical(a) == is_vertical(b)) return BsmOutcome::Failure;
  return port_of(a) == port_of(b) ? BsmOutcome::Triplet : BsmOutcome::Singlet;
}

// ---------------------------------------------------------------------------
// Two-photon interference at the BSM receiver

using TwoPhotonDistribution = std::map<DetectionPattern, double>;

inline double prob_of(const TwoPhotonDistribution& dist, const DetectionPattern& p) {
  auto it = dist.find(p);
  return it == dist.end() ? 0.0 : it->second;
}

inline double probability_sum(const TwoPhotonDistribution& dist) {
  double s = 0.0;
  for (const auto& [pattern, p] : dist) s += p;
  return s;
}

namespace detail {

// Mode amplitudes over (H1, V1, H2, V2) after the 50:50 splitter for a photon
// entering port 1 (input a) or port 2 (input b). Convention:
// a -> (c + s*d)/sqrt2, b -> (c - s*d)/sqrt2 per polarization component, with
// s = +1 in production; any sign choice yields the same probabilities.
inline std::array<std::complex<double>, 4> splitter_modes_port1(const Jones& a, double s) {
  return {a.amp_h * inv_sqrt2, a.amp_v * inv_sqrt2,
          s * a.amp_h * inv_sqrt2, s * a.amp_v * inv_sqrt2};
}
inline std::array<std::complex<double>, 4> splitter_modes_port2(const Jones& b, double s) {
  return {b.amp_h * inv_sqrt2, b.amp_v * inv_sqrt2,
          -s * b.amp_h * inv_sqrt2, -s * b.amp_v * inv_sqrt2};
}

inline DetectionPattern pattern_for(int i, int j) {
  DetectionPattern p;
  p.add(static_cast<DetectorId>(i));
  p.add(static_cast<DetectorId>(j));
  return p;
}

// Exact bosonic outcome distribution. Amplitude for two distinct modes i,j is
// u_i w_j + u_j w_i; a doubly occupied mode carries the sqrt2 enhancement.
inline TwoPhotonDistribution bsm_distribution_signed(const Jones& a, const Jones& b,
                                                     double visibility, double sign) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) {
    throw std::invalid_argument("visibility must lie in [0, 1]");
  }
  const auto u = splitter_modes_port1(a, sign);
  const auto w = splitter_modes_port2(b, sign);

  TwoPhotonDistribution dist;
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) {
      double p_interf;
      if (i == j) {
        p_interf = std::norm(std::numbers::sqrt2 * u[i] * w[i]);
      } else {
        p_interf = std::norm(u[i] * w[j] + u[j] * w[i]);
      }
      // Fully distinguishable photons route independently.
      double p_classical;
      if (i == j) {
        p_classical = std::norm(u[i]) * std::norm(w[i]);
      } else {
        p_classical = std::norm(u[i]) * std::norm(w[j]) + std::norm(u[j]) * std::norm(w[i]);
      }
      const double p = visibility * p_interf + (1.0 - visibility) * p_classical;
      if (p > 0.0) dist[pattern_for(i, j)] = p;
    }
  }
  return dist;
}

}  // namespace detail

inline TwoPhotonDistribution bsm_distribution(const Jones& a, const Jones& b,
                                              double visibility = 1.0) {
  return detail::bsm_distribution_signed(a, b, visibility, +1.0);
}

inline TwoPhotonDistribution bsm_distribution(PolarizationState a, PolarizationState b,
                                              double visibility = 1.0) {
  return bsm_distribution(jones_of(a), jones_of(b), visibility);
}

inline DetectionPattern sample_pattern(const TwoPhotonDistribution& dist, RandomStream& rng) {
  if (dist.empty()) throw std::invalid_argument("cannot sample an empty distribution");
  const double u = rng.uniform01() * probability_sum(dist);
  double cum = 0.0;
  for (const auto& [pattern, p] : dist) {
    cum += p;
    if (u < cum) return pattern;
  }
  return dist.rbegin()->first;
}

// A lone photon at the BSM receiver: port is a fair coin, polarization is
// projected at that port's PBS. No interference partner, so classical routing
// is exact.
inline DetectionPattern route_single_photon(const Jones& s, RandomStream& rng) {
  const int port = rng.coin() ? 2 : 1;
  const double p_v = std::norm(s.amp_v) / s.norm2();
  const bool vertical = rng.bernoulli(p_v);
  const int idx = (port - 1) * 2 + (vertical ? 1 : 0);
  return DetectionPattern::single(static_cast<DetectorId>(idx));
}

// ---------------------------------------------------------------------------
// Imperfect detectors

struct DetectorModel {
  double efficiency = 1.0;       // per-photon detection probability
  double dark_count_prob = 0.0;  // per detector per gate
};

// Threshold semantics: each photon survives with probability eta, every
// detector can additionally dark-click, and any occupancy collapses to a
// single click.
inline DetectionPattern observe(const DetectionPattern& ideal, const DetectorModel& det,
                                RandomStream& rng) {
  DetectionPattern out;
  for (DetectorId d : all_detectors) {
    bool hit = false;
    for (int k = 0; k < ideal.count(d); ++k) {
      if (rng.bernoulli(det.efficiency)) hit = true;
    }
    if (rng.bernoulli(det.dark_count_prob)) hit = true;
    if (hit) out.add(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// BB84 receiver: 50:50 splitter chooses the basis, the rectilinear branch
// projects at a PBS directly, the diagonal branch rotates by -45 deg first
// (so +45 deg light exits at the branch's H detector).

struct Bb84Reading {
  Basis basis;
  BitValue bit;
};

namespace detail {

// P(bit = 1) for a projection of s in the given basis.
inline double bit_one_probability(const Jones& s, Basis basis) {
  const Jones t = basis == Basis::Diagonal ? rotate(s, -45.0) : s;
  const double p1 = basis == Basis::Diagonal ? std::norm(t.amp_h) : std::norm(t.amp_v);
  return p1 / t.norm2();
}

// Receiver detectors in fixed order: (rect,0), (rect,1), (diag,0), (diag,1).
inline Basis receiver_basis(int idx) { return idx < 2 ? Basis::Rectilinear : Basis::Diagonal; }
inline BitValue receiver_bit(int idx) { return static_cast<BitValue>(idx % 2); }
inline int receiver_index(Basis basis, BitValue bit) {
  return (basis == Basis::Diagonal ? 2 : 0) + bit;
}

}  // namespace detail

struct Bb84Gate {
  Basis basis;                   // branch taken (or lone dark detector's branch)
  std::optional<BitValue> bit;   // present iff the gate produced a valid click
};

// One receiver gate. The photon may be absent (lost upstream); dark counts
// fire on all four detectors every gate, and a gate with anything other than
// exactly one click is invalid.
inline Bb84Gate bb84_gate(const std::optional<Jones>& photon, std::optional<Basis> forced_basis,
                          const DetectorModel& det, RandomStream& rng) {
  Basis chosen = forced_basis ? *forced_basis
                              : (rng.coin() ? Basis::Diagonal : Basis::Rectilinear);
  int photon_click = -1;
  if (photon) {
    const BitValue bit = rng.bernoulli(detail::bit_one_probability(*photon, chosen)) ? 1 : 0;
    if (rng.bernoulli(det.efficiency)) photon_click = detail::receiver_index(chosen, bit);
  }
  int clicks = 0;
  int lone = -1;
  for (int i = 0; i < 4; ++i) {
    const bool dark = rng.bernoulli(det.dark_count_prob);
    if (i == photon_click || dark) {
      ++clicks;
      lone = i;
    }
  }
  if (clicks == 1) {
    return {detail::receiver_basis(lone), detail::receiver_bit(lone)};
  }
  return {chosen, std::nullopt};
}

inline std::optional<Bb84Reading> bb84_measure(const Jones& s, RandomStream& rng,
                                               const DetectorModel& det) {
  const Bb84Gate g = bb84_gate(s, std::nullopt, det, rng);
  if (!g.bit) return std::nullopt;
  return Bb84Reading{g.basis, *g.bit};
}

inline std::optional<Bb84Reading> bb84_measure_in_basis(const Jones& s, Basis basis,
                                                        RandomStream& rng,
                                                        const DetectorModel& det) {
  const Bb84Gate g = bb84_gate(s, basis, det, rng);
  if (!g.bit) return std::nullopt;
  return Bb84Reading{g.basis, *g.bit};
}

// ---------------------------------------------------------------------------
// Names used in reports and tables

inline std::string to_string(Basis b) {
  return b == Basis::Rectilinear ? "rectilinear" : "diagonal";
}

inline std::string to_string(PolarizationState s) {
  switch (s) {
    case PolarizationState::H: return "H";
    case PolarizationState::V: return "V";
    case PolarizationState::DMinus: return "D-";
    case PolarizationState::DPlus: return "D+";
  }
  return "?";
}

inline constexpr std::array<PolarizationState, 4> all_states = {
    PolarizationState::H, PolarizationState::V, PolarizationState::DMinus,
    PolarizationState::DPlus};

}  // namespace qrelay::optics
