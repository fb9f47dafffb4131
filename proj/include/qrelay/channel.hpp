#pragma once
// Fiber channels, photon sources, and the optional intercept-resend
// eavesdropper on a BB84 link.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "qrelay/optics.hpp"
#include "qrelay/random.hpp"

namespace qrelay::net {

using optics::Basis;
using optics::Jones;

// Intercept-resend: measure in a random basis, re-prepare, forward without
// added loss.
struct EveConfig {
  bool intercept_resend = true;
};

struct ChannelModel {
  double length_km = 0.0;
  double attenuation_db_per_km = 0.2;
  double misalignment_deg = 0.0;
  std::optional<EveConfig> eve;

  double transmittance() const {
    return std::pow(10.0, -attenuation_db_per_km * length_km / 10.0);
  }
};

namespace detail {

inline Jones apply_eve(const Jones& s, RandomStream& rng) {
  const Basis basis = rng.coin() ? Basis::Diagonal : Basis::Rectilinear;
  const double p1 = optics::detail::bit_one_probability(s, basis);
  const optics::BitValue bit = rng.bernoulli(p1) ? 1 : 0;
  return optics::jones_of(optics::encode(basis, bit));
}

// Misalignment rotation plus the eavesdropper; no loss.
inline Jones transform(const Jones& s, const ChannelModel& ch, RandomStream& rng) {
  Jones out = ch.misalignment_deg != 0.0 ? optics::rotate(s, ch.misalignment_deg) : s;
  if (ch.eve && ch.eve->intercept_resend) out = apply_eve(out, rng);
  return out;
}

// A k-photon pulse registers if any photon survives.
inline bool pulse_survives(int photons, const ChannelModel& ch, RandomStream& rng) {
  const double t = ch.transmittance();
  for (int i = 0; i < photons; ++i) {
    if (rng.bernoulli(t)) return true;
  }
  return false;
}

}  // namespace detail

inline std::optional<Jones> transmit(const Jones& s, const ChannelModel& ch, RandomStream& rng) {
  if (!rng.bernoulli(ch.transmittance())) return std::nullopt;
  return detail::transform(s, ch, rng);
}

inline std::optional<Jones> transmit(optics::PolarizationState s, const ChannelModel& ch,
                                     RandomStream& rng) {
  return transmit(optics::jones_of(s), ch, rng);
}

// ---------------------------------------------------------------------------
// Sources

enum class SourceKind : std::uint8_t { IdealSinglePhoton, WeakCoherent };

struct SourceModel {
  SourceKind kind = SourceKind::IdealSinglePhoton;
  double mu = 0.0;  // mean photon number, WeakCoherent only
  double pulse_rate_hz = 1.0e9;

  double mean_photons_per_pulse() const {
    return kind == SourceKind::IdealSinglePhoton ? 1.0 : mu;
  }

  int sample_photon_count(RandomStream& rng) const {
    return kind == SourceKind::IdealSinglePhoton ? 1 : rng.poisson(mu);
  }
};

inline double seconds_per_year = 365.25 * 86400.0;  // Julian year
inline double seconds_per_century = 100.0 * seconds_per_year;

// Mean photon detections over a run: rate x mean photons x channel
// transmittance x detector efficiency x duration.
inline double expected_detections(const SourceModel& source, const ChannelModel& ch,
                                  double efficiency, double duration_s) {
  if (duration_s < 0.0) throw std::invalid_argument("duration must be >= 0");
  return source.pulse_rate_hz * source.mean_photons_per_pulse() * ch.transmittance() *
         efficiency * duration_s;
}

}  // namespace qrelay::net
