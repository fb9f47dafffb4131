#pragma once
// Prepare-measure-sift engine for one user-relay link in trusted mode, plus
// the QBER estimation / distillation steps shared with the untrusted pipeline.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrelay/channel.hpp"
#include "qrelay/key.hpp"
#include "qrelay/optics.hpp"
#include "qrelay/random.hpp"

namespace qrelay::bb84 {

using optics::Basis;
using optics::BitValue;
using optics::DetectorModel;
using optics::PolarizationState;

inline PolarizationState prepare(Basis basis, BitValue bit) { return optics::encode(basis, bit); }

struct Bb84RoundRecord {
  std::uint64_t round = 0;
  Basis alice_basis = Basis::Rectilinear;
  BitValue alice_bit = 0;
  Basis charlie_basis = Basis::Rectilinear;
  bool detected = false;
  std::optional<BitValue> charlie_bit;  // present iff detected
  bool multi_photon = false;
};

namespace detail {

inline Bb84RoundRecord run_one(std::uint64_t round, Basis a_basis, BitValue a_bit,
                               std::optional<Basis> forced_charlie, int photons,
                               const net::ChannelModel& ch, const DetectorModel& det,
                               RandomStream& rng) {
  Bb84RoundRecord rec;
  rec.round = round;
  rec.alice_basis = a_basis;
  rec.alice_bit = a_bit;
  rec.multi_photon = photons > 1;

  std::optional<optics::Jones> arrived;
  if (net::detail::pulse_survives(photons, ch, rng)) {
    arrived = net::detail::transform(optics::jones_of(prepare(a_basis, a_bit)), ch, rng);
  }
  const optics::Bb84Gate gate = optics::bb84_gate(arrived, forced_charlie, det, rng);
  rec.charlie_basis = gate.basis;
  rec.detected = gate.bit.has_value();
  rec.charlie_bit = gate.bit;
  return rec;
}

}  // namespace detail

inline std::vector<Bb84RoundRecord> run_rounds(std::size_t n, const net::SourceModel& source,
                                               const net::ChannelModel& ch,
                                               const DetectorModel& det, RandomStream& rng) {
  std::vector<Bb84RoundRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Basis basis = rng.coin() ? Basis::Diagonal : Basis::Rectilinear;
    const BitValue bit = rng.coin() ? 1 : 0;
    records.push_back(detail::run_one(i, basis, bit, std::nullopt,
                                      source.sample_photon_count(rng), ch, det, rng));
  }
  return records;
}

inline std::vector<Bb84RoundRecord> run_rounds(std::size_t n, const net::ChannelModel& ch,
                                               const DetectorModel& det, RandomStream& rng) {
  return run_rounds(n, net::SourceModel{}, ch, det, rng);
}

// Fixed basis/bit round for worked examples and tests; Charlie's basis choice
// is forced too.
inline Bb84RoundRecord run_round_forced(std::uint64_t round, Basis a_basis, BitValue a_bit,
                                        Basis charlie_basis, const net::ChannelModel& ch,
                                        const DetectorModel& det, RandomStream& rng) {
  return detail::run_one(round, a_basis, a_bit, charlie_basis, 1, ch, det, rng);
}

// ---------------------------------------------------------------------------
// Sifting: keep detected rounds measured in the preparation basis.

struct SiftedKeys {
  KeyMaterial alice;
  KeyMaterial charlie;
};

inline SiftedKeys sift(const std::vector<Bb84RoundRecord>& records,
                       std::string alice_owner = "alice", std::string charlie_owner = "relay") {
  SiftedKeys out;
  out.alice.role = KeyRole::Sifted;
  out.alice.owner = std::move(alice_owner);
  out.charlie.role = KeyRole::Sifted;
  out.charlie.owner = std::move(charlie_owner);
  for (const auto& r : records) {
    if (!r.detected || r.alice_basis != r.charlie_basis) continue;
    out.alice.bits.push_back(r.alice_bit);
    out.charlie.bits.push_back(*r.charlie_bit);
  }
  return out;
}

// ---------------------------------------------------------------------------
// QBER estimation: compare and discard a random fraction of positions.

struct QberEstimate {
  double qber = 0.0;
  std::size_t compared = 0;
  KeyMaterial k1;  // surviving positions, order preserved
  KeyMaterial k2;
};

inline QberEstimate estimate_qber(const KeyMaterial& k1, const KeyMaterial& k2,
                                  double sample_fraction, RandomStream& rng) {
  if (k1.size() != k2.size()) throw std::invalid_argument("qber estimation needs equal lengths");
  if (k1.empty()) throw std::invalid_argument("insufficient key material for qber estimation");
  if (!(sample_fraction > 0.0 && sample_fraction <= 1.0)) {
    throw std::invalid_argument("sample_fraction must lie in (0, 1]");
  }
  const std::size_t n = k1.size();
  auto m = static_cast<std::size_t>(std::llround(sample_fraction * static_cast<double>(n)));
  m = std::clamp<std::size_t>(m, 1, n);

  // Partial Fisher-Yates: the first m slots become the sample.
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(n - i));
    std::swap(idx[i], idx[j]);
  }

  std::vector<bool> sampled(n, false);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sampled[idx[i]] = true;
    if (k1.bits[idx[i]] != k2.bits[idx[i]]) ++mismatches;
  }

  QberEstimate est;
  est.qber = static_cast<double>(mismatches) / static_cast<double>(m);
  est.compared = m;
  est.k1 = {{}, k1.role, k1.owner, k1.public_announcement};
  est.k2 = {{}, k2.role, k2.owner, k2.public_announcement};
  for (std::size_t i = 0; i < n; ++i) {
    if (sampled[i]) continue;
    est.k1.bits.push_back(k1.bits[i]);
    est.k2.bits.push_back(k2.bits[i]);
  }
  return est;
}

// ---------------------------------------------------------------------------
// Distillation: oracle-ideal error correction plus a fixed-ratio compression
// standing in for leakage accounting.

struct DistillParams {
  double compression_ratio = 0.2;  // fraction of bits given up to correction + amplification
  double abort_threshold = 0.11;   // qber above this aborts the session
};

struct FinalKeys {
  KeyMaterial k1;
  KeyMaterial k2;
};

// Empty result means abort.
inline std::optional<FinalKeys> distill(const KeyMaterial& k1, const KeyMaterial& k2, double qber,
                                        const DistillParams& params = {}) {
  if (k1.size() != k2.size()) throw std::invalid_argument("distillation needs equal lengths");
  if (!(params.compression_ratio >= 0.0 && params.compression_ratio <= 1.0)) {
    throw std::invalid_argument("compression_ratio must lie in [0, 1]");
  }
  if (qber > params.abort_threshold) return std::nullopt;

  const auto len = static_cast<std::size_t>(
      std::ceil((1.0 - params.compression_ratio) * static_cast<double>(k1.size())));
  FinalKeys out;
  out.k1 = k1.truncated(len);
  out.k1.role = KeyRole::Final;
  // Correction is simulator-side: the surviving bits are forced equal.
  out.k2 = out.k1;
  out.k2.owner = k2.owner;
  out.k2.public_announcement = k2.public_announcement;
  return out;
}

// ---------------------------------------------------------------------------
// Round log serialization

inline std::string to_csv(const std::vector<Bb84RoundRecord>& records) {
  std::string out = "round,alice_basis,alice_bit,charlie_basis,detected,charlie_bit\n";
  for (const auto& r : records) {
    out += std::to_string(r.round);
    out += ',';
    out += optics::to_string(r.alice_basis);
    out += ',';
    out += std::to_string(static_cast<int>(r.alice_bit));
    out += ',';
    out += optics::to_string(r.charlie_basis);
    out += ',';
    out += r.detected ? '1' : '0';
    out += ',';
    if (r.charlie_bit) out += std::to_string(static_cast<int>(*r.charlie_bit));
    out += '\n';
  }
  return out;
}

}  // namespace qrelay::bb84
