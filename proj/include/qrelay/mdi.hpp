#pragma once
// Untrusted-mode engine: two users send simultaneously, the relay runs the
// partial Bell-state measurement and announces outcomes, then sifting and the
// announced-outcome bit flips recover a shared key.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrelay/channel.hpp"
#include "qrelay/key.hpp"
#include "qrelay/optics.hpp"
#include "qrelay/random.hpp"

namespace qrelay::mdi {

using optics::Basis;
using optics::BitValue;
using optics::BsmOutcome;
using optics::DetectorModel;

struct MdiRoundRecord {
  std::uint64_t round = 0;
  Basis a_basis = Basis::Rectilinear;
  BitValue a_bit = 0;
  Basis b_basis = Basis::Rectilinear;
  BitValue b_bit = 0;
  BsmOutcome announced = BsmOutcome::Failure;
  bool multi_photon = false;
};

// Source plus optional pinned basis/bit (pinning is for tests and tables).
struct UserInput {
  net::SourceModel source{};
  std::optional<Basis> forced_basis;
  std::optional<BitValue> forced_bit;
};

namespace detail {

inline MdiRoundRecord run_one(std::uint64_t round, const UserInput& a,
                              const net::ChannelModel& cha, const UserInput& b,
                              const net::ChannelModel& chb, const DetectorModel& det,
                              double visibility, RandomStream& rng) {
  MdiRoundRecord rec;
  rec.round = round;
  rec.a_basis = a.forced_basis ? *a.forced_basis : (rng.coin() ? Basis::Diagonal : Basis::Rectilinear);
  rec.a_bit = a.forced_bit ? *a.forced_bit : (rng.coin() ? 1 : 0);
  rec.b_basis = b.forced_basis ? *b.forced_basis : (rng.coin() ? Basis::Diagonal : Basis::Rectilinear);
  rec.b_bit = b.forced_bit ? *b.forced_bit : (rng.coin() ? 1 : 0);

  const int ka = a.source.sample_photon_count(rng);
  const int kb = b.source.sample_photon_count(rng);
  rec.multi_photon = ka > 1 || kb > 1;

  std::optional<optics::Jones> pa, pb;
  if (net::detail::pulse_survives(ka, cha, rng)) {
    pa = net::detail::transform(optics::jones_of(optics::encode(rec.a_basis, rec.a_bit)), cha, rng);
  }
  if (net::detail::pulse_survives(kb, chb, rng)) {
    pb = net::detail::transform(optics::jones_of(optics::encode(rec.b_basis, rec.b_bit)), chb, rng);
  }

  optics::DetectionPattern ideal;
  if (pa && pb) {
    ideal = optics::sample_pattern(optics::bsm_distribution(*pa, *pb, visibility), rng);
  } else if (pa) {
    ideal = optics::route_single_photon(*pa, rng);
  } else if (pb) {
    ideal = optics::route_single_photon(*pb, rng);
  }
  rec.announced = optics::classify(optics::observe(ideal, det, rng));
  return rec;
}

}  // namespace detail

inline std::vector<MdiRoundRecord> run_rounds(std::size_t n, const UserInput& a,
                                              const net::ChannelModel& cha, const UserInput& b,
                                              const net::ChannelModel& chb,
                                              const DetectorModel& det, double visibility,
                                              RandomStream& rng) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) {
    throw std::invalid_argument("visibility must lie in [0, 1]");
  }
  std::vector<MdiRoundRecord> records;
  records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    records.push_back(detail::run_one(i, a, cha, b, chb, det, visibility, rng));
  }
  return records;
}

inline std::vector<MdiRoundRecord> run_rounds(std::size_t n, const net::ChannelModel& cha,
                                              const net::ChannelModel& chb,
                                              const DetectorModel& det, double visibility,
                                              RandomStream& rng) {
  return run_rounds(n, UserInput{}, cha, UserInput{}, chb, det, visibility, rng);
}

// ---------------------------------------------------------------------------
// Sifting: keep announced successes where the users happened to pick the same
// basis.

struct SiftedMdiBit {
  BitValue alice = 0;
  BitValue bob = 0;
  Basis basis = Basis::Rectilinear;
  BsmOutcome outcome = BsmOutcome::Failure;
};

inline std::vector<SiftedMdiBit> sift(const std::vector<MdiRoundRecord>& records) {
  std::vector<SiftedMdiBit> out;
  for (const auto& r : records) {
    if (r.announced == BsmOutcome::Failure || r.a_basis != r.b_basis) continue;
    out.push_back({r.a_bit, r.b_bit, r.a_basis, r.announced});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Announced-outcome flips: Bob flips except for diagonal-basis triplets.

inline bool bob_flips(Basis basis, BsmOutcome outcome) {
  return !(basis == Basis::Diagonal && outcome == BsmOutcome::Triplet);
}

struct MdiKeys {
  KeyMaterial alice;
  KeyMaterial bob;
  std::vector<Basis> bases;  // aligned with the key bits, for per-basis qber
};

inline MdiKeys apply_flip_rules(const std::vector<SiftedMdiBit>& sifted,
                                std::string alice_owner = "alice", std::string bob_owner = "bob") {
  MdiKeys out;
  out.alice.role = KeyRole::Sifted;
  out.alice.owner = std::move(alice_owner);
  out.bob.role = KeyRole::Sifted;
  out.bob.owner = std::move(bob_owner);
  for (const auto& s : sifted) {
    out.alice.bits.push_back(s.alice);
    out.bob.bits.push_back(bob_flips(s.basis, s.outcome) ? s.bob ^ 1 : s.bob);
    out.bases.push_back(s.basis);
  }
  return out;
}

// Mismatch fraction per basis; bases with no bits are absent from the map.
inline std::map<Basis, double> qber_by_basis(const KeyMaterial& alice, const KeyMaterial& bob,
                                             const std::vector<Basis>& bases) {
  if (alice.size() != bob.size() || alice.size() != bases.size()) {
    throw std::invalid_argument("qber_by_basis needs aligned keys and basis labels");
  }
  std::map<Basis, std::pair<std::size_t, std::size_t>> tally;  // basis -> (errors, total)
  for (std::size_t i = 0; i < bases.size(); ++i) {
    auto& [errors, total] = tally[bases[i]];
    ++total;
    if (alice.bits[i] != bob.bits[i]) ++errors;
  }
  std::map<Basis, double> out;
  for (const auto& [basis, counts] : tally) {
    out[basis] = static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Round log serialization

inline std::string to_csv(const std::vector<MdiRoundRecord>& records) {
  std::string out = "round,a_basis,a_bit,b_basis,b_bit,outcome\n";
  for (const auto& r : records) {
    out += std::to_string(r.round);
    out += ',';
    out += optics::to_string(r.a_basis);
    out += ',';
    out += std::to_string(static_cast<int>(r.a_bit));
    out += ',';
    out += optics::to_string(r.b_basis);
    out += ',';
    out += std::to_string(static_cast<int>(r.b_bit));
    out += ',';
    out += optics::to_string(r.announced);
    out += '\n';
  }
  return out;
}

}  // namespace qrelay::mdi
