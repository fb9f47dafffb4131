#pragma once
// The built-in verification suite: one check per acceptance criterion, run at
// full scale by the acceptance binary and at reduced scale by the CLI
// selftest. Checks are deterministic (fixed derived seeds).

#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "qrelay/bb84.hpp"
#include "qrelay/channel.hpp"
#include "qrelay/mdi.hpp"
#include "qrelay/netsim.hpp"
#include "qrelay/optics.hpp"
#include "qrelay/random.hpp"
#include "qrelay/relay.hpp"

namespace qrelay::selftest {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Scale {
  std::size_t mc_rounds = 100000;   // Monte Carlo samples per input pair
  std::size_t e2e_rounds = 10000;   // end-to-end session length
  std::size_t law_rounds = 100000;  // scaling-law and noise-oracle runs

  static Scale full() { return {}; }
  // The quick profile trims the session-heavy runs; pure sampling is cheap
  // and keeps its count so the per-pattern statistics stay identical.
  static Scale quick() { return {100000, 4000, 40000}; }
};

namespace detail {

inline constexpr std::uint64_t base_seed = 0x5e1f7e5701u;

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline bool within_sigma(std::size_t observed, std::size_t n, double p, double k = 3.0) {
  const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  return std::abs(static_cast<double>(observed) / static_cast<double>(n) - p) <= k * sigma;
}

inline std::set<std::string> support_of(const optics::TwoPhotonDistribution& dist) {
  std::set<std::string> out;
  for (const auto& [pattern, p] : dist) {
    if (p > 1e-12) out.insert(pattern.to_string());
  }
  return out;
}

inline netsim::ScenarioConfig two_user_config(relay::RelayMode mode, std::size_t rounds,
                                              const std::string& label) {
  netsim::ScenarioConfig cfg;
  cfg.users = {{"alice", {}}, {"bob", {}}};
  cfg.channels["alice"] = {};
  cfg.channels["bob"] = {};
  cfg.mode = mode;
  cfg.rounds = rounds;
  cfg.seed = derive_seed(base_seed, label);
  cfg.pairing = {{"alice", "bob"}};
  return cfg;
}

}  // namespace detail

// 1. Closed-form photon budget for the long-haul link.
inline CheckResult check_loss_arithmetic() {
  net::SourceModel source;
  source.pulse_rate_hz = 1.0e10;
  net::ChannelModel ch;
  ch.length_km = 1000.0;
  const double photons = net::expected_detections(source, ch, 1.0, net::seconds_per_century);
  const bool pass = photons >= 0.26 && photons <= 0.37;
  return {"loss arithmetic", pass,
          detail::num(photons) + " photons per century (expect within [0.26, 0.37])"};
}

// 2. Monte Carlo sampling against the exact distribution for all 16 ordered
// input pairs, plus the qualitative outcome sets for matched bases. The
// splitter sign convention is injectable: both signs must give identical
// statistics.
inline CheckResult check_bsm_oracle(const Scale& scale, double splitter_sign = +1.0) {
  using optics::PolarizationState;
  const std::size_t n = scale.mc_rounds;
  std::size_t pairs_checked = 0;

  for (PolarizationState a : optics::all_states) {
    for (PolarizationState b : optics::all_states) {
      const auto dist = optics::detail::bsm_distribution_signed(
          optics::jones_of(a), optics::jones_of(b), 1.0, splitter_sign);
      RandomStream rng(derive_seed(detail::base_seed,
                                   "bsm:" + optics::to_string(a) + optics::to_string(b)));
      std::map<optics::DetectionPattern, std::size_t> counts;
      for (std::size_t i = 0; i < n; ++i) ++counts[optics::sample_pattern(dist, rng)];

      for (const auto& [pattern, p] : dist) {
        const std::size_t c = counts.count(pattern) ? counts.at(pattern) : 0;
        if (!detail::within_sigma(c, n, p)) {
          return {"bsm oracle vs monte carlo", false,
                  optics::to_string(a) + "," + optics::to_string(b) + " pattern " +
                      pattern.to_string() + ": " + detail::num(double(c) / double(n)) +
                      " vs " + detail::num(p)};
        }
      }
      for (const auto& [pattern, c] : counts) {
        if (!dist.count(pattern)) {
          return {"bsm oracle vs monte carlo", false,
                  "sampled pattern outside the distribution support"};
        }
      }
      ++pairs_checked;
    }
  }

  // Qualitative outcome sets for the eight matched-basis ordered pairs.
  using P = PolarizationState;
  const std::set<std::string> orth_rect = {"H1+V1", "H2+V2", "H1+V2", "V1+H2"};
  const std::set<std::string> same_diag = {"H1+V1", "H2+V2", "2xH1", "2xV1", "2xH2", "2xV2"};
  const std::set<std::string> orth_diag = {"H1+V2", "V1+H2", "2xH1", "2xV1", "2xH2", "2xV2"};
  const std::vector<std::pair<std::pair<P, P>, std::set<std::string>>> expected = {
      {{P::H, P::V}, orth_rect},
      {{P::V, P::H}, orth_rect},
      {{P::H, P::H}, {"2xH1", "2xH2"}},
      {{P::V, P::V}, {"2xV1", "2xV2"}},
      {{P::DPlus, P::DPlus}, same_diag},
      {{P::DMinus, P::DMinus}, same_diag},
      {{P::DPlus, P::DMinus}, orth_diag},
      {{P::DMinus, P::DPlus}, orth_diag},
  };
  for (const auto& [inputs, want] : expected) {
    const auto got = detail::support_of(optics::detail::bsm_distribution_signed(
        optics::jones_of(inputs.first), optics::jones_of(inputs.second), 1.0, splitter_sign));
    if (got != want) {
      return {"bsm oracle vs monte carlo", false,
              "outcome set mismatch for " + optics::to_string(inputs.first) + "," +
                  optics::to_string(inputs.second)};
    }
  }

  // Parallel cross-port coincidences for orthogonal diagonal inputs exist
  // only below unit visibility.
  const auto mixed = optics::bsm_distribution(P::DPlus, P::DMinus, 0.5);
  const auto h1h2 = optics::DetectionPattern::coincidence(optics::DetectorId::H1,
                                                          optics::DetectorId::H2);
  const auto v1v2 = optics::DetectionPattern::coincidence(optics::DetectorId::V1,
                                                          optics::DetectorId::V2);
  if (!(optics::prob_of(mixed, h1h2) > 0.0 && optics::prob_of(mixed, v1v2) > 0.0)) {
    return {"bsm oracle vs monte carlo", false,
            "H1+H2/V1+V2 should appear at visibility 0.5"};
  }

  return {"bsm oracle vs monte carlo", true,
          std::to_string(pairs_checked) + " input pairs within 3 sigma at " +
              std::to_string(n) + " samples each"};
}

// 3. Identical photons never split across output ports.
inline CheckResult check_hom_bunching(const Scale& scale) {
  for (optics::PolarizationState s : optics::all_states) {
    const auto dist = optics::bsm_distribution(s, s);
    double cross_port = 0.0;
    for (const auto& [pattern, p] : dist) {
      const bool port1 = pattern.count(optics::DetectorId::H1) || pattern.count(optics::DetectorId::V1);
      const bool port2 = pattern.count(optics::DetectorId::H2) || pattern.count(optics::DetectorId::V2);
      if (port1 && port2) cross_port += p;
    }
    if (cross_port != 0.0) {
      return {"hom bunching", false,
              "oracle cross-port probability " + detail::num(cross_port) + " for " +
                  optics::to_string(s)};
    }
    RandomStream rng(derive_seed(detail::base_seed, "hom:" + optics::to_string(s)));
    for (std::size_t i = 0; i < scale.mc_rounds; ++i) {
      const auto pattern = optics::sample_pattern(dist, rng);
      const bool port1 = pattern.count(optics::DetectorId::H1) || pattern.count(optics::DetectorId::V1);
      const bool port2 = pattern.count(optics::DetectorId::H2) || pattern.count(optics::DetectorId::V2);
      if (port1 && port2) {
        return {"hom bunching", false, "sampled a cross-port coincidence"};
      }
    }
  }
  return {"hom bunching", true,
          "0 cross-port events over " + std::to_string(4 * scale.mc_rounds) + " samples"};
}

// 4. Trusted-mode session end to end, plus the fixed twelve-round example.
inline CheckResult check_bb84_end_to_end(const Scale& scale) {
  using optics::Basis;
  const auto cfg = detail::two_user_config(relay::RelayMode::Trusted, scale.e2e_rounds, "e2e-bb84");
  const auto result = netsim::run_session(cfg);

  for (const auto& link : result.report.links) {
    if (link.aborted) return {"bb84 end-to-end", false, "link " + link.link + " aborted"};
    if (!detail::within_sigma(link.sifted, link.rounds, 0.5)) {
      return {"bb84 end-to-end", false,
              "sifted fraction " + detail::num(double(link.sifted) / double(link.rounds))};
    }
    if (link.qber != 0.0) {
      return {"bb84 end-to-end", false, "noiseless qber " + detail::num(link.qber)};
    }
    if (link.final_bits == 0) return {"bb84 end-to-end", false, "empty final key"};
    if (!(result.node.key_store().at(link.link) == result.link_keys.at(link.link))) {
      return {"bb84 end-to-end", false, "relay copy differs from user key"};
    }
  }
  if (result.report.pairs.empty() || !result.report.pairs[0].verified) {
    return {"bb84 end-to-end", false, "parity relay verification failed"};
  }

  // Worked example: fixed bases and bits over twelve rounds.
  const std::vector<Basis> ab = {Basis::Rectilinear, Basis::Rectilinear, Basis::Diagonal,
                                 Basis::Rectilinear, Basis::Diagonal,    Basis::Diagonal,
                                 Basis::Rectilinear, Basis::Diagonal,    Basis::Rectilinear,
                                 Basis::Rectilinear, Basis::Diagonal,    Basis::Diagonal};
  const std::vector<optics::BitValue> bits = {1, 0, 0, 1, 0, 1, 0, 1, 0, 1, 1, 0};
  const std::vector<Basis> cb = {Basis::Diagonal,    Basis::Rectilinear, Basis::Diagonal,
                                 Basis::Diagonal,    Basis::Rectilinear, Basis::Diagonal,
                                 Basis::Rectilinear, Basis::Rectilinear, Basis::Diagonal,
                                 Basis::Rectilinear, Basis::Diagonal,    Basis::Rectilinear};
  RandomStream rng(derive_seed(detail::base_seed, "worked-example"));
  std::vector<bb84::Bb84RoundRecord> records;
  for (std::size_t i = 0; i < ab.size(); ++i) {
    records.push_back(bb84::run_round_forced(i, ab[i], bits[i], cb[i], net::ChannelModel{},
                                             optics::DetectorModel{}, rng));
  }
  const auto keys = bb84::sift(records);
  if (keys.alice.to_bit_string() != "001011" || keys.charlie.to_bit_string() != "001011") {
    return {"bb84 end-to-end", false,
            "worked example sifted to " + keys.charlie.to_bit_string()};
  }

  return {"bb84 end-to-end", true,
          "qber 0, keys mirrored at the relay, worked example reproduced"};
}

// 5. Untrusted-mode session end to end; the expected sifted fraction is
// recomputed from the distribution oracle before being used. The flip rule is
// injectable so a deliberately inverted rule is caught.
inline CheckResult check_mdi_end_to_end(const Scale& scale,
                                        bool (*flips)(optics::Basis,
                                                      optics::BsmOutcome) = mdi::bob_flips) {
  using optics::Basis;
  using optics::BsmOutcome;

  double oracle_sifted = 0.0;
  for (optics::PolarizationState a : optics::all_states) {
    for (optics::PolarizationState b : optics::all_states) {
      const bool rect_a = a == optics::PolarizationState::H || a == optics::PolarizationState::V;
      const bool rect_b = b == optics::PolarizationState::H || b == optics::PolarizationState::V;
      if (rect_a != rect_b) continue;
      double p_success = 0.0;
      for (const auto& [pattern, p] : optics::bsm_distribution(a, b)) {
        if (optics::classify(pattern) != BsmOutcome::Failure) p_success += p;
      }
      oracle_sifted += p_success / 16.0;
    }
  }
  if (std::abs(oracle_sifted - 0.25) > 1e-12) {
    return {"mdi end-to-end", false,
            "oracle sifted fraction " + detail::num(oracle_sifted) + " != 1/4"};
  }

  // Key agreement through the injectable flip rule.
  RandomStream rng(derive_seed(detail::base_seed, "e2e-mdi"));
  const auto records = mdi::run_rounds(scale.e2e_rounds, net::ChannelModel{}, net::ChannelModel{},
                                       optics::DetectorModel{}, 1.0, rng);
  const auto sifted = mdi::sift(records);
  if (!detail::within_sigma(sifted.size(), scale.e2e_rounds, oracle_sifted)) {
    return {"mdi end-to-end", false,
            "sifted fraction " + detail::num(double(sifted.size()) / double(scale.e2e_rounds))};
  }
  std::size_t mismatches = 0;
  for (const auto& s : sifted) {
    const optics::BitValue bob = flips(s.basis, s.outcome) ? s.bob ^ 1 : s.bob;
    if (bob != s.alice) ++mismatches;
  }
  if (mismatches != 0) {
    return {"mdi end-to-end", false,
            std::to_string(mismatches) + " of " + std::to_string(sifted.size()) +
                " sifted bits disagree after flips"};
  }

  // Full orchestration: identical final keys, nothing retained at the relay.
  const auto cfg = detail::two_user_config(relay::RelayMode::Untrusted, scale.e2e_rounds,
                                           "e2e-mdi-session");
  const auto result = netsim::run_session(cfg);
  const auto& link = result.report.links[0];
  if (link.aborted || link.qber != 0.0) {
    return {"mdi end-to-end", false, "session qber " + detail::num(link.qber)};
  }
  const auto& pk = result.pair_keys.at("alice+bob");
  if (!(pk.a == pk.b) || pk.a.empty()) {
    return {"mdi end-to-end", false, "final keys differ"};
  }
  if (!result.node.key_store().empty()) {
    return {"mdi end-to-end", false, "untrusted relay retained key material"};
  }

  return {"mdi end-to-end", true,
          "sifted fraction matches the oracle 1/4, keys agree, relay blind"};
}

// 6. Halving detector efficiency quarters the MDI yield but halves BB84's.
inline CheckResult check_efficiency_scaling(const Scale& scale) {
  const std::vector<double> etas = {0.8, 0.4};

  auto mdi_cfg = detail::two_user_config(relay::RelayMode::Untrusted, scale.law_rounds,
                                         "eta-mdi");
  const auto mdi_points = netsim::sweep(mdi_cfg, "efficiency", etas);
  const double mdi_ratio = static_cast<double>(mdi_points[0].report.links[0].sifted) /
                           static_cast<double>(mdi_points[1].report.links[0].sifted);

  auto bb_cfg = detail::two_user_config(relay::RelayMode::Trusted, scale.law_rounds, "eta-bb84");
  bb_cfg.pairing.clear();
  const auto bb_points = netsim::sweep(bb_cfg, "efficiency", etas);
  const double bb_ratio = static_cast<double>(bb_points[0].report.links[0].detected) /
                          static_cast<double>(bb_points[1].report.links[0].detected);

  const bool pass = std::abs(mdi_ratio - 4.0) <= 0.4 && std::abs(bb_ratio - 2.0) <= 0.2;
  return {"efficiency scaling", pass,
          "mdi ratio " + detail::num(mdi_ratio) + " (expect 4 +- 0.4), bb84 ratio " +
              detail::num(bb_ratio) + " (expect 2 +- 0.2)"};
}

// 7. XOR relay algebra and announcement uniformity.
inline CheckResult check_xor_algebra() {
  RandomStream rng(derive_seed(detail::base_seed, "xor"));
  auto random_key = [&rng](std::size_t n) {
    KeyMaterial k;
    k.bits.reserve(n);
    for (std::size_t i = 0; i < n; ++i) k.bits.push_back(rng.coin() ? 1 : 0);
    return k;
  };

  std::size_t trials = 0;
  for (std::size_t len : {std::size_t{0}, std::size_t{1}, std::size_t{8}, std::size_t{256},
                          std::size_t{4097}}) {
    for (int t = 0; t < 250; ++t) {
      const KeyMaterial ka = random_key(len);
      const KeyMaterial kb = random_key(len);
      const KeyMaterial kc = relay::xor_relay(ka, kb);
      if (!(relay::infer_peer_key(ka, kc) == kb) || !(relay::infer_peer_key(kb, kc) == ka)) {
        return {"xor relay algebra", false,
                "round trip failed at length " + std::to_string(len)};
      }
      ++trials;
    }
  }

  const std::size_t parity_trials = 10000, len = 32;
  std::size_t ones = 0;
  for (std::size_t t = 0; t < parity_trials; ++t) {
    for (std::uint8_t b : relay::xor_relay(random_key(len), random_key(len)).bits) ones += b;
  }
  const double z = (static_cast<double>(ones) - 0.5 * parity_trials * len) /
                   std::sqrt(0.25 * parity_trials * len);
  const bool uniform = std::abs(z) <= 3.0;
  return {"xor relay algebra", uniform,
          std::to_string(trials) + " exact round trips, parity z " + detail::num(z)};
}

// 8. Intercept-resend and misalignment against their analytic error rates.
inline CheckResult check_adversary_and_noise(const Scale& scale) {
  auto eve_cfg = detail::two_user_config(relay::RelayMode::Trusted, scale.law_rounds, "eve");
  eve_cfg.channels["alice"].eve = net::EveConfig{};
  eve_cfg.sample_fraction = 0.5;
  const auto eve_result = netsim::run_session(eve_cfg);
  const auto& attacked = eve_result.report.links[0];
  if (std::abs(attacked.qber - 0.25) > 0.02) {
    return {"adversary and noise oracles", false,
            "intercept-resend qber " + detail::num(attacked.qber)};
  }
  if (!attacked.aborted) {
    return {"adversary and noise oracles", false, "qber 0.25 did not abort at threshold 0.11"};
  }

  auto mis_cfg = detail::two_user_config(relay::RelayMode::Trusted, scale.law_rounds, "mis");
  mis_cfg.pairing.clear();
  mis_cfg.sample_fraction = 1.0;
  mis_cfg.distill.abort_threshold = 1.0;
  const auto points = netsim::sweep(mis_cfg, "misalignment_deg", {10.0});
  const double qber = points[0].report.links[0].qber;
  const double expected = std::pow(std::sin(optics::deg_to_rad(10.0)), 2);
  if (std::abs(qber - expected) > 0.005) {
    return {"adversary and noise oracles", false,
            "misalignment qber " + detail::num(qber) + " vs " + detail::num(expected)};
  }

  return {"adversary and noise oracles", true,
          "eve qber " + detail::num(attacked.qber) + " aborted; 10 deg qber " +
              detail::num(qber)};
}

// 9. Announced outcomes are uncorrelated with either user's bit value.
inline CheckResult check_relay_blindness(const Scale& scale) {
  RandomStream rng(derive_seed(detail::base_seed, "blind"));
  const auto records = mdi::run_rounds(scale.law_rounds, net::ChannelModel{}, net::ChannelModel{},
                                       optics::DetectorModel{}, 1.0, rng);
  std::size_t singlet_total = 0, singlet_zero = 0, triplet_total = 0, triplet_zero = 0;
  for (const auto& s : mdi::sift(records)) {
    if (s.outcome == optics::BsmOutcome::Singlet) {
      ++singlet_total;
      singlet_zero += s.alice == 0;
    } else {
      ++triplet_total;
      triplet_zero += s.alice == 0;
    }
  }
  const bool pass = singlet_total > 0 && triplet_total > 0 &&
                    detail::within_sigma(singlet_zero, singlet_total, 0.5) &&
                    detail::within_sigma(triplet_zero, triplet_total, 0.5);
  return {"relay blindness", pass,
          "P(bit 0 | singlet) " + detail::num(double(singlet_zero) / double(singlet_total)) +
              ", P(bit 0 | triplet) " + detail::num(double(triplet_zero) / double(triplet_total))};
}

// 10. Same seed, same bytes.
inline CheckResult check_determinism() {
  for (relay::RelayMode mode : {relay::RelayMode::Trusted, relay::RelayMode::Untrusted}) {
    const auto cfg = detail::two_user_config(mode, 2000, "determinism");
    const auto a = netsim::run_session(cfg);
    const auto b = netsim::run_session(cfg);
    if (netsim::report_to_csv(a.report) != netsim::report_to_csv(b.report) ||
        a.round_csv != b.round_csv ||
        relay::announcements_to_csv(a.node.announcements()) !=
            relay::announcements_to_csv(b.node.announcements())) {
      return {"determinism", false,
              "repeated " + netsim::mode_name(mode) + " run changed its csv output"};
    }
  }
  return {"determinism", true, "report, round, and announcement csv byte-identical on re-run"};
}

inline std::vector<CheckResult> run_acceptance_checks(const Scale& scale) {
  return {
      check_loss_arithmetic(),
      check_bsm_oracle(scale),
      check_hom_bunching(scale),
      check_bb84_end_to_end(scale),
      check_mdi_end_to_end(scale),
      check_efficiency_scaling(scale),
      check_xor_algebra(),
      check_adversary_and_noise(scale),
      check_relay_blindness(scale),
      check_determinism(),
  };
}

}  // namespace qrelay::selftest
