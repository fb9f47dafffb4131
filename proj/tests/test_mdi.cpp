#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>
#include <vector>

#include "qrelay/mdi.hpp"
#include "test_support.hpp"

using namespace qrelay;
using mdi::MdiRoundRecord;
using mdi::SiftedMdiBit;
using mdi::UserInput;
using optics::Basis;
using optics::BitValue;
using optics::BsmOutcome;
using optics::DetectorModel;
using Catch::Approx;

namespace {

constexpr Basis R = Basis::Rectilinear;
constexpr Basis D = Basis::Diagonal;

UserInput pinned(Basis basis, BitValue bit) {
  UserInput u;
  u.forced_basis = basis;
  u.forced_bit = bit;
  return u;
}

UserInput pinned_basis(Basis basis) {
  UserInput u;
  u.forced_basis = basis;
  return u;
}

struct OutcomeCounts {
  std::size_t singlet = 0, triplet = 0, failure = 0;
};

OutcomeCounts tally(const std::vector<MdiRoundRecord>& records) {
  OutcomeCounts c;
  for (const auto& r : records) {
    switch (r.announced) {
      case BsmOutcome::Singlet: ++c.singlet; break;
      case BsmOutcome::Triplet: ++c.triplet; break;
      case BsmOutcome::Failure: ++c.failure; break;
    }
  }
  return c;
}

// Probability the oracle distribution classifies as an announced success.
double success_probability(const optics::TwoPhotonDistribution& dist) {
  double p = 0.0;
  for (const auto& [pattern, prob] : dist) {
    if (optics::classify(pattern) != BsmOutcome::Failure) p += prob;
  }
  return p;
}

}  // namespace

TEST_CASE("pinned-input rounds follow the interference oracle") {
  const net::ChannelModel lossless;
  const DetectorModel ideal;
  const std::size_t n = 20000;

  SECTION("orthogonal rectilinear bits always succeed, half singlet") {
    RandomStream rng(101);
    const auto recs = mdi::run_rounds(n, pinned(R, 0), lossless, pinned(R, 1), lossless, ideal,
                                      1.0, rng);
    const auto c = tally(recs);
    CHECK(c.failure == 0);
    CHECK(testsupport::binomial_within(c.singlet, n, 0.5));
  }

  SECTION("equal rectilinear bits never succeed") {
    RandomStream rng(102);
    const auto recs = mdi::run_rounds(n, pinned(R, 0), lossless, pinned(R, 0), lossless, ideal,
                                      1.0, rng);
    CHECK(tally(recs).failure == n);
  }

  SECTION("equal diagonal bits give triplets half the time, never singlets") {
    RandomStream rng(103);
    const auto recs = mdi::run_rounds(n, pinned(D, 1), lossless, pinned(D, 1), lossless, ideal,
                                      1.0, rng);
    const auto c = tally(recs);
    CHECK(c.singlet == 0);
    CHECK(testsupport::binomial_within(c.triplet, n, 0.5));
  }

  SECTION("orthogonal diagonal bits give singlets half the time, never triplets") {
    RandomStream rng(104);
    const auto recs = mdi::run_rounds(n, pinned(D, 0), lossless, pinned(D, 1), lossless, ideal,
                                      1.0, rng);
    const auto c = tally(recs);
    CHECK(c.triplet == 0);
    CHECK(testsupport::binomial_within(c.singlet, n, 0.5));
  }
}

TEST_CASE("flip rules recover agreement for every sifted combination") {
  // Bob flips in every case except diagonal triplets.
  CHECK(mdi::bob_flips(R, BsmOutcome::Singlet));
  CHECK(mdi::bob_flips(R, BsmOutcome::Triplet));
  CHECK(mdi::bob_flips(D, BsmOutcome::Singlet));
  CHECK_FALSE(mdi::bob_flips(D, BsmOutcome::Triplet));

  const std::vector<SiftedMdiBit> sifted = {
      {0, 1, R, BsmOutcome::Singlet},
      {1, 1, D, BsmOutcome::Triplet},
      {0, 1, D, BsmOutcome::Singlet},
      {1, 0, R, BsmOutcome::Triplet},
  };
  const auto keys = mdi::apply_flip_rules(sifted, "a", "b");
  CHECK(keys.alice.to_bit_string() == "0101");
  CHECK(keys.bob.to_bit_string() == "0101");
  CHECK(keys.bases == std::vector<Basis>{R, D, D, R});
  CHECK(keys.alice.owner == "a");
}

TEST_CASE("ideal untrusted session yields identical keys and zero qber") {
  RandomStream rng(2025);
  const auto recs = mdi::run_rounds(10000, net::ChannelModel{}, net::ChannelModel{},
                                    DetectorModel{}, 1.0, rng);
  const auto sifted = mdi::sift(recs);
  CHECK(sifted.size() > 1500);
  const auto keys = mdi::apply_flip_rules(sifted);
  REQUIRE(keys.alice.size() == sifted.size());
  CHECK(keys.alice == keys.bob);

  const auto qber = mdi::qber_by_basis(keys.alice, keys.bob, keys.bases);
  REQUIRE(qber.count(R) == 1);
  REQUIRE(qber.count(D) == 1);
  CHECK(qber.at(R) == 0.0);
  CHECK(qber.at(D) == 0.0);
}

TEST_CASE("sift keeps announced successes with matching bases") {
  std::vector<MdiRoundRecord> recs;
  recs.push_back({0, R, 0, D, 1, BsmOutcome::Singlet, false});   // basis mismatch
  recs.push_back({1, R, 0, R, 1, BsmOutcome::Triplet, false});   // kept
  recs.push_back({2, D, 0, D, 0, BsmOutcome::Failure, false});   // failed BSM
  recs.push_back({3, D, 1, D, 0, BsmOutcome::Singlet, false});   // kept
  const auto sifted = mdi::sift(recs);
  REQUIRE(sifted.size() == 2);
  CHECK(sifted[0].basis == R);
  CHECK(sifted[0].outcome == BsmOutcome::Triplet);
  CHECK(sifted[1].basis == D);
  CHECK(sifted[1].alice == 1);
}

TEST_CASE("overall success and sifted fractions match the oracle") {
  // Freeze the expected success fraction from the distribution oracle, then
  // check Monte Carlo against it. Uniform inputs: average over all 16 pairs.
  double oracle_success = 0.0;
  double oracle_sifted = 0.0;
  for (Basis ba : {R, D}) {
    for (BitValue xa : {0, 1}) {
      for (Basis bb : {R, D}) {
        for (BitValue xb : {0, 1}) {
          const double p = success_probability(optics::bsm_distribution(
              optics::encode(ba, static_cast<BitValue>(xa)),
              optics::encode(bb, static_cast<BitValue>(xb))));
          oracle_success += p / 16.0;
          if (ba == bb) oracle_sifted += p / 16.0;
        }
      }
    }
  }
  CHECK(oracle_success == Approx(0.5).margin(1e-12));
  CHECK(oracle_sifted == Approx(0.25).margin(1e-12));

  RandomStream rng(606);
  const std::size_t n = 100000;
  const auto recs = mdi::run_rounds(n, net::ChannelModel{}, net::ChannelModel{},
                                    DetectorModel{}, 1.0, rng);
  const auto c = tally(recs);
  CHECK(testsupport::binomial_within(c.singlet + c.triplet, n, oracle_success));
  CHECK(testsupport::binomial_within(mdi::sift(recs).size(), n, oracle_sifted));
}

TEST_CASE("announcements carry no information about individual bits") {
  RandomStream rng(909);
  const std::size_t n = 100000;
  const auto recs = mdi::run_rounds(n, net::ChannelModel{}, net::ChannelModel{},
                                    DetectorModel{}, 1.0, rng);
  std::size_t singlet_total = 0, singlet_zero = 0;
  std::size_t triplet_total = 0, triplet_zero = 0;
  for (const auto& s : mdi::sift(recs)) {
    if (s.outcome == BsmOutcome::Singlet) {
      ++singlet_total;
      if (s.alice == 0) ++singlet_zero;
    } else {
      ++triplet_total;
      if (s.alice == 0) ++triplet_zero;
    }
  }
  REQUIRE(singlet_total > 5000);
  REQUIRE(triplet_total > 5000);
  CHECK(testsupport::binomial_within(singlet_zero, singlet_total, 0.5));
  CHECK(testsupport::binomial_within(triplet_zero, triplet_total, 0.5));
}

TEST_CASE("lost photons fail without dark counts and fake successes with them") {
  const std::size_t n = 40000;

  SECTION("sifted rate scales with the product of both transmittances") {
    net::ChannelModel half;
    half.length_km = 50.0 * std::log10(2.0);  // transmittance 1/2
    RandomStream rng(404);
    const auto recs = mdi::run_rounds(n, half, half, DetectorModel{}, 1.0, rng);
    const auto c = tally(recs);
    CHECK(testsupport::binomial_within(c.singlet + c.triplet, n, 0.25 * 0.5));
  }

  SECTION("dark coincidences announce successes even with no photons") {
    net::ChannelModel opaque;
    opaque.length_km = 1.0e6;
    DetectorModel noisy;
    noisy.dark_count_prob = 0.05;
    RandomStream rng(405);
    const auto recs = mdi::run_rounds(n, opaque, opaque, noisy, 1.0, rng);
    const auto c = tally(recs);
    // Four orthogonal detector pairs, each at d^2 (1-d)^2.
    const double p = 4.0 * 0.05 * 0.05 * 0.95 * 0.95;
    CHECK(c.singlet + c.triplet > 0);
    CHECK(testsupport::binomial_within(c.singlet + c.triplet, n, p));
  }
}

TEST_CASE("distinguishable photons scramble diagonal keys but not rectilinear ones") {
  const net::ChannelModel lossless;
  const DetectorModel ideal;

  RandomStream rng(707);
  const auto diag = mdi::run_rounds(200000, pinned_basis(D), lossless, pinned_basis(D), lossless,
                                    ideal, 0.0, rng);
  const auto dkeys = mdi::apply_flip_rules(mdi::sift(diag));
  REQUIRE(dkeys.alice.size() > 90000);
  const auto dq = mdi::qber_by_basis(dkeys.alice, dkeys.bob, dkeys.bases);
  CHECK(dq.at(D) == Approx(0.5).margin(0.02));

  const auto rect = mdi::run_rounds(50000, pinned_basis(R), lossless, pinned_basis(R), lossless,
                                    ideal, 0.0, rng);
  const auto rkeys = mdi::apply_flip_rules(mdi::sift(rect));
  REQUIRE(rkeys.alice.size() > 10000);
  const auto rq = mdi::qber_by_basis(rkeys.alice, rkeys.bob, rkeys.bases);
  CHECK(rq.at(R) == 0.0);
}

TEST_CASE("sifted rate responds quadratically to detector efficiency") {
  const net::ChannelModel lossless;
  const std::size_t n = 100000;

  RandomStream rng_hi(808);
  DetectorModel hi;
  hi.efficiency = 0.8;
  const std::size_t s_hi = mdi::sift(
      mdi::run_rounds(n, lossless, lossless, hi, 1.0, rng_hi)).size();

  RandomStream rng_lo(809);
  DetectorModel lo;
  lo.efficiency = 0.4;
  const std::size_t s_lo = mdi::sift(
      mdi::run_rounds(n, lossless, lossless, lo, 1.0, rng_lo)).size();

  const double ratio = static_cast<double>(s_hi) / static_cast<double>(s_lo);
  CHECK(ratio == Approx(4.0).epsilon(0.10));
}

TEST_CASE("qber_by_basis counts per-basis mismatches") {
  const auto a = KeyMaterial::from_bit_string("0011");
  const auto b = KeyMaterial::from_bit_string("0111");
  const std::vector<Basis> bases = {R, R, D, D};
  const auto q = mdi::qber_by_basis(a, b, bases);
  CHECK(q.at(R) == 0.5);
  CHECK(q.at(D) == 0.0);

  // A basis with no bits stays absent.
  const auto only_rect = mdi::qber_by_basis(KeyMaterial::from_bit_string("01"),
                                            KeyMaterial::from_bit_string("01"), {R, R});
  CHECK(only_rect.count(D) == 0);

  CHECK_THROWS_AS(mdi::qber_by_basis(a, b, {R, R}), std::invalid_argument);
}

TEST_CASE("visibility outside the unit interval is rejected") {
  RandomStream rng(1);
  CHECK_THROWS_AS(mdi::run_rounds(1, net::ChannelModel{}, net::ChannelModel{}, DetectorModel{},
                                  1.5, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(mdi::run_rounds(1, net::ChannelModel{}, net::ChannelModel{}, DetectorModel{},
                                  -0.1, rng),
                  std::invalid_argument);
}

TEST_CASE("mdi round log serializes to the fixed csv layout") {
  std::vector<MdiRoundRecord> recs;
  recs.push_back({0, R, 0, R, 1, BsmOutcome::Singlet, false});
  recs.push_back({1, D, 1, R, 0, BsmOutcome::Failure, false});
  CHECK(mdi::to_csv(recs) ==
        "round,a_basis,a_bit,b_basis,b_bit,outcome\n"
        "0,rectilinear,0,rectilinear,1,singlet\n"
        "1,diagonal,1,rectilinear,0,failure\n");
}
