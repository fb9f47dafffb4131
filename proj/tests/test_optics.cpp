#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "qrelay/optics.hpp"
#include "test_support.hpp"

using namespace qrelay;
using namespace qrelay::optics;
using Catch::Approx;

namespace {

DetectionPattern pat(DetectorId a, DetectorId b) { return DetectionPattern::coincidence(a, b); }
DetectionPattern twice(DetectorId d) { return DetectionPattern::coincidence(d, d); }

}  // namespace

TEST_CASE("jones_of maps the four signal states") {
  CHECK(jones_of(PolarizationState::H).amp_h == std::complex<double>(1.0, 0.0));
  CHECK(jones_of(PolarizationState::H).amp_v == std::complex<double>(0.0, 0.0));
  CHECK(jones_of(PolarizationState::V).amp_v == std::complex<double>(1.0, 0.0));
  CHECK(jones_of(PolarizationState::DPlus).amp_h.real() == Approx(inv_sqrt2));
  CHECK(jones_of(PolarizationState::DPlus).amp_v.real() == Approx(inv_sqrt2));
  CHECK(jones_of(PolarizationState::DMinus).amp_v.real() == Approx(-inv_sqrt2));
  for (PolarizationState s : all_states) {
    CHECK(jones_of(s).norm2() == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("rotate is the physical rotation matrix") {
  // Quarter turn takes H to V.
  const Jones v = rotate(jones_of(PolarizationState::H), 90.0);
  CHECK(std::abs(v.amp_h) == Approx(0.0).margin(1e-15));
  CHECK(v.amp_v.real() == Approx(1.0));

  // 45 deg takes H to +45 light.
  CHECK(testsupport::same_state(rotate(jones_of(PolarizationState::H), 45.0),
                                jones_of(PolarizationState::DPlus)));
  // and -45 light back to H (direct matrix multiplication).
  CHECK(testsupport::same_state(rotate(jones_of(PolarizationState::DMinus), 45.0),
                                jones_of(PolarizationState::H)));

  // Identity at 0 deg, unit norm preserved at arbitrary angles.
  const Jones s = jones_of(PolarizationState::DPlus);
  const Jones s0 = rotate(s, 0.0);
  CHECK(s0.amp_h == s.amp_h);
  CHECK(s0.amp_v == s.amp_v);
  CHECK(rotate(s, 33.7).norm2() == Approx(1.0).margin(1e-12));
}

TEST_CASE("encode is the shared bit-to-state bijection") {
  CHECK(encode(Basis::Rectilinear, 0) == PolarizationState::H);
  CHECK(encode(Basis::Rectilinear, 1) == PolarizationState::V);
  CHECK(encode(Basis::Diagonal, 0) == PolarizationState::DMinus);
  CHECK(encode(Basis::Diagonal, 1) == PolarizationState::DPlus);
}

TEST_CASE("pattern strings are canonical") {
  CHECK(DetectionPattern::none().to_string() == "none");
  CHECK(DetectionPattern::single(DetectorId::H1).to_string() == "H1");
  CHECK(pat(DetectorId::H1, DetectorId::V2).to_string() == "H1+V2");
  CHECK(pat(DetectorId::V2, DetectorId::H1).to_string() == "H1+V2");
  CHECK(pat(DetectorId::V1, DetectorId::H2).to_string() == "V1+H2");
  CHECK(twice(DetectorId::H1).to_string() == "2xH1");
}

TEST_CASE("classify implements the partial Bell-state measurement") {
  CHECK(classify(pat(DetectorId::H1, DetectorId::V1)) == BsmOutcome::Triplet);
  CHECK(classify(pat(DetectorId::H2, DetectorId::V2)) == BsmOutcome::Triplet);
  CHECK(classify(pat(DetectorId::H1, DetectorId::V2)) == BsmOutcome::Singlet);
  CHECK(classify(pat(DetectorId::V1, DetectorId::H2)) == BsmOutcome::Singlet);
  // Ignored events: single clicks, empty slots, bunched photons, parallel pairs.
  CHECK(classify(DetectionPattern::none()) == BsmOutcome::Failure);
  CHECK(classify(DetectionPattern::single(DetectorId::V2)) == BsmOutcome::Failure);
  CHECK(classify(twice(DetectorId::H1)) == BsmOutcome::Failure);
  CHECK(classify(pat(DetectorId::H1, DetectorId::H2)) == BsmOutcome::Failure);
  CHECK(classify(pat(DetectorId::V1, DetectorId::V2)) == BsmOutcome::Failure);
}

TEST_CASE("bsm_distribution reproduces the interference table") {
  SECTION("orthogonal rectilinear inputs split evenly over the four coincidences") {
    const auto d = bsm_distribution(PolarizationState::H, PolarizationState::V);
    REQUIRE(d.size() == 4);
    CHECK(prob_of(d, pat(DetectorId::H1, DetectorId::V1)) == Approx(0.25));
    CHECK(prob_of(d, pat(DetectorId::H2, DetectorId::V2)) == Approx(0.25));
    CHECK(prob_of(d, pat(DetectorId::H1, DetectorId::V2)) == Approx(0.25));
    CHECK(prob_of(d, pat(DetectorId::V1, DetectorId::H2)) == Approx(0.25));
  }
  SECTION("identical rectilinear inputs bunch") {
    const auto d = bsm_distribution(PolarizationState::H, PolarizationState::H);
    REQUIRE(d.size() == 2);
    CHECK(prob_of(d, twice(DetectorId::H1)) == Approx(0.5));
    CHECK(prob_of(d, twice(DetectorId::H2)) == Approx(0.5));
  }
  SECTION("orthogonal diagonal inputs") {
    const auto d = bsm_distribution(PolarizationState::DPlus, PolarizationState::DMinus);
    CHECK(prob_of(d, twice(DetectorId::H1)) == Approx(0.125));
    CHECK(prob_of(d, twice(DetectorId::V1)) == Approx(0.125));
    CHECK(prob_of(d, twice(DetectorId::H2)) == Approx(0.125));
    CHECK(prob_of(d, twice(DetectorId::V2)) == Approx(0.125));
    CHECK(prob_of(d, pat(DetectorId::H1, DetectorId::V2)) == Approx(0.25));
    CHECK(prob_of(d, pat(DetectorId::V1, DetectorId::H2)) == Approx(0.25));
    // Parallel coincidences are interference-forbidden at full visibility.
    CHECK(prob_of(d, pat(DetectorId::H1, DetectorId::H2)) == 0.0);
    CHECK(prob_of(d, pat(DetectorId::V1, DetectorId::V2)) == 0.0);
  }
  SECTION("identical diagonal inputs") {
    const auto d = bsm_distribution(PolarizationState::DPlus, PolarizationState::DPlus);
    CHECK(prob_of(d, pat(DetectorId::H1, DetectorId::V1)) == Approx(0.25));
    CHECK(prob_of(d, pat(DetectorId::H2, DetectorId::V2)) == Approx(0.25));
    CHECK(prob_of(d, twice(DetectorId::H1)) == Approx(0.125));
    CHECK(prob_of(d, twice(DetectorId::V1)) == Approx(0.125));
    CHECK(prob_of(d, twice(DetectorId::H2)) == Approx(0.125));
    CHECK(prob_of(d, twice(DetectorId::V2)) == Approx(0.125));
  }
  SECTION("rejects visibility outside [0, 1]") {
    CHECK_THROWS_AS(bsm_distribution(PolarizationState::H, PolarizationState::V, -0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(bsm_distribution(PolarizationState::H, PolarizationState::V, 1.1),
                    std::invalid_argument);
  }
}

TEST_CASE("bsm_distribution agrees with the permanent oracle") {
  for (PolarizationState a : all_states) {
    for (PolarizationState b : all_states) {
      const auto lib = bsm_distribution(a, b);
      const auto oracle = testsupport::permanent_oracle(jones_of(a), jones_of(b));
      REQUIRE(lib.size() == oracle.size());
      for (const auto& [pattern, p] : oracle) {
        CHECK(prob_of(lib, pattern) == Approx(p).margin(1e-12));
      }
    }
  }
}

TEST_CASE("distribution invariants over all input pairs") {
  for (PolarizationState a : all_states) {
    for (PolarizationState b : all_states) {
      for (double v : {0.0, 0.5, 1.0}) {
        const auto d = bsm_distribution(a, b, v);
        // Normalized, two-photon support only.
        CHECK(probability_sum(d) == Approx(1.0).margin(1e-12));
        for (const auto& [pattern, p] : d) {
          CHECK(pattern.total() == 2);
          CHECK(p >= 0.0);
        }
      }
      // Visibility enters every pattern probability affinely.
      const auto d0 = bsm_distribution(a, b, 0.0);
      const auto d1 = bsm_distribution(a, b, 1.0);
      const auto dh = bsm_distribution(a, b, 0.5);
      std::map<DetectionPattern, double> support;
      for (const auto& [pattern, p] : d0) support[pattern] = 0.0;
      for (const auto& [pattern, p] : d1) support[pattern] = 0.0;
      for (const auto& [pattern, unused] : support) {
        CHECK(prob_of(dh, pattern) ==
              Approx(0.5 * (prob_of(d0, pattern) + prob_of(d1, pattern))).margin(1e-12));
      }
      // Swap symmetry of the aggregated outcome rates.
      const auto dr = bsm_distribution(b, a);
      double singlet_ab = 0, triplet_ab = 0, singlet_ba = 0, triplet_ba = 0;
      for (const auto& [pattern, p] : d1) {
        if (classify(pattern) == BsmOutcome::Singlet) singlet_ab += p;
        if (classify(pattern) == BsmOutcome::Triplet) triplet_ab += p;
      }
      for (const auto& [pattern, p] : dr) {
        if (classify(pattern) == BsmOutcome::Singlet) singlet_ba += p;
        if (classify(pattern) == BsmOutcome::Triplet) triplet_ba += p;
      }
      CHECK(singlet_ab == Approx(singlet_ba).margin(1e-12));
      CHECK(triplet_ab == Approx(triplet_ba).margin(1e-12));
    }
  }
}

TEST_CASE("HOM bunching: identical photons never split across ports") {
  for (PolarizationState s : all_states) {
    const auto d = bsm_distribution(s, s, 1.0);
    double cross_port = 0.0;
    for (const auto& [pattern, p] : d) {
      const bool port1 = pattern.count(DetectorId::H1) || pattern.count(DetectorId::V1);
      const bool port2 = pattern.count(DetectorId::H2) || pattern.count(DetectorId::V2);
      if (port1 && port2) cross_port += p;
    }
    CHECK(cross_port == 0.0);
  }
}

TEST_CASE("splitter sign convention does not change the statistics") {
  for (PolarizationState a : all_states) {
    for (PolarizationState b : all_states) {
      const auto plus = detail::bsm_distribution_signed(jones_of(a), jones_of(b), 1.0, +1.0);
      const auto minus = detail::bsm_distribution_signed(jones_of(a), jones_of(b), 1.0, -1.0);
      REQUIRE(plus.size() == minus.size());
      for (const auto& [pattern, p] : plus) {
        CHECK(prob_of(minus, pattern) == Approx(p).margin(1e-12));
      }
    }
  }
}

TEST_CASE("sampling matches the distribution") {
  RandomStream rng(0x5eed0001);
  const auto d =
      bsm_distribution(PolarizationState::DPlus, PolarizationState::DMinus, 1.0);
  const std::size_t n = 100000;
  std::map<DetectionPattern, std::size_t> hist;
  for (std::size_t i = 0; i < n; ++i) ++hist[sample_pattern(d, rng)];
  for (const auto& [pattern, p] : d) {
    CHECK(testsupport::binomial_within(hist[pattern], n, p));
  }
  // Nothing outside the support.
  for (const auto& [pattern, count] : hist) {
    CHECK(prob_of(d, pattern) > 0.0);
  }
}

TEST_CASE("observe applies efficiency, dark counts, and thresholding") {
  RandomStream rng(0x5eed0002);
  SECTION("threshold collapse of a bunched pair") {
    const auto obs = observe(twice(DetectorId::H1), DetectorModel{1.0, 0.0}, rng);
    CHECK(obs == DetectionPattern::single(DetectorId::H1));
  }
  SECTION("zero efficiency removes everything") {
    const auto obs = observe(pat(DetectorId::H1, DetectorId::V2), DetectorModel{0.0, 0.0}, rng);
    CHECK(obs.total() == 0);
  }
  SECTION("independent survival at eta = 0.5") {
    const std::size_t n = 100000;
    std::size_t both = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto obs =
          observe(pat(DetectorId::H1, DetectorId::V2), DetectorModel{0.5, 0.0}, rng);
      if (obs.count(DetectorId::H1) && obs.count(DetectorId::V2)) ++both;
    }
    CHECK(testsupport::binomial_within(both, n, 0.25));
  }
  SECTION("dark counts click on empty gates") {
    const std::size_t n = 100000;
    std::size_t clicks = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto obs = observe(DetectionPattern::none(), DetectorModel{1.0, 0.01}, rng);
      clicks += obs.count(DetectorId::H1);
    }
    CHECK(testsupport::binomial_within(clicks, n, 0.01));
  }
}

TEST_CASE("bb84_measure projects in the chosen basis") {
  const DetectorModel ideal{1.0, 0.0};
  RandomStream rng(0x5eed0003);

  SECTION("matching basis reproduces the bit") {
    for (int i = 0; i < 1000; ++i) {
      const auto r =
          bb84_measure_in_basis(jones_of(PolarizationState::H), Basis::Rectilinear, rng, ideal);
      REQUIRE(r.has_value());
      CHECK(r->bit == 0);
    }
    for (int i = 0; i < 1000; ++i) {
      const auto r =
          bb84_measure_in_basis(jones_of(PolarizationState::DPlus), Basis::Diagonal, rng, ideal);
      REQUIRE(r.has_value());
      CHECK(r->bit == 1);
    }
  }
  SECTION("conjugate basis gives a random bit") {
    const std::size_t n = 100000;
    std::size_t ones = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r =
          bb84_measure_in_basis(jones_of(PolarizationState::H), Basis::Diagonal, rng, ideal);
      REQUIRE(r.has_value());
      ones += r->bit;
    }
    CHECK(testsupport::binomial_within(ones, n, 0.5));
  }
  SECTION("zero efficiency never detects") {
    for (int i = 0; i < 1000; ++i) {
      CHECK_FALSE(
          bb84_measure(jones_of(PolarizationState::V), rng, DetectorModel{0.0, 0.0}).has_value());
    }
  }
  SECTION("basis choice is fair") {
    const std::size_t n = 100000;
    std::size_t diag = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = bb84_measure(jones_of(PolarizationState::H), rng, ideal);
      REQUIRE(r.has_value());
      if (r->basis == Basis::Diagonal) ++diag;
    }
    CHECK(testsupport::binomial_within(diag, n, 0.5));
  }
  SECTION("lost photons can resurface as lone dark clicks") {
    const DetectorModel dark_only{0.0, 0.001};
    const std::size_t n = 200000;
    std::size_t detected = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (bb84_measure(jones_of(PolarizationState::H), rng, dark_only)) ++detected;
    }
    // One lone click among four detectors: 4 d (1-d)^3.
    const double p = 4 * 0.001 * std::pow(0.999, 3);
    CHECK(testsupport::binomial_within(detected, n, p));
  }
}
