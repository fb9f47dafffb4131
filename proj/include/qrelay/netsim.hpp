#pragma once
// Scenario configuration, end-to-end session orchestration over the star
// topology, parameter sweeps, and report serialization.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qrelay/bb84.hpp"
#include "qrelay/channel.hpp"
#include "qrelay/key.hpp"
#include "qrelay/mdi.hpp"
#include "qrelay/optics.hpp"
#include "qrelay/random.hpp"
#include "qrelay/relay.hpp"

namespace qrelay::netsim {

using relay::RelayMode;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UserConfig {
  std::string name;
  net::SourceModel source;
};

struct ScenarioConfig {
  std::vector<UserConfig> users;
  std::map<std::string, net::ChannelModel> channels;  // one per user, star topology
  RelayMode mode = RelayMode::Trusted;
  optics::DetectorModel detector;
  double visibility = 1.0;
  std::size_t rounds = 0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> pairing;
  double sample_fraction = 0.1;  // fraction of sifted bits spent on qber estimation
  bb84::DistillParams distill;
};

// Capitalized spelling used in summaries.
inline std::string mode_name(RelayMode m) {
  return m == RelayMode::Trusted ? "Trusted" : "Untrusted";
}

// ---------------------------------------------------------------------------
// Validation (shared by the JSON path and programmatic configs)

namespace detail {

[[noreturn]] inline void fail(const std::string& msg) { throw ConfigError(msg); }

inline void check_unit(double v, const std::string& path) {
  if (!(v >= 0.0 && v <= 1.0)) fail(path + " must lie in [0, 1]");
}

}  // namespace detail

inline void validate(const ScenarioConfig& cfg) {
  using detail::fail;
  if (cfg.users.size() < 2) fail("users must list at least two users");
  std::set<std::string> names;
  for (std::size_t i = 0; i < cfg.users.size(); ++i) {
    const auto& u = cfg.users[i];
    const std::string path = "users[" + std::to_string(i) + "]";
    if (u.name.empty()) fail(path + ".name must be nonempty");
    if (!names.insert(u.name).second) fail(path + ".name duplicates " + u.name);
    if (u.source.kind == net::SourceKind::WeakCoherent && !(u.source.mu > 0.0)) {
      fail(path + ".source.mu must be > 0 for weak_coherent");
    }
    if (!(u.source.pulse_rate_hz > 0.0)) fail(path + ".source.pulse_rate_hz must be > 0");
  }
  for (const auto& [name, ch] : cfg.channels) {
    const std::string path = "channels." + name;
    if (!names.count(name)) fail(path + " does not correspond to a user");
    if (!(ch.length_km >= 0.0)) fail(path + ".length_km must be >= 0");
    if (!(ch.attenuation_db_per_km >= 0.0)) fail(path + ".attenuation_db_per_km must be >= 0");
    if (!std::isfinite(ch.misalignment_deg)) fail(path + ".misalignment_deg must be finite");
    if (ch.eve && cfg.mode == RelayMode::Untrusted) {
      fail(path + ".eve applies only to trusted-mode links");
    }
  }
  for (const auto& u : cfg.users) {
    if (!cfg.channels.count(u.name)) fail("channels." + u.name + " is missing");
  }
  if (cfg.rounds < 1) fail("rounds must be >= 1");
  detail::check_unit(cfg.detector.efficiency, "relay.detector.efficiency");
  detail::check_unit(cfg.detector.dark_count_prob, "relay.detector.dark_count_prob");
  detail::check_unit(cfg.visibility, "relay.visibility");
  if (cfg.mode == RelayMode::Untrusted && cfg.pairing.empty()) {
    fail("pairing must list at least one pair in untrusted mode");
  }
  for (const auto& [a, b] : cfg.pairing) {
    if (a == b) fail("pairing contains a degenerate pair " + a);
    if (!names.count(a) || !names.count(b)) fail("pairing names an unknown user");
  }
  if (!(cfg.sample_fraction > 0.0 && cfg.sample_fraction <= 1.0)) {
    fail("distill.sample_fraction must lie in (0, 1]");
  }
  detail::check_unit(cfg.distill.compression_ratio, "distill.compression_ratio");
  detail::check_unit(cfg.distill.abort_threshold, "distill.abort_threshold");
}

// ---------------------------------------------------------------------------
// JSON parsing: strict, unknown fields rejected, errors name the field path.

namespace detail {

using nlohmann::json;

inline void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path + " must be an object");
}

inline void reject_unknown(const json& j, const std::string& path,
                           std::initializer_list<const char*> known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) fail("unknown field " + path + "." + it.key());
  }
}

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path + " must be a number");
  return j.get<double>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path + " must be a string");
  return j.get<std::string>();
}

inline net::SourceModel parse_source(const json& j, const std::string& path) {
  expect_object(j, path);
  reject_unknown(j, path, {"kind", "mu", "pulse_rate_hz"});
  net::SourceModel source;
  const auto kind_it = j.find("kind");
  if (kind_it == j.end()) fail(path + ".kind is required");
  const std::string kind = as_string(*kind_it, path + ".kind");
  if (kind == "ideal") {
    source.kind = net::SourceKind::IdealSinglePhoton;
    if (j.contains("mu")) fail(path + ".mu applies only to weak_coherent sources");
  } else if (kind == "weak_coherent") {
    source.kind = net::SourceKind::WeakCoherent;
    if (!j.contains("mu")) fail(path + ".mu is required for weak_coherent");
    source.mu = as_number(j.at("mu"), path + ".mu");
  } else {
    fail(path + ".kind must be \"ideal\" or \"weak_coherent\"");
  }
  if (j.contains("pulse_rate_hz")) {
    source.pulse_rate_hz = as_number(j.at("pulse_rate_hz"), path + ".pulse_rate_hz");
  }
  return source;
}

inline net::ChannelModel parse_channel(const json& j, const std::string& path) {
  expect_object(j, path);
  reject_unknown(j, path, {"length_km", "attenuation_db_per_km", "misalignment_deg", "eve"});
  net::ChannelModel ch;
  if (j.contains("length_km")) ch.length_km = as_number(j.at("length_km"), path + ".length_km");
  if (j.contains("attenuation_db_per_km")) {
    ch.attenuation_db_per_km =
        as_number(j.at("attenuation_db_per_km"), path + ".attenuation_db_per_km");
  }
  if (j.contains("misalignment_deg")) {
    ch.misalignment_deg = as_number(j.at("misalignment_deg"), path + ".misalignment_deg");
  }
  if (j.contains("eve")) {
    const json& e = j.at("eve");
    expect_object(e, path + ".eve");
    reject_unknown(e, path + ".eve", {"intercept_resend"});
    net::EveConfig eve;
    if (e.contains("intercept_resend")) {
      if (!e.at("intercept_resend").is_boolean()) {
        fail(path + ".eve.intercept_resend must be a boolean");
      }
      eve.intercept_resend = e.at("intercept_resend").get<bool>();
    }
    ch.eve = eve;
  }
  return ch;
}

}  // namespace detail

inline ScenarioConfig parse_config(const nlohmann::json& j) {
  using detail::fail;
  using nlohmann::json;
  detail::expect_object(j, "config");
  detail::reject_unknown(j, "config",
                         {"users", "channels", "relay", "rounds", "seed", "pairing", "distill"});
  for (const char* req : {"users", "channels", "relay", "rounds", "seed"}) {
    if (!j.contains(req)) fail(std::string("config.") + req + " is required");
  }

  ScenarioConfig cfg;

  const json& users = j.at("users");
  if (!users.is_array()) fail("users must be an array");
  for (std::size_t i = 0; i < users.size(); ++i) {
    const std::string path = "users[" + std::to_string(i) + "]";
    const json& u = users[i];
    detail::expect_object(u, path);
    detail::reject_unknown(u, path, {"name", "source"});
    if (!u.contains("name")) fail(path + ".name is required");
    UserConfig user;
    user.name = detail::as_string(u.at("name"), path + ".name");
    if (u.contains("source")) user.source = detail::parse_source(u.at("source"), path + ".source");
    cfg.users.push_back(std::move(user));
  }

  const json& channels = j.at("channels");
  detail::expect_object(channels, "channels");
  for (auto it = channels.begin(); it != channels.end(); ++it) {
    cfg.channels[it.key()] = detail::parse_channel(*it, "channels." + it.key());
  }

  const json& rel = j.at("relay");
  detail::expect_object(rel, "relay");
  detail::reject_unknown(rel, "relay", {"mode", "detector", "visibility"});
  if (!rel.contains("mode")) fail("relay.mode is required");
  const std::string mode = detail::as_string(rel.at("mode"), "relay.mode");
  if (mode == "trusted") {
    cfg.mode = RelayMode::Trusted;
  } else if (mode == "untrusted") {
    cfg.mode = RelayMode::Untrusted;
  } else {
    fail("relay.mode must be \"trusted\" or \"untrusted\"");
  }
  if (rel.contains("detector")) {
    const json& det = rel.at("detector");
    detail::expect_object(det, "relay.detector");
    detail::reject_unknown(det, "relay.detector", {"efficiency", "dark_count_prob"});
    if (det.contains("efficiency")) {
      cfg.detector.efficiency = detail::as_number(det.at("efficiency"),
                                                  "relay.detector.efficiency");
    }
    if (det.contains("dark_count_prob")) {
      cfg.detector.dark_count_prob =
          detail::as_number(det.at("dark_count_prob"), "relay.detector.dark_count_prob");
    }
  }
  if (rel.contains("visibility")) {
    cfg.visibility = detail::as_number(rel.at("visibility"), "relay.visibility");
  }

  const json& rounds = j.at("rounds");
  if (!rounds.is_number_integer() || rounds.get<std::int64_t>() < 1) {
    fail("rounds must be a positive integer");
  }
  cfg.rounds = rounds.get<std::size_t>();

  const json& seed = j.at("seed");
  if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
    fail("seed must be a nonnegative integer");
  }
  cfg.seed = seed.get<std::uint64_t>();

  if (j.contains("pairing")) {
    const json& pairing = j.at("pairing");
    if (!pairing.is_array()) fail("pairing must be an array of two-user arrays");
    for (std::size_t i = 0; i < pairing.size(); ++i) {
      const std::string path = "pairing[" + std::to_string(i) + "]";
      const json& p = pairing[i];
      if (!p.is_array() || p.size() != 2) fail(path + " must name exactly two users");
      cfg.pairing.emplace_back(detail::as_string(p[0], path + "[0]"),
                               detail::as_string(p[1], path + "[1]"));
    }
  }

  if (j.contains("distill")) {
    const json& d = j.at("distill");
    detail::expect_object(d, "distill");
    detail::reject_unknown(d, "distill",
                           {"sample_fraction", "compression_ratio", "abort_threshold"});
    if (d.contains("sample_fraction")) {
      cfg.sample_fraction = detail::as_number(d.at("sample_fraction"), "distill.sample_fraction");
    }
    if (d.contains("compression_ratio")) {
      cfg.distill.compression_ratio =
          detail::as_number(d.at("compression_ratio"), "distill.compression_ratio");
    }
    if (d.contains("abort_threshold")) {
      cfg.distill.abort_threshold =
          detail::as_number(d.at("abort_threshold"), "distill.abort_threshold");
    }
  }

  validate(cfg);
  return cfg;
}

inline ScenarioConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid json: ") + e.what());
  }
  return parse_config(j);
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

// ---------------------------------------------------------------------------
// Reports

struct LinkReport {
  std::string link;  // user name (trusted) or "a+b" (untrusted)
  std::size_t rounds = 0;
  std::size_t detected = 0;  // valid gates (trusted) or announced successes (untrusted)
  std::size_t sifted = 0;
  double qber = 0.0;  // estimate from the sacrificed sample
  std::map<optics::Basis, double> qber_basis;  // untrusted diagnostic
  std::size_t final_bits = 0;
  std::size_t multi_photon_rounds = 0;
  bool aborted = false;
  bool pns_exposed = false;  // weak coherent source emitted multi-photon pulses
};

struct PairReport {
  std::string user_a;
  std::string user_b;
  std::size_t parity_bits = 0;
  bool verified = false;
  std::string note;
};

struct SessionReport {
  RelayMode mode = RelayMode::Trusted;
  std::size_t rounds = 0;
  std::uint64_t seed = 0;
  std::vector<LinkReport> links;
  std::vector<PairReport> pairs;  // trusted parity relays
  double wall_time_s = 0.0;       // never serialized to CSV
};

struct PairKeys {
  KeyMaterial a;
  KeyMaterial b;
};

struct SessionResult {
  SessionReport report;
  std::map<std::string, KeyMaterial> link_keys;  // trusted: user -> final key with the relay
  std::map<std::string, PairKeys> pair_keys;     // pair name -> the two users' final keys
  relay::RelayNode node;
  std::map<std::string, std::string> round_csv;  // link -> per-round log
};

inline std::string pair_name(const std::string& a, const std::string& b) { return a + "+" + b; }

// ---------------------------------------------------------------------------
// Session orchestration

namespace detail {

inline const UserConfig& user_by_name(const ScenarioConfig& cfg, const std::string& name) {
  for (const auto& u : cfg.users) {
    if (u.name == name) return u;
  }
  throw ConfigError("unknown user " + name);
}

inline void run_trusted_link(const ScenarioConfig& cfg, const std::string& user,
                             SessionResult& result) {
  auto& node = result.node;
  const auto& source = user_by_name(cfg, user).source;
  const auto& channel = cfg.channels.at(user);
  RandomStream rng(derive_seed(cfg.seed, "bb84:" + user));

  node.begin_session();
  const auto records = bb84::run_rounds(cfg.rounds, source, channel, cfg.detector, rng);

  LinkReport rep;
  rep.link = user;
  rep.rounds = cfg.rounds;
  for (const auto& r : records) {
    if (r.detected) ++rep.detected;
    if (r.multi_photon) ++rep.multi_photon_rounds;
  }
  rep.pns_exposed = rep.multi_photon_rounds > 0;

  auto keys = bb84::sift(records, user, "relay");
  rep.sifted = keys.alice.size();
  result.round_csv[user] = bb84::to_csv(records);

  if (keys.alice.empty()) {
    rep.aborted = true;
  } else {
    const auto est = bb84::estimate_qber(keys.alice, keys.charlie, cfg.sample_fraction, rng);
    rep.qber = est.qber;
    const auto final_keys = bb84::distill(est.k1, est.k2, est.qber, cfg.distill);
    if (!final_keys) {
      rep.aborted = true;
    } else {
      rep.final_bits = final_keys->k1.size();
      result.link_keys[user] = final_keys->k1;
      node.store_key(user, final_keys->k2);
    }
  }
  node.end_session();
  result.report.links.push_back(std::move(rep));
}

inline void relay_pair(const std::string& a, const std::string& b, std::size_t slot,
                       SessionResult& result) {
  PairReport rep;
  rep.user_a = a;
  rep.user_b = b;
  const auto ka = result.link_keys.find(a);
  const auto kb = result.link_keys.find(b);
  if (ka == result.link_keys.end() || kb == result.link_keys.end()) {
    rep.note = "skipped: aborted link";
    result.report.pairs.push_back(std::move(rep));
    return;
  }
  const KeyMaterial kc = result.node.announce_parity(slot, a, b);
  rep.parity_bits = kc.size();

  const std::size_t len = kc.size();
  const KeyMaterial a_infers = relay::infer_peer_key(ka->second.truncated(len), kc);
  const KeyMaterial b_own = kb->second.truncated(len);
  const KeyMaterial b_infers = relay::infer_peer_key(b_own, kc);
  rep.verified = a_infers == b_own && b_infers == ka->second.truncated(len);
  rep.note = rep.verified ? "ok" : "parity verification failed";
  result.pair_keys[pair_name(a, b)] = {a_infers, b_own};
  result.report.pairs.push_back(std::move(rep));
}

inline void run_untrusted_pair(const ScenarioConfig& cfg, const std::string& a,
                               const std::string& b, std::size_t slot, SessionResult& result) {
  auto& node = result.node;
  mdi::UserInput ua, ub;
  ua.source = user_by_name(cfg, a).source;
  ub.source = user_by_name(cfg, b).source;
  RandomStream rng(derive_seed(cfg.seed, "mdi:" + a + ":" + b));

  node.begin_session();
  const auto records = mdi::run_rounds(cfg.rounds, ua, cfg.channels.at(a), ub,
                                       cfg.channels.at(b), cfg.detector, cfg.visibility, rng);

  LinkReport rep;
  rep.link = pair_name(a, b);
  rep.rounds = cfg.rounds;
  for (const auto& r : records) {
    node.announce_outcome(slot, r.announced);
    if (r.announced != optics::BsmOutcome::Failure) ++rep.detected;
    if (r.multi_photon) ++rep.multi_photon_rounds;
  }
  rep.pns_exposed = rep.multi_photon_rounds > 0;

  const auto sifted = mdi::sift(records);
  rep.sifted = sifted.size();
  result.round_csv[rep.link] = mdi::to_csv(records);

  if (sifted.empty()) {
    rep.aborted = true;
  } else {
    const auto keys = mdi::apply_flip_rules(sifted, a, b);
    rep.qber_basis = mdi::qber_by_basis(keys.alice, keys.bob, keys.bases);
    const auto est = bb84::estimate_qber(keys.alice, keys.bob, cfg.sample_fraction, rng);
    rep.qber = est.qber;
    const auto final_keys = bb84::distill(est.k1, est.k2, est.qber, cfg.distill);
    if (!final_keys) {
      rep.aborted = true;
    } else {
      rep.final_bits = final_keys->k1.size();
      result.pair_keys[rep.link] = {final_keys->k1, final_keys->k2};
    }
  }
  node.end_session();
  result.report.links.push_back(std::move(rep));
}

}  // namespace detail

inline SessionResult run_session(const ScenarioConfig& cfg) {
  validate(cfg);
  const auto t0 = std::chrono::steady_clock::now();

  SessionResult result;
  result.node = relay::RelayNode(cfg.mode, cfg.detector);
  result.report.mode = cfg.mode;
  result.report.rounds = cfg.rounds;
  result.report.seed = cfg.seed;

  std::vector<std::string> names;
  names.reserve(cfg.users.size());
  for (const auto& u : cfg.users) names.push_back(u.name);
  const auto sched = relay::schedule(names, cfg.mode, cfg.pairing);

  if (cfg.mode == RelayMode::Trusted) {
    for (const auto& slot : sched.slots) {
      detail::run_trusted_link(cfg, slot[0], result);
    }
    for (std::size_t p = 0; p < cfg.pairing.size(); ++p) {
      detail::relay_pair(cfg.pairing[p].first, cfg.pairing[p].second, sched.slots.size() + p,
                         result);
    }
  } else {
    for (std::size_t s = 0; s < sched.slots.size(); ++s) {
      detail::run_untrusted_pair(cfg, sched.slots[s][0], sched.slots[s][1], s, result);
    }
  }

  result.report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

// ---------------------------------------------------------------------------
// Parameter sweeps

inline const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names = {
      "length_km", "efficiency", "dark_count_prob", "visibility", "misalignment_deg"};
  return names;
}

namespace detail {

inline std::string value_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline ScenarioConfig at_sweep_point(const ScenarioConfig& base, const std::string& param,
                                     double value) {
  ScenarioConfig cfg = base;
  if (param == "length_km") {
    for (auto& [name, ch] : cfg.channels) ch.length_km = value;
  } else if (param == "efficiency") {
    cfg.detector.efficiency = value;
  } else if (param == "dark_count_prob") {
    cfg.detector.dark_count_prob = value;
  } else if (param == "visibility") {
    cfg.visibility = value;
  } else if (param == "misalignment_deg") {
    for (auto& [name, ch] : cfg.channels) ch.misalignment_deg = value;
  } else {
    fail("unknown sweep parameter " + param);
  }
  cfg.seed = derive_seed(base.seed, param + "=" + value_label(value));
  return cfg;
}

}  // namespace detail

struct SweepPoint {
  double value = 0.0;
  SessionReport report;
};

inline std::vector<SweepPoint> sweep(const ScenarioConfig& base, const std::string& param,
                                     const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<SweepPoint> points;
  points.reserve(values.size());
  for (double v : values) {
    const ScenarioConfig cfg = detail::at_sweep_point(base, param, v);
    points.push_back({v, run_session(cfg).report});
  }
  return points;
}

// ---------------------------------------------------------------------------
// Serialization: CSV tables (no wall time, byte-stable) and a text summary.

namespace detail {

inline std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string basis_qber_cell(const LinkReport& rep, optics::Basis basis) {
  const auto it = rep.qber_basis.find(basis);
  return it == rep.qber_basis.end() ? std::string() : fmt6(it->second);
}

inline void append_link_row(std::string& out, const SessionReport& r, const LinkReport& link) {
  out += link.link;
  out += ',';
  out += to_string(r.mode);
  out += ',';
  out += std::to_string(link.rounds);
  out += ',';
  out += std::to_string(link.detected);
  out += ',';
  out += std::to_string(link.sifted);
  out += ',';
  out += fmt6(link.qber);
  out += ',';
  out += basis_qber_cell(link, optics::Basis::Rectilinear);
  out += ',';
  out += basis_qber_cell(link, optics::Basis::Diagonal);
  out += ',';
  out += std::to_string(link.final_bits);
  out += ',';
  out += std::to_string(link.multi_photon_rounds);
  out += ',';
  out += link.aborted ? '1' : '0';
  out += '\n';
}

}  // namespace detail

inline std::string report_to_csv(const SessionReport& r) {
  std::string out =
      "link,mode,rounds,detected,sifted,qber,qber_rectilinear,qber_diagonal,final_bits,"
      "multi_photon_rounds,aborted\n";
  for (const auto& link : r.links) detail::append_link_row(out, r, link);
  return out;
}

inline std::string sweep_to_csv(const std::string& param, const std::vector<SweepPoint>& points) {
  std::string out =
      "param,value,link,mode,rounds,detected,sifted,qber,qber_rectilinear,qber_diagonal,"
      "final_bits,multi_photon_rounds,aborted\n";
  for (const auto& point : points) {
    for (const auto& link : point.report.links) {
      out += param;
      out += ',';
      out += detail::value_label(point.value);
      out += ',';
      detail::append_link_row(out, point.report, link);
    }
  }
  return out;
}

inline std::string summary_text(const SessionReport& r) {
  std::string out;
  out += "mode=" + mode_name(r.mode) + "\n";
  out += "rounds=" + std::to_string(r.rounds) + "\n";
  out += "seed=" + std::to_string(r.seed) + "\n";
  for (const auto& link : r.links) {
    out += "link " + link.link + ": ";
    if (link.aborted) out += "ABORTED ";
    out += "detected=" + std::to_string(link.detected);
    out += " sifted=" + std::to_string(link.sifted);
    out += " qber=" + detail::fmt6(link.qber);
    for (const auto& [basis, q] : link.qber_basis) {
      out += " qber_" + optics::to_string(basis) + "=" + detail::fmt6(q);
    }
    out += " final_bits=" + std::to_string(link.final_bits);
    out += "\n";
  }
  for (const auto& pair : r.pairs) {
    out += "pair " + pair_name(pair.user_a, pair.user_b) + ": parity_bits=" +
           std::to_string(pair.parity_bits) +
           " verified=" + (pair.verified ? "yes" : "no");
    if (!pair.note.empty() && pair.note != "ok") out += " (" + pair.note + ")";
    out += "\n";
  }
  for (const auto& link : r.links) {
    if (link.pns_exposed) {
      out += "warning: link " + link.link + " sent " +
             std::to_string(link.multi_photon_rounds) +
             " multi-photon pulses (photon-number-splitting exposure)\n";
    }
  }
  out += "wall_time_s=" + detail::fmt6(r.wall_time_s) + "\n";
  return out;
}

}  // namespace qrelay::netsim
