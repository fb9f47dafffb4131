#pragma once
// The reconfigurable middle node: a BB84 receiver with a per-user key store
// when trusted, a Bell-state-measurement server with a public outcome log when
// untrusted. Also the XOR parity relay and the optical-switch schedule.

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qrelay/key.hpp"
#include "qrelay/optics.hpp"

namespace qrelay::relay {

enum class RelayMode : std::uint8_t { Trusted, Untrusted };

inline std::string to_string(RelayMode m) {
  return m == RelayMode::Trusted ? "trusted" : "untrusted";
}

// Physical receiver layout implied by the mode: trusted mode measures one
// input with both basis branches, untrusted mode interferes two inputs and
// detects rectilinear only.
struct ReceiverConfig {
  int input_ports = 1;
  bool diagonal_branch = true;

  static ReceiverConfig for_mode(RelayMode m) {
    return m == RelayMode::Trusted ? ReceiverConfig{1, true} : ReceiverConfig{2, false};
  }
  bool operator==(const ReceiverConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Parity relay

inline KeyMaterial xor_relay(const KeyMaterial& ka, const KeyMaterial& kb) {
  if (ka.size() != kb.size()) throw std::invalid_argument("parity relay needs equal key lengths");
  KeyMaterial out;
  out.bits.resize(ka.size());
  for (std::size_t i = 0; i < ka.size(); ++i) out.bits[i] = ka.bits[i] ^ kb.bits[i];
  out.role = ka.role;
  out.owner = "relay";
  out.public_announcement = true;
  return out;
}

inline KeyMaterial infer_peer_key(const KeyMaterial& own, const KeyMaterial& kc) {
  if (own.size() != kc.size()) throw std::invalid_argument("parity relay needs equal key lengths");
  KeyMaterial out;
  out.bits.resize(own.size());
  for (std::size_t i = 0; i < own.size(); ++i) out.bits[i] = own.bits[i] ^ kc.bits[i];
  out.role = own.role;
  return out;
}

// ---------------------------------------------------------------------------
// Relay node

struct Announcement {
  std::size_t slot = 0;
  RelayMode mode = RelayMode::Trusted;
  std::string payload;  // outcome name or parity bit string
};

class RelayNode {
 public:
  explicit RelayNode(RelayMode mode = RelayMode::Trusted, optics::DetectorModel det = {})
      : mode_(mode), receiver_(ReceiverConfig::for_mode(mode)), detector_(det) {}

  RelayMode mode() const { return mode_; }
  const ReceiverConfig& receiver() const { return receiver_; }
  const optics::DetectorModel& detector() const { return detector_; }
  bool session_active() const { return in_session_; }

  void set_mode(RelayMode m) {
    if (in_session_) throw std::logic_error("cannot reconfigure the relay mid-session");
    if (m == mode_) return;
    mode_ = m;
    receiver_ = ReceiverConfig::for_mode(m);
    if (m == RelayMode::Untrusted) key_store_.clear();
    events_.push_back("reconfigured to " + to_string(m));
  }

  void begin_session() {
    if (in_session_) throw std::logic_error("session already in progress");
    in_session_ = true;
  }
  void end_session() { in_session_ = false; }

  // Trusted-mode key retention; this is precisely what makes the node a
  // single point of compromise.
  void store_key(const std::string& user, KeyMaterial key) {
    if (mode_ != RelayMode::Trusted) {
      throw std::logic_error("an untrusted relay never holds key material");
    }
    key_store_[user] = std::move(key);
  }

  const std::map<std::string, KeyMaterial>& key_store() const { return key_store_; }
  void purge_keys() { key_store_.clear(); }

  // Trusted mode: publish the bitwise parity of two stored keys, truncated to
  // the common length.
  KeyMaterial announce_parity(std::size_t slot, const std::string& user_a,
                              const std::string& user_b) {
    if (mode_ != RelayMode::Trusted) {
      throw std::logic_error("parity relay is a trusted-mode operation");
    }
    const auto a = key_store_.find(user_a);
    const auto b = key_store_.find(user_b);
    if (a == key_store_.end() || b == key_store_.end()) {
      throw std::invalid_argument("parity relay needs stored keys for both users");
    }
    const std::size_t len = std::min(a->second.size(), b->second.size());
    const KeyMaterial kc = xor_relay(a->second.truncated(len), b->second.truncated(len));
    log_.push_back({slot, mode_, kc.to_bit_string()});
    return kc;
  }

  // Untrusted mode: publish one measurement outcome.
  void announce_outcome(std::size_t slot, optics::BsmOutcome outcome) {
    if (mode_ != RelayMode::Untrusted) {
      throw std::logic_error("outcome announcements are an untrusted-mode operation");
    }
    log_.push_back({slot, mode_, optics::to_string(outcome)});
    outcomes_.push_back(outcome);
  }

  const std::vector<Announcement>& announcements() const { return log_; }
  const std::vector<optics::BsmOutcome>& announced_outcomes() const { return outcomes_; }
  const std::vector<std::string>& events() const { return events_; }

 private:
  RelayMode mode_;
  ReceiverConfig receiver_;
  optics::DetectorModel detector_;
  bool in_session_ = false;
  std::map<std::string, KeyMaterial> key_store_;
  std::vector<Announcement> log_;
  std::vector<optics::BsmOutcome> outcomes_;
  std::vector<std::string> events_;
};

// ---------------------------------------------------------------------------
// Optical-switch schedule

struct SwitchSchedule {
  RelayMode mode = RelayMode::Trusted;
  std::vector<std::vector<std::string>> slots;
};

inline SwitchSchedule schedule(const std::vector<std::string>& users, RelayMode mode,
                               const std::vector<std::pair<std::string, std::string>>& pairing) {
  if (users.size() < 2) throw std::invalid_argument("a network needs at least two users");
  const std::set<std::string> known(users.begin(), users.end());
  for (const auto& [a, b] : pairing) {
    if (a == b) throw std::invalid_argument("a key pair needs two distinct users");
    if (!known.count(a) || !known.count(b)) {
      throw std::invalid_argument("pairing names an unknown user");
    }
  }

  SwitchSchedule out;
  out.mode = mode;
  if (mode == RelayMode::Trusted) {
    for (const auto& u : users) out.slots.push_back({u});
  } else {
    if (pairing.empty()) throw std::invalid_argument("untrusted mode needs at least one pair");
    for (const auto& [a, b] : pairing) out.slots.push_back({a, b});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Announcement log serialization

inline std::string announcements_to_csv(const std::vector<Announcement>& log) {
  std::string out = "slot,announcement,mode\n";
  for (const auto& a : log) {
    out += std::to_string(a.slot);
    out += ',';
    out += a.payload;
    out += ',';
    out += to_string(a.mode);
    out += '\n';
  }
  return out;
}

}  // namespace qrelay::relay
