#pragma once
// Key material: a bit string plus where it sits in the pipeline.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qrelay {

enum class KeyRole : std::uint8_t { Raw, Sifted, Final };

inline std::string to_string(KeyRole r) {
  switch (r) {
    case KeyRole::Raw: return "raw";
    case KeyRole::Sifted: return "sifted";
    case KeyRole::Final: return "final";
  }
  return "?";
}

struct KeyMaterial {
  std::vector<std::uint8_t> bits;  // each 0 or 1
  KeyRole role = KeyRole::Raw;
  std::string owner;
  bool public_announcement = false;

  std::size_t size() const { return bits.size(); }
  bool empty() const { return bits.empty(); }

  std::string to_bit_string() const {
    std::string s;
    s.reserve(bits.size());
    for (std::uint8_t b : bits) s += b ? '1' : '0';
    return s;
  }

  static KeyMaterial from_bit_string(std::string_view s, KeyRole role = KeyRole::Raw,
                                     std::string owner = {}) {
    KeyMaterial k;
    k.role = role;
    k.owner = std::move(owner);
    k.bits.reserve(s.size());
    for (char c : s) {
      if (c != '0' && c != '1') throw std::invalid_argument("key strings are 0/1 only");
      k.bits.push_back(c == '1');
    }
    return k;
  }

  KeyMaterial truncated(std::size_t n) const {
    KeyMaterial k = *this;
    if (k.bits.size() > n) k.bits.resize(n);
    return k;
  }

  bool operator==(const KeyMaterial& other) const { return bits == other.bits; }
};

}  // namespace qrelay
