#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace coord {

// 128-bit digest of a canonical byte encoding (MurmurHash3 x64 variant,
// fixed seed so digests are stable across runs and platforms).
struct Fingerprint {
  uint64_t hi = 0;
  uint64_t lo = 0;
  bool operator==(const Fingerprint&) const = default;
  bool operator<(const Fingerprint& o) const { return hi != o.hi ? hi < o.hi : lo < o.lo; }
};

Fingerprint fingerprint_bytes(const std::vector<uint8_t>& bytes);
std::string to_hex(const Fingerprint& fp);

}  // namespace coord
