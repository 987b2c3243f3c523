#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

namespace bisonet {

// 64-bit FNV-1a content fingerprint. Used to tag artifacts (vocabulary,
// corpus, model, config) so the pipeline can refuse mismatched inputs and
// skip stages whose inputs are unchanged. Not a cryptographic hash.
class Fnv1a64 {
 public:
  Fnv1a64& update(const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      state_ ^= bytes[i];
      state_ *= 0x100000001b3ull;
    }
    return *this;
  }

  Fnv1a64& update(std::string_view s) { return update(s.data(), s.size()); }

  Fnv1a64& update_u64(std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
    return update(bytes, 8);
  }

  Fnv1a64& update_i64(std::int64_t v) { return update_u64(static_cast<std::uint64_t>(v)); }

  Fnv1a64& update_double(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    return update_u64(bits);
  }

  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ull;
};

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

// Hash of a file's raw bytes. Throws std::runtime_error if unreadable.
std::uint64_t hash_file(const std::string& path);

}  // namespace bisonet
