#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace emodep {

// Incremental 64-bit FNV-1a. Not cryptographic; used for checkpoint content
// hashes, feature-cache keys and corpus fingerprints.
class Fnv1a {
 public:
  Fnv1a& update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= static_cast<std::uint64_t>(p[i]);
      h_ *= 0x100000001b3ull;
    }
    return *this;
  }

  Fnv1a& update(std::string_view s) { return update(s.data(), s.size()); }

  template <class T>
  Fnv1a& update_value(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    return update(&v, sizeof(T));
  }

  std::uint64_t digest() const noexcept { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

inline std::uint64_t fnv1a(const void* data, std::size_t n) {
  return Fnv1a{}.update(data, n).digest();
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf);
}

}  // namespace emodep
