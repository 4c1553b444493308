// Stable 64-bit FNV-1a hashing for record ids.

#ifndef NERSCRUB_HASH_H_
#define NERSCRUB_HASH_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace nerscrub {

class StableHasher {
 public:
  StableHasher& Add(std::string_view field) {
    for (unsigned char c : field) Mix(c);
    Mix(0x1f);  // field separator
    return *this;
  }
  StableHasher& Add(std::uint64_t n) { return Add(std::string_view(std::to_string(n))); }

  std::uint64_t value() const { return state_; }
  // 16 lowercase hex digits.
  std::string hex() const;

 private:
  void Mix(unsigned char c) {
    state_ ^= c;
    state_ *= 0x100000001b3ULL;
  }
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string StableHasher::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  std::uint64_t v = state_;
  for (int i = 15; i >= 0; --i, v >>= 4) out[i] = kDigits[v & 0xf];
  return out;
}

}  // namespace nerscrub

#endif  // NERSCRUB_HASH_H_
