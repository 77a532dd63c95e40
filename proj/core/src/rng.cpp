#include "floodda/rng.hpp"

namespace floodda {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t root, std::string_view name,
                             std::uint64_t i0, std::uint64_t i1,
                             std::uint64_t i2) {
  // FNV-1a over the stream name, then fold in root and indices through mix64.
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  h = mix64(h ^ mix64(root));
  h = mix64(h ^ mix64(i0 + 0x1d8e4e27c47d124full));
  h = mix64(h ^ mix64(i1 + 0x6c62272e07bb0142ull));
  h = mix64(h ^ mix64(i2 + 0x27d4eb2f165667c5ull));
  return h;
}

} // namespace floodda
