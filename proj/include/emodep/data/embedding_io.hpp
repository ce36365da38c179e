#pragma once

// Per-utterance embedding files: an 8-byte little-endian dimension header
// followed by that many little-endian float32 values.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "emodep/errors.hpp"

namespace emodep::data {

inline void save_embedding(const std::string& path, const std::vector<float>& v) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embedding: " + path);
  std::uint64_t dim = v.size();
  unsigned char hb[8];
  for (int i = 0; i < 8; ++i) hb[i] = static_cast<unsigned char>(dim >> (8 * i) & 0xff);
  out.write(reinterpret_cast<char*>(hb), 8);
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * 4));
  if (!out) throw IoError("short write: " + path);
}

inline std::vector<float> load_embedding(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("embedding not found: " + path);
  unsigned char hb[8];
  in.read(reinterpret_cast<char*>(hb), 8);
  if (in.gcount() != 8) throw InvalidInput(path + ": missing dimension header");
  std::uint64_t dim = 0;
  for (int i = 7; i >= 0; --i) dim = dim << 8 | hb[i];
  if (dim == 0 || dim > (1u << 20))
    throw InvalidInput(path + ": implausible embedding dimension " + std::to_string(dim));
  std::vector<float> v(dim);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(dim * 4));
  if (static_cast<std::uint64_t>(in.gcount()) != dim * 4)
    throw InvalidInput(path + ": truncated embedding payload");
  return v;
}

}  // namespace emodep::data
