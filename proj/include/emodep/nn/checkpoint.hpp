#pragma once

// Parameter checkpoint container.
//
// Layout (all integers little-endian):
//   magic   "EDCK"
//   u32     format version (1)
//   u32     tensor count
//   per tensor: u32 name length, name bytes, u32 rows, u32 cols,
//               rows*cols little-endian float32 values
//   u64     FNV-1a of everything after the magic
//
// The trailing hash doubles as the model content hash: it is identical
// whether computed from a file or from in-memory parameters.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "emodep/errors.hpp"
#include "emodep/nn/tensor.hpp"
#include "emodep/util/hash.hpp"

namespace emodep::nn {

using NamedParams = std::vector<std::pair<std::string, Tensor<float>>>;

namespace detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i) & 0xff));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
         std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

inline std::vector<unsigned char> serialize_body(const NamedParams& params) {
  std::vector<unsigned char> body;
  put_u32(body, 1);  // version
  put_u32(body, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    put_u32(body, static_cast<std::uint32_t>(name.size()));
    body.insert(body.end(), name.begin(), name.end());
    put_u32(body, static_cast<std::uint32_t>(t.rows()));
    put_u32(body, static_cast<std::uint32_t>(t.cols()));
    std::size_t off = body.size();
    body.resize(off + t.size() * 4);
    std::memcpy(body.data() + off, t.value().data(), t.size() * 4);
  }
  return body;
}

}  // namespace detail

// Hash of the serialized parameter set. Stable across save/load round trips.
inline std::uint64_t content_hash(const NamedParams& params) {
  auto body = detail::serialize_body(params);
  return fnv1a(body.data(), body.size());
}

inline void save_checkpoint(const std::string& path, const NamedParams& params) {
  auto body = detail::serialize_body(params);
  std::uint64_t h = fnv1a(body.data(), body.size());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write("EDCK", 4);
  out.write(reinterpret_cast<const char*>(body.data()),
            static_cast<std::streamsize>(body.size()));
  unsigned char hb[8];
  for (int i = 0; i < 8; ++i) hb[i] = static_cast<unsigned char>(h >> (8 * i) & 0xff);
  out.write(reinterpret_cast<char*>(hb), 8);
  if (!out) throw IoError("short write: " + path);
}

struct Checkpoint {
  NamedParams params;
  std::uint64_t hash = 0;
};

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 4 + 8 + 8 || std::memcmp(bytes.data(), "EDCK", 4) != 0)
    throw ChecksumError(path + ": not a checkpoint file");
  const std::size_t body_len = bytes.size() - 4 - 8;
  const unsigned char* body = bytes.data() + 4;
  std::uint64_t stored = 0;
  for (int i = 7; i >= 0; --i)
    stored = stored << 8 | bytes[bytes.size() - 8 + i];
  if (fnv1a(body, body_len) != stored)
    throw ChecksumError(path + ": content hash mismatch (corrupt or truncated)");

  using detail::get_u32;
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (pos + n > body_len)
      throw ChecksumError(path + ": truncated checkpoint body");
  };
  need(8);
  std::uint32_t version = get_u32(body + pos);
  pos += 4;
  if (version != 1)
    throw InvalidInput(path + ": unsupported checkpoint version " +
                       std::to_string(version));
  std::uint32_t count = get_u32(body + pos);
  pos += 4;

  Checkpoint ck;
  ck.hash = stored;
  for (std::uint32_t i = 0; i < count; ++i) {
    need(4);
    std::uint32_t name_len = get_u32(body + pos);
    pos += 4;
    need(name_len + 8);
    std::string name(reinterpret_cast<const char*>(body + pos), name_len);
    pos += name_len;
    std::uint32_t rows = get_u32(body + pos);
    std::uint32_t cols = get_u32(body + pos + 4);
    pos += 8;
    std::size_t n = static_cast<std::size_t>(rows) * cols;
    need(n * 4);
    std::vector<float> values(n);
    std::memcpy(values.data(), body + pos, n * 4);
    pos += n * 4;
    ck.params.emplace_back(name, Tensor<float>::from(static_cast<int>(rows),
                                                     static_cast<int>(cols),
                                                     std::move(values)));
  }
  if (pos != body_len) throw ChecksumError(path + ": trailing bytes in checkpoint");
  return ck;
}

// Copies checkpoint values into an existing parameter set, verifying that
// every name and shape lines up exactly.
inline void load_into(const Checkpoint& ck, NamedParams& params) {
  if (ck.params.size() != params.size())
    throw InvalidInput("checkpoint holds " + std::to_string(ck.params.size()) +
                       " tensors, model expects " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [got_name, got] = ck.params[i];
    auto& [want_name, dst] = params[i];
    if (got_name != want_name)
      throw InvalidInput("checkpoint tensor '" + got_name + "' where '" +
                         want_name + "' expected");
    if (got.rows() != dst.rows() || got.cols() != dst.cols())
      throw InvalidInput("checkpoint tensor '" + got_name + "' has shape " +
                         shape_str(got.rows(), got.cols()) + ", model expects " +
                         shape_str(dst.rows(), dst.cols()));
    dst.value() = got.value();
  }
}

}  // namespace emodep::nn
