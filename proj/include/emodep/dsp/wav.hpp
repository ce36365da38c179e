#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "emodep/errors.hpp"

namespace emodep::dsp {

inline constexpr int kSampleRate = 16000;

// One mono utterance of 16 kHz signed 16-bit PCM.
struct AudioClip {
  std::vector<std::int16_t> samples;
  int sample_rate = kSampleRate;
  std::string id;
};

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
         std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}
inline std::uint16_t read_u16(const unsigned char* p) {
  return std::uint16_t(p[0] | p[1] << 8);
}

}  // namespace detail

// Reads a RIFF/WAVE file. Only PCM, 16-bit, mono, 16 kHz is accepted; any
// other encoding is rejected with a diagnostic naming the offending field.
inline AudioClip read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open wav file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44)
    throw InvalidInput(path + ": file too small for a RIFF/WAVE header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0)
    throw InvalidInput(path + ": chunk id is not 'RIFF'");
  if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw InvalidInput(path + ": RIFF format is not 'WAVE'");

  using detail::read_u16;
  using detail::read_u32;

  AudioClip clip;
  clip.id = std::filesystem::path(path).stem().string();
  bool have_fmt = false, have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    char cid[5] = {0};
    std::memcpy(cid, bytes.data() + pos, 4);
    std::uint32_t csize = read_u32(bytes.data() + pos + 4);
    std::size_t body = pos + 8;
    if (body + csize > bytes.size())
      throw InvalidInput(path + ": chunk '" + cid + "' overruns the file");
    if (std::strcmp(cid, "fmt ") == 0) {
      if (csize < 16) throw InvalidInput(path + ": fmt chunk too small");
      std::uint16_t audio_format = read_u16(bytes.data() + body);
      std::uint16_t channels = read_u16(bytes.data() + body + 2);
      std::uint32_t rate = read_u32(bytes.data() + body + 4);
      std::uint16_t bits = read_u16(bytes.data() + body + 14);
      if (audio_format != 1)
        throw InvalidInput(path + ": audio_format = " +
                           std::to_string(audio_format) + ", want 1 (PCM)");
      if (channels != 1)
        throw InvalidInput(path + ": num_channels = " +
                           std::to_string(channels) + ", want 1 (mono)");
      if (rate != kSampleRate)
        throw InvalidInput(path + ": sample_rate = " + std::to_string(rate) +
                           ", want " + std::to_string(kSampleRate));
      if (bits != 16)
        throw InvalidInput(path + ": bits_per_sample = " +
                           std::to_string(bits) + ", want 16");
      have_fmt = true;
    } else if (std::strcmp(cid, "data") == 0) {
      clip.samples.resize(csize / 2);
      for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        std::uint16_t u = read_u16(bytes.data() + body + 2 * i);
        clip.samples[i] = static_cast<std::int16_t>(u);
      }
      have_data = true;
    }
    pos = body + csize + (csize & 1);  // chunks are word-aligned
  }
  if (!have_fmt) throw InvalidInput(path + ": missing fmt chunk");
  if (!have_data) throw InvalidInput(path + ": missing data chunk");
  return clip;
}

inline void write_wav(const std::string& path, const AudioClip& clip) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write wav file: " + path);
  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>(v >> 8 & 0xff),
                          static_cast<unsigned char>(v >> 16 & 0xff),
                          static_cast<unsigned char>(v >> 24 & 0xff)};
    out.write(reinterpret_cast<char*>(b), 4);
  };
  auto put_u16 = [&](std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>(v >> 8 & 0xff)};
    out.write(reinterpret_cast<char*>(b), 2);
  };
  std::uint32_t data_size = static_cast<std::uint32_t>(clip.samples.size() * 2);
  out.write("RIFF", 4);
  put_u32(36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(16);
  put_u16(1);                        // PCM
  put_u16(1);                        // mono
  put_u32(kSampleRate);
  put_u32(kSampleRate * 2);          // byte rate
  put_u16(2);                        // block align
  put_u16(16);                       // bits per sample
  out.write("data", 4);
  put_u32(data_size);
  for (std::int16_t s : clip.samples)
    put_u16(static_cast<std::uint16_t>(s));
  if (!out) throw IoError("short write: " + path);
}

}  // namespace emodep::dsp
