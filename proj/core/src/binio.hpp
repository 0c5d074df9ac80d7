#pragma once

// Little-endian binary file helpers shared by the feature, codebook and
// index serializers. Values are written byte-by-byte so the on-disk layout
// does not depend on host endianness.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "spkret/errors.hpp"

namespace spkret::binio {

class Writer {
 public:
  explicit Writer(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError(path + ": cannot open for writing");
  }

  void magic(const char (&tag)[9]) { out_.write(tag, 8); }

  void u32(std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out_.write(reinterpret_cast<const char*>(b), 4);
  }

  void u64(std::uint64_t v) {
    u32(static_cast<std::uint32_t>(v));
    u32(static_cast<std::uint32_t>(v >> 32));
  }

  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }

  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }

  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

  void close() {
    out_.flush();
    if (!out_) throw IoError(path_ + ": write failed");
    out_.close();
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open");
    bytes_.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError(path + ": read failed");
  }

  void magic(const char (&tag)[9]) {
    need(8);
    if (std::memcmp(bytes_.data() + pos_, tag, 8) != 0) {
      throw CorruptFile(path_ + ": bad magic, expected " + std::string(tag, 7));
    }
    pos_ += 8;
  }

  std::uint32_t u32() {
    need(4);
    const auto* b = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
    pos_ += 4;
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
  }

  std::uint64_t u64() {
    const std::uint64_t lo = u32();
    const std::uint64_t hi = u32();
    return lo | (hi << 32);
  }

  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }
  const std::string& path() const { return path_; }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw CorruptFile(path_ + ": truncated (needed " + std::to_string(n) +
                        " bytes at offset " + std::to_string(pos_) + ")");
    }
  }

 private:
  std::string path_;
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace spkret::binio
