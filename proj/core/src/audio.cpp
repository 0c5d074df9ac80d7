#include "spkret/audio.hpp"

#include <cstring>
#include <fstream>

#include "spkret/errors.hpp"

namespace spkret {
namespace {

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, const std::string& origin)
      : bytes_(bytes), origin_(origin) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = static_cast<std::uint32_t>(bytes_[pos_]) |
                      static_cast<std::uint32_t>(bytes_[pos_ + 1]) << 8 |
                      static_cast<std::uint32_t>(bytes_[pos_ + 2]) << 16 |
                      static_cast<std::uint32_t>(bytes_[pos_ + 3]) << 24;
    pos_ += 4;
    return v;
  }

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | bytes_[pos_ + 1] << 8);
    pos_ += 2;
    return v;
  }

  std::string tag() {
    need(4);
    std::string t(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return t;
  }

  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::size_t n) const {
    if (remaining() < n) {
      throw CorruptFile(origin_ + ": truncated WAV (needed " + std::to_string(n) +
                        " bytes at offset " + std::to_string(pos_) + ")");
    }
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

constexpr int kRequiredRate = 16000;
constexpr int kWindowSamples = 400;

}  // namespace

SampleBuffer parse_wav(const std::vector<std::uint8_t>& bytes, const std::string& origin) {
  ByteReader r(bytes, origin);

  if (r.tag() != "RIFF") throw CorruptFile(origin + ": missing RIFF magic");
  r.u32();  // declared RIFF payload size; trust actual byte count instead
  if (r.tag() != "WAVE") throw CorruptFile(origin + ": missing WAVE form type");

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t data_offset = 0, data_size = 0;
  bool have_data = false;

  while (r.remaining() >= 8) {
    const std::string id = r.tag();
    const std::uint32_t size = r.u32();
    if (id == "fmt ") {
      if (size < 16) throw CorruptFile(origin + ": fmt chunk too small");
      format = r.u16();
      channels = r.u16();
      rate = r.u32();
      r.u32();  // byte rate
      r.u16();  // block align
      bits = r.u16();
      r.skip(size - 16);
      have_fmt = true;
    } else if (id == "data") {
      r.need(size);
      data_offset = r.pos();
      data_size = size;
      have_data = true;
      r.skip(size);
    } else {
      r.skip(size);
    }
    if (size % 2 == 1 && r.remaining() > 0) r.skip(1);  // chunk padding
  }

  if (!have_fmt) throw CorruptFile(origin + ": no fmt chunk");
  if (!have_data) throw CorruptFile(origin + ": no data chunk");

  if (format != 1 || bits != 16 || channels != 1 || rate != kRequiredRate) {
    throw UnsupportedFormat(origin + ": need PCM 16-bit mono 16000 Hz, got format=" +
                            std::to_string(format) + " bits=" + std::to_string(bits) +
                            " channels=" + std::to_string(channels) +
                            " rate=" + std::to_string(rate));
  }
  if (data_size % 2 != 0) throw CorruptFile(origin + ": odd data chunk size");

  SampleBuffer buf;
  buf.sample_rate = kRequiredRate;
  const std::size_t n = data_size / 2;
  buf.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint16_t lo = bytes[data_offset + 2 * i];
    const std::uint16_t hi = bytes[data_offset + 2 * i + 1];
    buf.samples[i] = static_cast<std::int16_t>(lo | (hi << 8));
  }

  if (buf.samples.size() < kWindowSamples) {
    throw TooShort(origin + ": " + std::to_string(buf.samples.size()) +
                   " samples, need at least " + std::to_string(kWindowSamples));
  }
  return buf;
}

SampleBuffer load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path + ": read failed");
  return parse_wav(bytes, path);
}

}  // namespace spkret
