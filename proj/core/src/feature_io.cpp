#include "spkret/feature_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "binio.hpp"
#include "spkret/errors.hpp"

namespace spkret {

static constexpr char kFeatureMagic[9] = "SPKFTR1\0";

void save_features(const std::string& path, const FrameMatrix& fm) {
  binio::Writer w(path);
  w.magic(kFeatureMagic);
  w.u32(static_cast<std::uint32_t>(fm.num_frames()));
  w.u32(static_cast<std::uint32_t>(fm.dim()));
  for (Eigen::Index r = 0; r < fm.num_frames(); ++r) {
    for (Eigen::Index c = 0; c < fm.dim(); ++c) {
      w.f32(static_cast<float>(fm.features(r, c)));
    }
  }
  w.str(fm.segment_id);
  w.close();
}

FrameMatrix load_features(const std::string& path) {
  binio::Reader r(path);
  r.magic(kFeatureMagic);
  const std::uint32_t n = r.u32();
  const std::uint32_t d = r.u32();
  if (n == 0 || d == 0) throw CorruptFile(path + ": empty feature matrix");

  FrameMatrix fm;
  fm.features.resize(n, d);
  for (std::uint32_t row = 0; row < n; ++row) {
    for (std::uint32_t col = 0; col < d; ++col) {
      const double v = static_cast<double>(r.f32());
      if (!std::isfinite(v)) {
        throw CorruptFile(path + ": non-finite feature value at row " + std::to_string(row));
      }
      fm.features(row, col) = v;
    }
  }
  fm.segment_id = r.str();
  if (fm.segment_id.empty()) throw CorruptFile(path + ": empty segment id");
  return fm;
}

std::vector<FrameMatrix> load_feature_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> paths;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".spkftr") {
      paths.push_back(entry.path().string());
    }
  }
  if (ec) throw IoError(dir + ": " + ec.message());
  std::sort(paths.begin(), paths.end());
  std::vector<FrameMatrix> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(load_features(p));
  return out;
}

}  // namespace spkret
