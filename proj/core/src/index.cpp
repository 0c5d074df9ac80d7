#include "spkret/index.hpp"

#include <cmath>
#include <fstream>

#include "binio.hpp"
#include "parallel.hpp"
#include "spkret/errors.hpp"

namespace spkret {

static constexpr char kIndexMagic[9] = "SPKIDX1\0";

RetrievalIndex::BuildOutcome RetrievalIndex::build(
    std::span<const FrameMatrix> segments, const Codebook& cb,
    const std::map<std::string, std::string>* labels, int threads, BuildConfig config) {
  BuildOutcome out;
  out.index.num_bins_ = cb.k();
  out.index.dim_ = cb.dim();
  out.index.config_ = config;

  const auto n = static_cast<std::int64_t>(segments.size());
  std::vector<std::optional<IndexRecord>> built(segments.size());
  std::vector<char> skipped(segments.size(), 0);

  parallel_for(n, threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      const FrameMatrix& seg = segments[static_cast<std::size_t>(i)];
      if (seg.num_frames() < 2) {
        skipped[static_cast<std::size_t>(i)] = 1;
        continue;
      }
      IndexRecord rec;
      rec.segment_id = seg.segment_id;
      rec.histogram = histogram(seg, cb);
      rec.stats = segment_stats(seg);
      if (labels) {
        const auto it = labels->find(seg.segment_id);
        if (it != labels->end()) rec.speaker_label = it->second;
      }
      built[static_cast<std::size_t>(i)] = std::move(rec);
    }
  });

  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (skipped[i]) {
      out.skipped_segments.push_back(segments[i].segment_id);
    } else {
      out.index.records_.push_back(std::move(*built[i]));
    }
  }
  out.index.finalize();
  return out;
}

void RetrievalIndex::finalize() {
  by_id_.clear();
  by_id_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto [it, inserted] = by_id_.emplace(records_[i].segment_id, i);
    if (!inserted) {
      throw DuplicateSegmentId("duplicate segment id '" + records_[i].segment_id + "'");
    }
  }
}

const IndexRecord* RetrievalIndex::find(std::string_view id) const {
  const auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

bool RetrievalIndex::all_labeled() const {
  for (const auto& r : records_) {
    if (!r.labeled()) return false;
  }
  return !records_.empty();
}

void RetrievalIndex::save(const std::string& path) const {
  binio::Writer w(path);
  w.magic(kIndexMagic);
  w.u32(static_cast<std::uint32_t>(records_.size()));
  w.u32(static_cast<std::uint32_t>(num_bins_));
  w.u32(static_cast<std::uint32_t>(dim_));
  for (const auto& rec : records_) {
    w.str(rec.segment_id);
    w.str(rec.speaker_label);
    w.u32(static_cast<std::uint32_t>(rec.histogram.entries.size()));
    for (const auto& e : rec.histogram.entries) {
      w.u32(e.bin);
      w.f32(static_cast<float>(e.value));
    }
    w.u64(static_cast<std::uint64_t>(rec.stats.n));
    for (int i = 0; i < dim_; ++i) w.f64(rec.stats.mean[i]);
    for (int i = 0; i < dim_; ++i) {
      for (int j = 0; j < dim_; ++j) w.f64(rec.stats.cov(i, j));
    }
  }
  w.close();
}

RetrievalIndex RetrievalIndex::load(const std::string& path) {
  binio::Reader r(path);
  r.magic(kIndexMagic);
  const std::uint32_t count = r.u32();
  const std::uint32_t k = r.u32();
  const std::uint32_t d = r.u32();
  if (k == 0 || d == 0) throw CorruptFile(path + ": invalid index header");

  RetrievalIndex idx;
  idx.num_bins_ = static_cast<int>(k);
  idx.dim_ = static_cast<int>(d);
  idx.records_.reserve(count);

  for (std::uint32_t rec_i = 0; rec_i < count; ++rec_i) {
    IndexRecord rec;
    rec.segment_id = r.str();
    if (rec.segment_id.empty()) throw CorruptFile(path + ": empty segment id");
    rec.speaker_label = r.str();

    const std::uint32_t nnz = r.u32();
    rec.histogram.segment_id = rec.segment_id;
    rec.histogram.num_bins = static_cast<int>(k);
    rec.histogram.entries.reserve(nnz);
    double total = 0.0;
    std::int64_t prev_bin = -1;
    for (std::uint32_t e = 0; e < nnz; ++e) {
      const std::uint32_t bin = r.u32();
      const double value = static_cast<double>(r.f32());
      if (bin >= k || static_cast<std::int64_t>(bin) <= prev_bin || !(value > 0.0)) {
        throw CorruptFile(path + ": bad histogram entry in segment '" + rec.segment_id + "'");
      }
      prev_bin = bin;
      rec.histogram.entries.push_back({bin, value});
      total += value;
    }
    if (!(total > 0.0)) {
      throw CorruptFile(path + ": empty histogram for segment '" + rec.segment_id + "'");
    }
    // 32-bit storage rounds the bins; restore unit sum.
    for (auto& e : rec.histogram.entries) e.value /= total;

    const auto n = static_cast<std::int64_t>(r.u64());
    Eigen::VectorXd mean(d);
    for (std::uint32_t i = 0; i < d; ++i) mean[i] = r.f64();
    Eigen::MatrixXd cov(d, d);
    for (std::uint32_t i = 0; i < d; ++i) {
      for (std::uint32_t j = 0; j < d; ++j) cov(i, j) = r.f64();
    }
    if (!mean.allFinite() || !cov.allFinite()) {
      throw CorruptFile(path + ": non-finite statistics for segment '" + rec.segment_id + "'");
    }
    rec.stats = stats_from_moments(rec.segment_id, n, std::move(mean), std::move(cov));
    idx.records_.push_back(std::move(rec));
  }
  if (!r.at_end()) throw CorruptFile(path + ": trailing bytes after last record");
  idx.finalize();
  return idx;
}

std::map<std::string, std::string> read_labels_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open");
  std::map<std::string, std::string> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      throw CorruptFile(path + ":" + std::to_string(line_no) +
                        ": expected 'segment_id<TAB>speaker_id'");
    }
    labels[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return labels;
}

void write_labels_tsv(const std::string& path,
                      const std::map<std::string, std::string>& labels) {
  std::ofstream out(path);
  if (!out) throw IoError(path + ": cannot open for writing");
  for (const auto& [seg, spk] : labels) {
    out << seg << '\t' << spk << '\n';
  }
  if (!out) throw IoError(path + ": write failed");
}

}  // namespace spkret
