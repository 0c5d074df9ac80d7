#include "spkret/features.hpp"

#include <cmath>
#include <complex>
#include <utility>

#include "spkret/errors.hpp"

namespace spkret {
namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// In-place iterative radix-2 FFT. Size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

/// Triangular mel filterbank as a (filters x spectrum_bins) weight matrix.
Eigen::MatrixXd mel_filterbank(const FeatureConfig& cfg) {
  const int bins = cfg.fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(cfg.fmin_hz);
  const double mel_hi = hz_to_mel(cfg.fmax_hz);
  std::vector<double> edges_hz(cfg.mel_filters + 2);
  for (int i = 0; i < cfg.mel_filters + 2; ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * i / (cfg.mel_filters + 1);
    edges_hz[i] = mel_to_hz(mel);
  }
  const double bin_hz = 16000.0 / cfg.fft_size;
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.mel_filters, bins);
  for (int m = 0; m < cfg.mel_filters; ++m) {
    const double lo = edges_hz[m], center = edges_hz[m + 1], hi = edges_hz[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = k * bin_hz;
      if (f > lo && f < center) {
        fb(m, k) = (f - lo) / (center - lo);
      } else if (f >= center && f < hi) {
        fb(m, k) = (hi - f) / (hi - center);
      }
    }
  }
  return fb;
}

/// DCT-II basis, (num_coeffs x mel_filters), unscaled:
///   c_i = sum_j E_j * cos(pi * i * (2j + 1) / (2 * M))
Eigen::MatrixXd dct_basis(int num_coeffs, int mel_filters) {
  Eigen::MatrixXd dct(num_coeffs, mel_filters);
  for (int i = 0; i < num_coeffs; ++i) {
    for (int j = 0; j < mel_filters; ++j) {
      dct(i, j) = std::cos(kPi * i * (2.0 * j + 1.0) / (2.0 * mel_filters));
    }
  }
  return dct;
}

}  // namespace

FramedSignal frame_signal(const SampleBuffer& buf, const FeatureConfig& cfg) {
  const auto len = static_cast<std::int64_t>(buf.samples.size());
  if (len < cfg.frame_length) {
    throw TooShort("signal of " + std::to_string(len) + " samples is shorter than one " +
                   std::to_string(cfg.frame_length) + "-sample window");
  }
  const std::int64_t n_frames = (len - cfg.frame_length) / cfg.frame_hop + 1;

  Eigen::VectorXd window(cfg.frame_length);
  for (int i = 0; i < cfg.frame_length; ++i) {
    window[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * i / (cfg.frame_length - 1));
  }

  FramedSignal out;
  out.frames.resize(n_frames, cfg.frame_length);
  out.log_energies.resize(n_frames);
  out.frame_times.resize(n_frames);

  for (std::int64_t t = 0; t < n_frames; ++t) {
    const std::int64_t start = t * cfg.frame_hop;
    double energy = 0.0;
    for (int i = 0; i < cfg.frame_length; ++i) {
      const double s = static_cast<double>(buf.samples[start + i]);
      energy += s * s;
    }
    out.log_energies[t] = std::log(std::max(energy, cfg.log_floor));
    out.frame_times[t] = static_cast<double>(start) / buf.sample_rate;

    // Frame-local pre-emphasis: the first sample uses itself as predecessor.
    for (int i = cfg.frame_length - 1; i >= 1; --i) {
      const double cur = static_cast<double>(buf.samples[start + i]);
      const double prev = static_cast<double>(buf.samples[start + i - 1]);
      out.frames(t, i) = (cur - cfg.preemphasis * prev) * window[i];
    }
    const double first = static_cast<double>(buf.samples[start]);
    out.frames(t, 0) = (first - cfg.preemphasis * first) * window[0];
  }
  return out;
}

Eigen::MatrixXd mfcc_sequence(const Eigen::MatrixXd& frames, const FeatureConfig& cfg) {
  const Eigen::Index n_frames = frames.rows();
  const int bins = cfg.fft_size / 2 + 1;
  const Eigen::MatrixXd fb = mel_filterbank(cfg);
  const Eigen::MatrixXd dct = dct_basis(cfg.num_coeffs, cfg.mel_filters);

  Eigen::MatrixXd coeffs(n_frames, cfg.num_coeffs);
  std::vector<std::complex<double>> spectrum(cfg.fft_size);
  Eigen::VectorXd magnitude(bins);
  for (Eigen::Index t = 0; t < n_frames; ++t) {
    for (int i = 0; i < cfg.fft_size; ++i) {
      spectrum[i] = i < frames.cols() ? std::complex<double>(frames(t, i), 0.0)
                                      : std::complex<double>(0.0, 0.0);
    }
    fft_radix2(spectrum);
    for (int k = 0; k < bins; ++k) magnitude[k] = std::abs(spectrum[k]);

    Eigen::VectorXd mel_log = fb * magnitude;
    for (int m = 0; m < cfg.mel_filters; ++m) {
      mel_log[m] = std::log(std::max(mel_log[m], cfg.log_floor));
    }
    coeffs.row(t) = (dct * mel_log).transpose();
  }
  return coeffs;
}

Eigen::MatrixXd append_deltas(const Eigen::MatrixXd& mfcc) {
  const Eigen::Index n = mfcc.rows();
  const Eigen::Index c = mfcc.cols();
  Eigen::MatrixXd out(n, 2 * c);
  out.leftCols(c) = mfcc;

  // Regression window +-2, denominator 2 * (1^2 + 2^2) = 10.
  auto clamp = [n](Eigen::Index t) { return std::min(std::max(t, Eigen::Index{0}), n - 1); };
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index j = 0; j < c; ++j) {
      const double num = 1.0 * (mfcc(clamp(t + 1), j) - mfcc(clamp(t - 1), j)) +
                         2.0 * (mfcc(clamp(t + 2), j) - mfcc(clamp(t - 2), j));
      out(t, c + j) = num / 10.0;
    }
  }
  return out;
}

FrameMatrix filter_low_energy(FrameMatrix frames, const std::vector<double>& log_energies,
                              double drop_db) {
  const Eigen::Index n = frames.num_frames();
  if (static_cast<Eigen::Index>(log_energies.size()) != n) {
    throw DimensionMismatch("segment '" + frames.segment_id + "': " + std::to_string(n) +
                            " frames but " + std::to_string(log_energies.size()) +
                            " energy values");
  }
  double max_e = log_energies[0];
  for (double e : log_energies) max_e = std::max(max_e, e);
  // drop_db is in decibels; energies are natural logs of power.
  const double threshold_nats = drop_db * std::log(10.0) / 10.0;

  std::vector<Eigen::Index> keep;
  keep.reserve(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    if (max_e - log_energies[t] <= threshold_nats) keep.push_back(t);
  }
  if (keep.empty()) {
    Eigen::Index best = 0;
    for (Eigen::Index t = 1; t < n; ++t) {
      if (log_energies[t] > log_energies[best]) best = t;
    }
    keep.push_back(best);
  }
  if (static_cast<Eigen::Index>(keep.size()) == n) return frames;

  FrameMatrix out;
  out.segment_id = std::move(frames.segment_id);
  out.features.resize(static_cast<Eigen::Index>(keep.size()), frames.dim());
  out.frame_times.reserve(keep.size());
  const bool have_times = frames.frame_times.size() == static_cast<std::size_t>(n);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = frames.features.row(keep[i]);
    if (have_times) out.frame_times.push_back(frames.frame_times[keep[i]]);
  }
  return out;
}

FrameMatrix extract_features(const SampleBuffer& buf, std::string segment_id,
                             const FeatureConfig& cfg) {
  FramedSignal framed = frame_signal(buf, cfg);
  const Eigen::MatrixXd mfcc = mfcc_sequence(framed.frames, cfg);

  FrameMatrix fm;
  fm.segment_id = std::move(segment_id);
  fm.features = append_deltas(mfcc);
  fm.frame_times = std::move(framed.frame_times);
  return filter_low_energy(std::move(fm), framed.log_energies, cfg.drop_db);
}

}  // namespace spkret
