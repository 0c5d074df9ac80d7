#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "spkret/audio.hpp"

namespace spkret {

/// Fixed analysis recipe. Defaults: 25 ms / 10 ms framing at 16 kHz,
/// pre-emphasis 0.97, Hamming window, 512-point FFT, 26 triangular mel
/// filters over 0-8 kHz, natural log floored at 1e-10, DCT-II keeping
/// c0..c12, regression deltas over +-2 frames.
struct FeatureConfig {
  double preemphasis = 0.97;
  int frame_length = 400;  // samples, 25 ms
  int frame_hop = 160;     // samples, 10 ms
  int fft_size = 512;
  int mel_filters = 26;
  int num_coeffs = 13;
  double fmin_hz = 0.0;
  double fmax_hz = 8000.0;
  double log_floor = 1e-10;
  double drop_db = 30.0;  // low-energy gate relative to segment max
};

/// Per-segment feature rows: N frames x D values, D = 26 (13 MFCC + 13 deltas).
struct FrameMatrix {
  std::string segment_id;
  Eigen::MatrixXd features;         // N x D, row major semantics (row = frame)
  std::vector<double> frame_times;  // frame start offsets in seconds; may be
                                    // empty when loaded from a feature file

  Eigen::Index num_frames() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

/// Windowed frames plus bookkeeping needed by the energy gate.
struct FramedSignal {
  Eigen::MatrixXd frames;            // N x frame_length, pre-emphasized + Hamming
  std::vector<double> log_energies;  // ln of raw (unweighted) frame energy, floored
  std::vector<double> frame_times;   // frame start offsets in seconds
};

/// Slices the signal into overlapping frames of frame_length samples with
/// frame_hop step; N = floor((len - frame_length) / frame_hop) + 1.
/// Each frame is pre-emphasized then Hamming-windowed. Raw per-frame
/// log-energies (before pre-emphasis and windowing) are kept for the gate.
/// Throws TooShort when the buffer holds fewer than frame_length samples.
FramedSignal frame_signal(const SampleBuffer& buf, const FeatureConfig& cfg = {});

/// Per frame: magnitude FFT, mel filterbank, floored natural log, DCT-II;
/// returns N x num_coeffs rows (c0 included).
Eigen::MatrixXd mfcc_sequence(const Eigen::MatrixXd& frames, const FeatureConfig& cfg = {});

/// Appends first-order regression deltas:
///   delta(t) = sum_{k=1..2} k * (c(t+k) - c(t-k)) / (2 * sum k^2)
/// with boundary rows replicated at the edges. Output is N x (2*C).
Eigen::MatrixXd append_deltas(const Eigen::MatrixXd& mfcc);

/// Drops frames whose raw log-energy sits more than drop_db below the
/// segment maximum. Always retains at least the maximum-energy frame.
FrameMatrix filter_low_energy(FrameMatrix frames, const std::vector<double>& log_energies,
                              double drop_db = 30.0);

/// Full pipeline: framing, MFCC, deltas, energy gate. Deterministic and
/// bit-exact for identical input bytes.
FrameMatrix extract_features(const SampleBuffer& buf, std::string segment_id,
                             const FeatureConfig& cfg = {});

}  // namespace spkret
