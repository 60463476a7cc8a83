#pragma once

// Spectral analysis: radix-2 FFT, Hamming-windowed Welch power spectral
// density, and audible-band power in decibels.
//
// Normalization convention: per-bin powers are one-sided (bins 1..N/2-1 carry
// a factor of two) and compensated for the window's coherent gain, so a pure
// sinusoid of amplitude A centered on bin k reports power A^2/2 in that bin
// and a DC offset c reports c^2 in bin 0. The decibel reference is a sinusoid
// of amplitude 1e-10, i.e. reference power (1e-10)^2 / 2.

#include <complex>
#include <vector>

#include "quietgait/acoustics/audio.hpp"

namespace quietgait::acoustics {

struct SpectralReport {
  std::vector<double> freq_hz;  // bin center frequencies, window/2 + 1 bins
  std::vector<double> psd;      // per-bin power (amplitude^2 units)
  int window_size = 0;
  double overlap = 0.0;         // fraction of the window shared by neighbors
  int segment_count = 0;
};

/// In-place-style DFT of a real sequence whose length must be a power of two.
/// Returns the full complex spectrum X[k] = sum_n x[n] e^{-2*pi*i*k*n/N}.
std::vector<std::complex<double>> fft(const std::vector<double>& x);

/// Welch PSD estimate: Hamming-windowed segments of `window` samples advanced
/// by window*(1-overlap), periodograms averaged. The clip must contain at
/// least one full window.
SpectralReport welch_psd(const AudioClip& clip, int window = 4096, double overlap = 0.5);

/// Mean per-bin power over bins whose center frequency lies in [f_lo, f_hi],
/// as 10*log10(mean / ((1e-10)^2/2)), floored at -300 dB. An empty band is an
/// error.
double band_power_db(const SpectralReport& report, double f_lo = 20.0, double f_hi = 20000.0);

/// Amplitude of the decibel reference sinusoid and the corresponding power.
inline constexpr double kDbReferenceAmplitude = 1e-10;
inline constexpr double kDbFloor = -300.0;

}  // namespace quietgait::acoustics
