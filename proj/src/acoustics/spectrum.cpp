#include "quietgait/acoustics/spectrum.hpp"

#include <cmath>
#include <numbers>

#include "quietgait/common/error.hpp"

namespace quietgait::acoustics {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<double> hamming(int n) {
  std::vector<double> w(n);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  return w;
}

}  // namespace

std::vector<std::complex<double>> fft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (!is_power_of_two(n))
    throw InvalidInputError("fft: length " + std::to_string(n) + " is not a power of two");

  std::vector<std::complex<double>> a(n);
  // bit-reversal permutation while loading the real input
  std::size_t bits = 0;
  while ((1u << bits) < n) ++bits;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
    a[r] = std::complex<double>(x[i], 0.0);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t base = 0; base < n; base += len) {
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> w = std::polar(1.0, ang * static_cast<double>(j));
        const std::complex<double> u = a[base + j];
        const std::complex<double> v = w * a[base + j + len / 2];
        a[base + j] = u + v;
        a[base + j + len / 2] = u - v;
      }
    }
  }
  return a;
}

SpectralReport welch_psd(const AudioClip& clip, int window, double overlap) {
  if (window < 2 || !is_power_of_two(static_cast<std::size_t>(window)))
    throw InvalidInputError("welch_psd: window size must be a power of two >= 2");
  if (!(overlap >= 0.0 && overlap < 1.0))
    throw InvalidInputError("welch_psd: overlap must lie in [0, 1)");
  if (!(clip.sample_rate > 0.0))
    throw InvalidInputError("welch_psd: clip sample rate must be positive");
  if (static_cast<int>(clip.samples.size()) < window)
    throw InvalidInputError("welch_psd: clip has " + std::to_string(clip.samples.size()) +
                            " samples, shorter than one window of " + std::to_string(window));
  for (double s : clip.samples)
    if (!std::isfinite(s)) throw InvalidInputError("welch_psd: non-finite sample");

  const int advance = std::max(1, static_cast<int>(window * (1.0 - overlap)));
  const int n_seg = (static_cast<int>(clip.samples.size()) - window) / advance + 1;
  const std::vector<double> w = hamming(window);
  double w_sum = 0.0;
  for (double v : w) w_sum += v;
  const double norm = 1.0 / (w_sum * w_sum);

  const int bins = window / 2 + 1;
  SpectralReport report;
  report.window_size = window;
  report.overlap = overlap;
  report.segment_count = n_seg;
  report.freq_hz.resize(bins);
  report.psd.assign(bins, 0.0);
  for (int k = 0; k < bins; ++k)
    report.freq_hz[k] = clip.sample_rate * static_cast<double>(k) / window;

  std::vector<double> seg(window);
  for (int s = 0; s < n_seg; ++s) {
    const int start = s * advance;
    for (int i = 0; i < window; ++i) seg[i] = w[i] * clip.samples[start + i];
    const auto spec = fft(seg);
    for (int k = 0; k < bins; ++k) {
      const double mag2 = std::norm(spec[k]);
      // one-sided: interior bins absorb their conjugate mirror's power
      const double sided = (k == 0 || k == window / 2) ? 1.0 : 2.0;
      report.psd[k] += sided * mag2 * norm;
    }
  }
  for (double& p : report.psd) p /= n_seg;
  return report;
}

double band_power_db(const SpectralReport& report, double f_lo, double f_hi) {
  if (report.freq_hz.size() != report.psd.size() || report.freq_hz.empty())
    throw InvalidInputError("band_power_db: malformed spectral report");
  if (!(f_lo <= f_hi)) throw InvalidInputError("band_power_db: f_lo must not exceed f_hi");

  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < report.freq_hz.size(); ++k) {
    if (report.freq_hz[k] >= f_lo && report.freq_hz[k] <= f_hi) {
      sum += report.psd[k];
      ++count;
    }
  }
  if (count == 0)
    throw InvalidInputError("band_power_db: no bins fall inside [" + std::to_string(f_lo) +
                            ", " + std::to_string(f_hi) + "] Hz");
  const double mean = sum / count;
  const double ref = kDbReferenceAmplitude * kDbReferenceAmplitude / 2.0;
  if (mean <= 0.0) return kDbFloor;
  return std::max(kDbFloor, 10.0 * std::log10(mean / ref));
}

}  // namespace quietgait::acoustics
