#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace cnls {

// One-dimensional complex FFT of fixed length backed by FFTW (estimate-mode
// plans, so results are reproducible run to run).  forward is unnormalised
// with kernel exp(-2 pi i jk/n); inverse divides by n, so inverse(forward(x))
// returns x.  A plan is not safe for concurrent use; make one per thread.
class Fft {
 public:
  explicit Fft(std::size_t n);
  ~Fft();
  Fft(Fft&&) noexcept;
  Fft& operator=(Fft&&) noexcept;
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::size_t size() const { return n_; }

  // in and out may alias.
  void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);
  void inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out);

 private:
  struct Plans;
  std::size_t n_;
  std::unique_ptr<Plans> plans_;
};

// Angular wavenumbers of an n-point grid of length L in FFT order.
std::vector<double> fft_wavenumbers(std::size_t n, double length);

}  // namespace cnls
