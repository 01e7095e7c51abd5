#include "cnls/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include "cnls/errors.hpp"

namespace cnls {

namespace {

// FFTW's planner keeps global state.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Fft::Plans {
  fftw_complex* buffer = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward != nullptr) {
      fftw_destroy_plan(forward);
    }
    if (backward != nullptr) {
      fftw_destroy_plan(backward);
    }
    fftw_free(buffer);
  }
};

Fft::Fft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n == 0) {
    throw DomainError("FFT length must be positive");
  }
  std::lock_guard lock(planner_mutex());
  plans_->buffer = fftw_alloc_complex(n);
  const int len = static_cast<int>(n);
  plans_->forward = fftw_plan_dft_1d(len, plans_->buffer, plans_->buffer, FFTW_FORWARD, FFTW_ESTIMATE);
  plans_->backward = fftw_plan_dft_1d(len, plans_->buffer, plans_->buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (plans_->buffer == nullptr || plans_->forward == nullptr || plans_->backward == nullptr) {
    throw NumericalError("FFTW planning failed");
  }
}

Fft::~Fft() = default;
Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

void Fft::forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  if (in.size() != n_ || out.size() != n_) {
    throw DomainError("FFT buffer length mismatch");
  }
  auto* buf = reinterpret_cast<std::complex<double>*>(plans_->buffer);
  std::copy(in.begin(), in.end(), buf);
  fftw_execute(plans_->forward);
  std::copy(buf, buf + n_, out.begin());
}

void Fft::inverse(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) {
  if (in.size() != n_ || out.size() != n_) {
    throw DomainError("FFT buffer length mismatch");
  }
  auto* buf = reinterpret_cast<std::complex<double>*>(plans_->buffer);
  std::copy(in.begin(), in.end(), buf);
  fftw_execute(plans_->backward);
  const double scale = 1.0 / static_cast<double>(n_);
  std::transform(buf, buf + n_, out.begin(), [scale](std::complex<double> z) { return z * scale; });
}

std::vector<double> fft_wavenumbers(std::size_t n, double length) {
  std::vector<double> k(n);
  const double base = 2.0 * std::numbers::pi / length;
  for (std::size_t j = 0; j < n; ++j) {
    const auto m = static_cast<long>(j) - (j < (n + 1) / 2 ? 0 : static_cast<long>(n));
    k[j] = base * static_cast<double>(m);
  }
  return k;
}

}  // namespace cnls
