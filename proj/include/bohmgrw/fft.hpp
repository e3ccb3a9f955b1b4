#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <utility>

namespace bohmgrw::fft {

namespace detail {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. Plans are created once per (size, direction) and kept for the
// lifetime of the process.
inline fftw_plan plan_for(int n, int sign) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto& plan = plans[{n, sign}];
  if (plan == nullptr) {
    fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(n));
    plan = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
  }
  return plan;
}

inline fftw_complex* as_fftw(std::span<std::complex<double>> data) {
  return reinterpret_cast<fftw_complex*>(data.data());
}

}  // namespace detail

/// In-place unnormalized forward transform, sum_j a_j exp(-2 pi i jk/n).
inline void forward(std::span<std::complex<double>> data) {
  const auto p = detail::plan_for(static_cast<int>(data.size()), FFTW_FORWARD);
  fftw_execute_dft(p, detail::as_fftw(data), detail::as_fftw(data));
}

/// In-place inverse transform including the 1/n factor.
inline void inverse(std::span<std::complex<double>> data) {
  const auto p = detail::plan_for(static_cast<int>(data.size()), FFTW_BACKWARD);
  fftw_execute_dft(p, detail::as_fftw(data), detail::as_fftw(data));
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

}  // namespace bohmgrw::fft
