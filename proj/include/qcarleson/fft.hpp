#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace qcarleson {

// In-place complex DFTs backed by FFTW. Plans are created once per
// (size, direction) with FFTW_ESTIMATE so the algorithm choice, and hence
// every output bit, is the same on every run. Planning is serialized;
// execution is thread-safe.
class Fft {
 public:
  // X[k] = sum_n x[n] e(-kn/N)
  static void forward(std::vector<std::complex<double>>& x) { run(x, FFTW_FORWARD); }
  // x[n] = sum_k X[k] e(kn/N), unnormalized
  static void inverse(std::vector<std::complex<double>>& x) { run(x, FFTW_BACKWARD); }

 private:
  static void run(std::vector<std::complex<double>>& x, int sign) {
    if (x.empty()) return;
    auto* p = reinterpret_cast<fftw_complex*>(x.data());
    fftw_execute_dft(plan(x.size(), sign), p, p);
  }

  static fftw_plan plan(std::size_t n, int sign) {
    static std::mutex mu;
    static std::map<std::pair<std::size_t, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<std::complex<double>> scratch(n);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan pl = fftw_plan_dft_1d(static_cast<int>(n), p, p, sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(key, pl);
    return pl;
  }
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace qcarleson
