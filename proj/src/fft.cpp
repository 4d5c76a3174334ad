#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace schrocurve::detail {

namespace {

struct PlanCache {
  std::mutex mutex;
  std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
  }

  fftw_plan get(int dim, std::size_t n, int sign) {
    std::lock_guard lock(mutex);
    auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans.find(key); it != plans.end()) return it->second;

    std::size_t total = dim == 1 ? n : n * n;
    std::vector<std::complex<double>> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const int fsign = sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD;
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = dim == 1
        ? fftw_plan_dft_1d(static_cast<int>(n), buf, buf, fsign, flags)
        : fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), buf, buf, fsign, flags);
    if (plan == nullptr) throw std::runtime_error("fftw plan creation failed");
    plans.emplace(key, plan);
    return plan;
  }
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void fft_inplace(std::complex<double>* data, int dim, std::size_t n, int sign) {
  fftw_plan plan = cache().get(dim, n, sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace schrocurve::detail
