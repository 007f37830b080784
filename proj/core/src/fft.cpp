#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace gibbslab::detail {

namespace {

struct PlanCache {
  std::mutex mu;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;

  ~PlanCache() {
    for (auto& [key, p] : plans) fftw_destroy_plan(p);
  }

  // Plans are made unaligned and out of the way of user buffers so that
  // fftw_execute_dft can run them on any array from any thread.
  fftw_plan get(int dim, int side, int sign) {
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(dim, side, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    std::size_t total = dim == 1 ? side : std::size_t(side) * side;
    fftw_complex* scratch = fftw_alloc_complex(total);
    int fsign = sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD;
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = dim == 1 ? fftw_plan_dft_1d(side, scratch, scratch, fsign, flags)
                           : fftw_plan_dft_2d(side, side, scratch, scratch, fsign, flags);
    fftw_free(scratch);
    plans.emplace(key, p);
    return p;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

}  // namespace

void fft_inplace(std::complex<double>* data, int dim, int side, int sign) {
  fftw_plan p = cache().get(dim, side, sign);
  auto* d = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, d, d);
}

}  // namespace gibbslab::detail
