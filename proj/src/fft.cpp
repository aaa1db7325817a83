#include "q4nls/detail/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace q4nls::detail {
namespace {

// FFTW's planner is not thread-safe, execution with the new-array interface
// is. Plans are created once per shape under a lock and never destroyed.
// FFTW_UNALIGNED keeps the chosen algorithm independent of buffer address,
// so repeated runs give bit-identical results.
class PlanCache {
 public:
  fftw_plan get(int dim, int n, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::vector<int> dims(static_cast<std::size_t>(dim), n);
    std::size_t total = 1;
    for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(n);
    fftw_complex* scratch = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(dim, dims.data(), scratch, scratch, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (plan == nullptr) throw std::runtime_error("fftw: planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void fft_inplace(std::span<std::complex<double>> data, int dim, int n, FftDirection dir) {
  const int sign = dir == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan plan = cache().get(dim, n, sign);
  auto* raw = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, raw, raw);
  const double scale = 1.0 / std::sqrt(static_cast<double>(data.size()));
  for (auto& v : data) v *= scale;
}

}  // namespace q4nls::detail
