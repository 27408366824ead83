#include "fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace formcalc::detail {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int dim, int points, bool forward) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(dim, points, forward);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<int> shape(dim, points);
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(points);
    auto* a = fftw_alloc_complex(total);
    auto* b = fftw_alloc_complex(total);
    fftw_plan plan = fftw_plan_dft(dim, shape.data(), a, b, forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    if (plan == nullptr) throw std::runtime_error("fft: planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, bool>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void fft_component(const GridSpec& grid, std::span<const Complex> in, std::span<Complex> out, bool forward) {
  if (in.size() != grid.node_count() || out.size() != in.size()) throw std::invalid_argument("fft: size mismatch");
  if (in.data() == out.data()) throw std::invalid_argument("fft: in-place transform not supported");
  fftw_plan plan = cache().get(grid.dim, grid.points, forward);
  // fftw_execute_dft does not write its input for out-of-place complex plans
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(in.size()));
  for (auto& v : out) v *= scale;
}

}  // namespace formcalc::detail
