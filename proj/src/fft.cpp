#include "kfhd/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace kfhd {
namespace {

// Planner calls are not thread-safe in FFTW; execution on fresh arrays is.
std::mutex plan_mutex;

struct PlanCache {
    std::map<std::pair<std::vector<int>, int>, fftw_plan> plans;
    ~PlanCache() {
        for (auto& kv : plans) fftw_destroy_plan(kv.second);
    }
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

fftw_plan get_plan(const std::vector<int>& dims, int sign) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(dims, sign);
    auto it = cache().plans.find(key);
    if (it != cache().plans.end()) return it->second;
    std::size_t total = 1;
    for (int n : dims) total *= static_cast<std::size_t>(n);
    fftw_complex* scratch = fftw_alloc_complex(total);
    fftw_plan p = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), scratch, scratch, sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (!p) throw std::runtime_error("fftw planning failed");
    cache().plans.emplace(key, p);
    return p;
}

void execute(std::vector<cplx>& data, const std::vector<int>& dims, int sign) {
    std::size_t total = 1;
    for (int n : dims) total *= static_cast<std::size_t>(n);
    if (data.size() != total) throw std::invalid_argument("fft: data size does not match dims");
    fftw_plan p = get_plan(dims, sign);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p, ptr, ptr);
}

}  // namespace

void fft_forward(std::vector<cplx>& data, const std::vector<int>& dims) {
    execute(data, dims, FFTW_FORWARD);
}

void fft_inverse(std::vector<cplx>& data, const std::vector<int>& dims) {
    execute(data, dims, FFTW_BACKWARD);
    const double s = 1.0 / static_cast<double>(data.size());
    for (auto& c : data) c *= s;
}

}  // namespace kfhd
