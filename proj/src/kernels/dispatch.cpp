#include <atomic>
#include <cstdlib>
#include <string>

#include "sgnet/error.hpp"
#include "sgnet/kernels.hpp"

namespace sgnet::kernels {
namespace {

const KernelTable* initial_table() {
    const char* env = std::getenv("SGNET_SIMD");
    const std::string choice = env ? env : "auto";
    if (choice == "scalar") return &scalar_table();
    if (const KernelTable* avx = avx2_table()) return avx;
    return &scalar_table();
}

std::atomic<const KernelTable*>& current() {
    static std::atomic<const KernelTable*> table{initial_table()};
    return table;
}

}  // namespace

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
    if (backend == Backend::Scalar) {
        current().store(&scalar_table());
        return;
    }
    const KernelTable* avx = avx2_table();
    if (!avx) throw ContractError("kernels::set_backend: AVX2 not available on this CPU/build");
    current().store(avx);
}

std::vector<Backend> available_backends() {
    std::vector<Backend> out{Backend::Scalar};
    if (avx2_table()) out.push_back(Backend::Avx2);
    return out;
}

std::string_view backend_name(Backend backend) {
    return backend == Backend::Scalar ? "scalar" : "avx2";
}

}  // namespace sgnet::kernels
