#include "ogss/models/kernels.hpp"

#include <atomic>

namespace ogss::models {

namespace {
std::atomic<Backend> g_backend{Backend::OpenMP};
}

void set_backend(Backend backend) { g_backend.store(backend); }
Backend backend() { return g_backend.load(std::memory_order_relaxed); }

}  // namespace ogss::models
