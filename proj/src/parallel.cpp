#include "c2nlos/parallel.hpp"

#include <atomic>

namespace c2nlos {

namespace {
std::atomic<int> g_threads{1};
}

int default_threads() { return g_threads.load(); }

void set_default_threads(int n) { g_threads.store(n < 1 ? 1 : n); }

}  // namespace c2nlos
