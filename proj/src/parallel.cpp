#include "rwt/parallel.hpp"

#include <algorithm>
#include <atomic>

namespace rwt {

namespace {
std::atomic<int> g_threads{1};
}

void set_num_threads(int n) { g_threads.store(std::max(1, n)); }

int num_threads() noexcept { return g_threads.load(); }

}  // namespace rwt
