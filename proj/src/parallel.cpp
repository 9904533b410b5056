#include "nsf/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace nsf {

namespace {
std::atomic<int> g_override{0};
}

int thread_count() {
  if (int n = g_override.load(); n > 0) return n;
  if (const char* env = std::getenv("NSF_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void set_thread_count(int n) { g_override.store(n); }

void parallel_for(Eigen::Index begin, Eigen::Index end,
                  const std::function<void(Eigen::Index)>& body) {
  const Eigen::Index n = end - begin;
  if (n <= 0) return;
  const int workers = static_cast<int>(std::min<Eigen::Index>(thread_count(), n));
  if (workers <= 1) {
    for (Eigen::Index i = begin; i < end; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const Eigen::Index chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const Eigen::Index lo = begin + w * chunk;
    const Eigen::Index hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (Eigen::Index i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace nsf
