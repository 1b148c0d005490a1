#include "thresholds/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace thresholds {

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void run_blocks(std::size_t blocks, unsigned threads, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(blocks);
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), blocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) {
      try {
        task(b);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t b = next++; b < blocks; b = next++) {
        try {
          task(b);
        } catch (...) {
          errors[b] = std::current_exception();
        }
      }
    };
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace thresholds
