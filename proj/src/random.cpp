#include "repread/random.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace repread {

Engine stream_engine(std::uint64_t seed, std::uint64_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32),
                    0x72657072u};
  return Engine(seq);
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char *env = std::getenv("REPREAD_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception &) {
    }
  }
  return 1;
}

void for_each_chunk(std::uint64_t items, const ChunkPlan &plan,
                    const std::function<void(std::uint64_t, std::uint64_t,
                                             std::uint64_t, Engine &)> &body) {
  const std::uint64_t chunk_size = std::max<std::uint64_t>(1, plan.chunk_size);
  const std::uint64_t chunks = (items + chunk_size - 1) / chunk_size;
  const unsigned threads =
      static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(plan.threads), chunks));

  auto run_chunk = [&](std::uint64_t c) {
    Engine eng = stream_engine(plan.seed, c);
    const std::uint64_t first = c * chunk_size;
    body(c, first, std::min(chunk_size, items - first), eng);
  };

  if (threads <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c);
    return;
  }

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::uint64_t c; (c = next.fetch_add(1)) < chunks;) {
        try {
          run_chunk(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto &th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace repread
