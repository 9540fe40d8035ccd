#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace repread {

using Engine = std::mt19937_64;

/// Engine for chunk `chunk` of a run seeded with `seed`. Streams are keyed by
/// (seed, chunk) only, so results do not depend on which thread ran a chunk.
Engine stream_engine(std::uint64_t seed, std::uint64_t chunk);

/// Worker count: explicit value if > 0, else REPREAD_THREADS, else 1.
unsigned resolve_threads(unsigned requested = 0);

struct ChunkPlan {
  std::uint64_t seed = 0;
  std::uint64_t chunk_size = 10000;
  unsigned threads = 0;
};

/// Runs `body(chunk_index, first_item, item_count, engine)` for every chunk
/// covering `items`, distributing chunks over worker threads. The body must
/// only write to chunk-private state.
void for_each_chunk(std::uint64_t items, const ChunkPlan &plan,
                    const std::function<void(std::uint64_t, std::uint64_t,
                                             std::uint64_t, Engine &)> &body);

std::uint64_t fresh_seed();

}  // namespace repread
