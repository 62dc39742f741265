#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

#include "nbstein/metrics.hpp"
#include "nbstein/rng.hpp"

namespace nbstein {

/// Replicate i always draws from `base.substream(i)`, so the resulting law is
/// a pure function of (base, n) regardless of how replicates are split
/// across workers. Counting is the only reduction and is order-independent.
template <class Draw>
EmpiricalDist replicate(std::uint64_t n, const RngStream& base, unsigned workers,
                        Draw&& draw) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::uint64_t>(n, 1))));
  std::vector<EmpiricalDist> partial(workers);
  std::vector<std::exception_ptr> errors(workers);
  auto run_block = [&](unsigned w) {
    try {
      const std::uint64_t begin = n * w / workers;
      const std::uint64_t end = n * (w + 1) / workers;
      for (std::uint64_t i = begin; i < end; ++i) {
        RngStream rng = base.substream(i);
        partial[w].add(draw(rng));
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    run_block(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_block, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  EmpiricalDist out;
  for (const auto& p : partial) out.merge(p);
  return out;
}

}  // namespace nbstein
