#ifndef SEMGRAPH_UTIL_HPP
#define SEMGRAPH_UTIL_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace semgraph {

using NodeSet = std::vector<int>;  // sorted, unique

inline NodeSet make_set(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline bool set_contains(const NodeSet& s, int x) {
  return std::binary_search(s.begin(), s.end(), x);
}

inline NodeSet set_union(const NodeSet& a, const NodeSet& b) {
  NodeSet r;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}

inline NodeSet set_intersect(const NodeSet& a, const NodeSet& b) {
  NodeSet r;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}

inline NodeSet set_minus(const NodeSet& a, const NodeSet& b) {
  NodeSet r;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}

inline bool set_subset(const NodeSet& a, const NodeSet& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

//! Mixes a base seed with stream indices so parallel trials stay reproducible:
//! identical (seed, stream...) always yields the same generator state.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a = 0,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
  auto splitmix = [](std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t x = seed;
  std::uint64_t h = splitmix(x);
  x ^= a + 0x100000001b3ULL;
  h ^= splitmix(x);
  x ^= b + 0xcbf29ce484222325ULL;
  h ^= splitmix(x);
  x ^= c + 0x2545f4914f6cdd1dULL;
  h ^= splitmix(x);
  return h;
}

inline std::mt19937_64 rng_for(std::uint64_t seed, std::uint64_t a = 0,
                               std::uint64_t b = 0, std::uint64_t c = 0) {
  return std::mt19937_64(mix_seed(seed, a, b, c));
}

//! Runs fn(i) for i in [0, n). Work is chunked over `threads` std::threads;
//! fn must only write to slots owned by its index, which keeps results
//! independent of the schedule.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (int i = t; i < n; i += threads) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct SizeGuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace semgraph

#endif
