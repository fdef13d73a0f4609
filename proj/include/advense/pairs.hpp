#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include "advense/error.hpp"

namespace advense {

namespace detail {

inline std::uint64_t pair_count(int n) {
  return static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;
}

// Linear index of (i, j), i < j, in row-major upper-triangle order.
inline std::uint64_t pair_index(int n, int i, int j) {
  return static_cast<std::uint64_t>(i) * (2ull * static_cast<std::uint64_t>(n) - i - 1) / 2 +
         static_cast<std::uint64_t>(j - i - 1);
}

inline std::pair<int, int> decode_pair(int n, std::uint64_t k) {
  const std::uint64_t total = pair_count(n);
  const std::uint64_t r = total - 1 - k;  // reverse index: row counted from the last
  auto t = static_cast<std::uint64_t>((std::sqrt(8.0 * static_cast<double>(r) + 1.0) - 1.0) / 2.0);
  while ((t + 1) * (t + 2) / 2 <= r) ++t;
  while (t * (t + 1) / 2 > r) --t;
  const int i = n - 2 - static_cast<int>(t);
  const std::uint64_t row_start = pair_index(n, i, i + 1);
  const int j = i + 1 + static_cast<int>(k - row_start);
  return {i, j};
}

// Kahan-Babuska (Neumaier) compensated accumulator. Pair kernels use it so
// the reductions stay permutation- and partition-insensitive to ~1e-15.
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  double total() const { return sum + comp; }
};

}  // namespace detail

/// A deterministic set of observation pairs (i, j), i < j: either the full
/// n(n-1)/2 universe or a seeded uniform sample without replacement.
class PairSet {
 public:
  static PairSet all(int n) {
    require_n(n);
    PairSet ps;
    ps.n_ = n;
    ps.size_ = detail::pair_count(n);
    return ps;
  }

  static PairSet sample(int n, std::uint64_t budget, std::uint64_t seed) {
    require_n(n);
    if (budget < 1) throw InputError("pair budget must be >= 1");
    const std::uint64_t total = detail::pair_count(n);
    if (budget >= total) return all(n);

    // Floyd's algorithm: `budget` draws, uniform without replacement.
    std::mt19937_64 rng(seed);
    std::unordered_set<std::uint64_t> chosen;
    chosen.reserve(static_cast<std::size_t>(budget) * 2);
    for (std::uint64_t j = total - budget; j < total; ++j) {
      std::uniform_int_distribution<std::uint64_t> dist(0, j);
      const std::uint64_t t = dist(rng);
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    PairSet ps;
    ps.n_ = n;
    ps.size_ = budget;
    ps.subsampled_ = true;
    ps.seed_ = seed;
    ps.indices_.assign(chosen.begin(), chosen.end());
    std::sort(ps.indices_.begin(), ps.indices_.end());
    return ps;
  }

  int n() const { return n_; }
  std::uint64_t size() const { return size_; }
  bool subsampled() const { return subsampled_; }
  std::optional<std::uint64_t> seed() const { return seed_; }

  std::pair<int, int> pair_at(std::uint64_t k) const {
    return detail::decode_pair(n_, subsampled_ ? indices_[static_cast<std::size_t>(k)] : k);
  }

  std::vector<std::pair<int, int>> pairs() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(static_cast<std::size_t>(size_));
    for (std::uint64_t k = 0; k < size_; ++k) out.push_back(pair_at(k));
    return out;
  }

 private:
  static void require_n(int n) {
    if (n < 2) throw InputError("pair set needs n >= 2, got " + std::to_string(n));
  }

  int n_ = 0;
  std::uint64_t size_ = 0;
  bool subsampled_ = false;
  std::optional<std::uint64_t> seed_;
  std::vector<std::uint64_t> indices_;  // sorted linear pair indices when subsampled
};

inline PairSet subsample_pairs(int n, std::uint64_t budget, std::uint64_t seed) {
  return PairSet::sample(n, budget, seed);
}

struct PairTermSums {
  double corr = 0.0;
  double weight = 0.0;
  std::uint64_t pairs = 0;
};

inline int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Deterministic pair reduction: the pair space is split into `threads`
/// contiguous chunks (a function of the pair count and thread count only),
/// each chunk is accumulated with compensated sums, and partials merge in
/// chunk order. Results are bitwise-reproducible for a fixed thread count
/// and agree across thread counts to ~1e-15.
template <typename TermFn>
PairTermSums reduce_pair_terms(const PairSet& ps, int threads, TermFn term) {
  const std::uint64_t total = ps.size();
  PairTermSums out;
  out.pairs = total;
  if (total == 0) return out;

  const int want = resolve_threads(threads);
  const int chunks = static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(std::max(want, 1)), total));

  struct Partial {
    detail::NeumaierSum corr;
    detail::NeumaierSum weight;
  };
  std::vector<Partial> partials(static_cast<std::size_t>(chunks));

  auto run_chunk = [&](int c) {
    const std::uint64_t lo = total * static_cast<std::uint64_t>(c) / static_cast<std::uint64_t>(chunks);
    const std::uint64_t hi = total * static_cast<std::uint64_t>(c + 1) / static_cast<std::uint64_t>(chunks);
    Partial& p = partials[static_cast<std::size_t>(c)];
    if (lo >= hi) return;
    if (ps.subsampled()) {
      for (std::uint64_t k = lo; k < hi; ++k) {
        const auto [i, j] = ps.pair_at(k);
        const auto [corr_term, w_term] = term(i, j);
        p.corr.add(corr_term);
        p.weight.add(w_term);
      }
    } else {
      auto [i, j] = detail::decode_pair(ps.n(), lo);
      for (std::uint64_t k = lo; k < hi; ++k) {
        const auto [corr_term, w_term] = term(i, j);
        p.corr.add(corr_term);
        p.weight.add(w_term);
        if (++j == ps.n()) {
          ++i;
          j = i + 1;
        }
      }
    }
  };

  if (chunks == 1) {
    run_chunk(0);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(chunks));
    for (int c = 0; c < chunks; ++c) workers.emplace_back(run_chunk, c);
    for (auto& w : workers) w.join();
  }

  detail::NeumaierSum corr;
  detail::NeumaierSum weight;
  for (const auto& p : partials) {
    corr.add(p.corr.sum);
    corr.add(p.corr.comp);
    weight.add(p.weight.sum);
    weight.add(p.weight.comp);
  }
  out.corr = corr.total();
  out.weight = weight.total();
  return out;
}

}  // namespace advense
