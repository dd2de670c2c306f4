#pragma once

// Multi-worker integral-image SWA.
//
// Table construction runs in two phases separated by a barrier: workers first
// take contiguous row blocks and write horizontal prefix sums, then take
// contiguous column blocks and accumulate down the columns. The query sweep
// hands each worker a contiguous block of output rows. Partitions are static
// and disjoint and no value is ever combined across workers, so results are
// bit-identical to the sequential path for every worker count.

#include <atomic>
#include <barrier>
#include <functional>
#include <thread>

#include "swa/integral.hpp"

namespace swa {

struct ParallelConfig {
  std::size_t workers = default_workers();
  /// Grids with fewer pixels than this run sequentially.
  std::size_t min_parallel_elems = std::size_t{1} << 20;

  static std::size_t default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
  }
};

/// Debug write census: counts how often each element is written in each
/// phase. A correct partition writes every element exactly once per phase.
class WriteCensus {
 public:
  void reset_table(std::size_t cells) {
    row_phase_ = std::vector<std::atomic<std::uint32_t>>(cells);
    col_phase_ = std::vector<std::atomic<std::uint32_t>>(cells);
  }
  void reset_output(std::size_t cells) { output_ = std::vector<std::atomic<std::uint32_t>>(cells); }

  void mark_row_phase(std::size_t idx) { row_phase_[idx].fetch_add(1, std::memory_order_relaxed); }
  void mark_col_phase(std::size_t idx) { col_phase_[idx].fetch_add(1, std::memory_order_relaxed); }
  void mark_output(std::size_t idx) { output_[idx].fetch_add(1, std::memory_order_relaxed); }

  std::span<const std::atomic<std::uint32_t>> row_phase() const { return row_phase_; }
  std::span<const std::atomic<std::uint32_t>> col_phase() const { return col_phase_; }
  std::span<const std::atomic<std::uint32_t>> output() const { return output_; }

 private:
  std::vector<std::atomic<std::uint32_t>> row_phase_;
  std::vector<std::atomic<std::uint32_t>> col_phase_;
  std::vector<std::atomic<std::uint32_t>> output_;
};

namespace detail {

struct Block {
  std::size_t begin;
  std::size_t end;
};

/// k-th of p contiguous blocks covering [0, n).
constexpr Block static_block(std::size_t n, std::size_t p, std::size_t k) {
  return {k * n / p, (k + 1) * n / p};
}

/// Runs body(worker_id, barrier) on p workers, the calling thread being
/// worker 0. Returns once every worker has finished.
inline void run_team(std::size_t p, const std::function<void(std::size_t, std::barrier<>&)>& body) {
  std::barrier<> sync(static_cast<std::ptrdiff_t>(p));
  {
    std::vector<std::jthread> team;
    team.reserve(p - 1);
    for (std::size_t k = 1; k < p; ++k) team.emplace_back([&, k] { body(k, sync); });
    body(0, sync);
  }
}

inline std::size_t effective_workers(const ParallelConfig& cfg, std::size_t elems,
                                     std::size_t max_useful) {
  if (cfg.workers == 0) throw InvalidArgument("worker count must be at least 1");
  if (elems < cfg.min_parallel_elems) return 1;
  return std::max<std::size_t>(1, std::min(cfg.workers, max_useful));
}

template <Table K, Pixel T, typename Acc>
void row_phase(const Grid<T>& img, IntegralImage<Acc>& sat, Block rows, WriteCensus* census) {
  for (std::size_t i = rows.begin; i < rows.end; ++i) {
    row_prefix<K>(img, sat, i);
    if (census) {
      for (std::size_t j = 1; j <= img.cols(); ++j) census->mark_row_phase((i + 1) * sat.pitch() + j);
    }
  }
}

/// Accumulates down table columns [1 + cols.begin, 1 + cols.end).
template <typename Acc>
void col_phase(IntegralImage<Acc>& sat, Block cols, WriteCensus* census) {
  const std::size_t c0 = cols.begin + 1;
  const std::size_t c1 = cols.end + 1;
  for (std::size_t i = 0; i < sat.rows(); ++i) column_accumulate(sat, i, c0, c1);
  if (census) {
    for (std::size_t i = 1; i <= sat.rows(); ++i) {
      for (std::size_t j = c0; j < c1; ++j) census->mark_col_phase(i * sat.pitch() + j);
    }
  }
}

}  // namespace detail

/// Two-phase parallel table construction. Bit-identical to build_sat<K>.
/// When a census is given it tracks the sum table only.
template <Pixel T>
SatSet<T> build_sats_parallel(const Grid<T>& img, StatKind stat, const ParallelConfig& cfg,
                              WriteCensus* census = nullptr) {
  const std::size_t p =
      detail::effective_workers(cfg, img.size(), std::min(img.rows(), img.cols()));
  const bool squared = stat == StatKind::StdDev;
  if (p == 1 && census == nullptr) return build_sats(img, stat);

  SatSet<T> sats{IntegralImage<sum_acc_t<T>>(img.rows(), img.cols()), std::nullopt};
  if (squared) sats.squared.emplace(img.rows(), img.cols());
  if (census) census->reset_table(sats.sum.table().size());

  detail::run_team(p, [&](std::size_t k, std::barrier<>& sync) {
    const detail::Block rows = detail::static_block(img.rows(), p, k);
    detail::row_phase<Table::sum>(img, sats.sum, rows, census);
    if (squared) detail::row_phase<Table::squared>(img, *sats.squared, rows, nullptr);
    sync.arrive_and_wait();
    const detail::Block cols = detail::static_block(img.cols(), p, k);
    detail::col_phase(sats.sum, cols, census);
    if (squared) detail::col_phase(*sats.squared, cols, nullptr);
  });
  return sats;
}

template <Table K = Table::sum, Pixel T>
IntegralImage<table_acc_t<K, T>> build_sat_parallel(const Grid<T>& img, const ParallelConfig& cfg) {
  const std::size_t p =
      detail::effective_workers(cfg, img.size(), std::min(img.rows(), img.cols()));
  if (p == 1) return build_sat<K>(img);

  IntegralImage<table_acc_t<K, T>> sat(img.rows(), img.cols());
  detail::run_team(p, [&](std::size_t k, std::barrier<>& sync) {
    detail::row_phase<K>(img, sat, detail::static_block(img.rows(), p, k), nullptr);
    sync.arrive_and_wait();
    detail::col_phase(sat, detail::static_block(img.cols(), p, k), nullptr);
  });
  return sat;
}

/// Query sweep with output rows split into contiguous worker blocks.
template <Pixel T>
ResultGrid query_sats_parallel(const SatSet<T>& sats, WindowSpec win, StatKind stat,
                               const ParallelConfig& cfg, WriteCensus* census = nullptr) {
  const Dims d = output_dims(sats.sum.rows(), sats.sum.cols(), win);
  const std::size_t p =
      detail::effective_workers(cfg, sats.sum.rows() * sats.sum.cols(), d.rows);
  if (p == 1 && census == nullptr) return query_sats(sats, win, stat);
  if (stat == StatKind::StdDev && !sats.squared) {
    throw InvalidArgument("standard deviation requires the squared-value table");
  }

  ResultGrid out = detail::make_result<T>(d, stat);
  if (census) census->reset_output(d.rows * d.cols);
  detail::run_team(p, [&](std::size_t k, std::barrier<>&) {
    const detail::Block rows = detail::static_block(d.rows, p, k);
    detail::query_rows(sats, win, out, rows.begin, rows.end);
    if (census) {
      for (std::size_t idx = rows.begin * d.cols; idx < rows.end * d.cols; ++idx) {
        census->mark_output(idx);
      }
    }
  });
  return out;
}

/// Parallel SWA. With one effective worker it is exactly swa_integral.
/// A census, when supplied, records sum-table and output writes.
template <Pixel T>
ResultGrid swa_parallel(const Grid<T>& img, WindowSpec win, StatKind stat,
                        const ParallelConfig& cfg, WriteCensus* census = nullptr) {
  validate_window(img.rows(), img.cols(), win);
  if (census == nullptr &&
      detail::effective_workers(cfg, img.size(), std::min(img.rows(), img.cols())) == 1) {
    return swa_integral(img, win, stat);
  }
  const SatSet<T> sats = build_sats_parallel(img, stat, cfg, census);
  return query_sats_parallel(sats, win, stat, cfg, census);
}

inline ResultGrid swa_parallel(const ImageGrid& img, WindowSpec win, StatKind stat,
                               const ParallelConfig& cfg) {
  return std::visit([&](const auto& g) { return swa_parallel(g, win, stat, cfg); }, img);
}

}  // namespace swa
