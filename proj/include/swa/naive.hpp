#pragma once

// Reference sliding-window strategies. naive_swa recomputes every window from
// scratch and serves as the ground-truth oracle; dp_naive_swa reuses the
// overlap between horizontally adjacent windows by column strips.

#include <algorithm>
#include <array>
#include <limits>
#include <vector>

#include "swa/core.hpp"

namespace swa {
namespace detail {

/// Exact sum of a contiguous run of pixels. Integer runs are accumulated in
/// 32 bits when the run cannot overflow them, which lets the loop vectorize.
template <Pixel T>
auto segment_sum(const T* p, std::size_t n) {
  if constexpr (std::is_integral_v<T>) {
    constexpr std::uint64_t max_run =
        std::numeric_limits<std::uint32_t>::max() / std::numeric_limits<T>::max();
    if (n <= max_run) {
      std::uint32_t s = 0;
      for (std::size_t k = 0; k < n; ++k) s += p[k];
      return static_cast<std::uint64_t>(s);
    }
    std::uint64_t s = 0;
    for (std::size_t k = 0; k < n; ++k) s += p[k];
    return s;
  } else {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += p[k];
    return s;
  }
}

template <Pixel T>
using moment_t = std::conditional_t<std::is_integral_v<T>, std::uint64_t, double>;

template <Pixel T>
moment_t<T> block_sum(const Grid<T>& g, std::size_t top, std::size_t left, std::size_t w) {
  moment_t<T> s{};
  const T* base = g.data().data() + top * g.cols() + left;
  for (std::size_t r = 0; r < w; ++r) s += segment_sum(base + r * g.cols(), w);
  return s;
}

/// Window sums for nb horizontally adjacent windows starting at (top, left),
/// `step` columns apart. Every window is still summed pixel by pixel; walking
/// the rows once for the whole batch keeps each row segment in cache.
template <Pixel T>
void batch_block_sums(const Grid<T>& g, std::size_t top, std::size_t left, std::size_t step,
                      std::size_t nb, std::size_t w, moment_t<T>* sums) {
  std::fill(sums, sums + nb, moment_t<T>{});
  const T* base = g.data().data() + top * g.cols() + left;
  for (std::size_t r = 0; r < w; ++r) {
    const T* row = base + r * g.cols();
    for (std::size_t b = 0; b < nb; ++b) sums[b] += segment_sum(row + b * step, w);
  }
}

inline constexpr std::size_t kNaiveBatch = 32;

/// Two-pass population standard deviation of a w x w block.
template <Pixel T>
double block_stddev(const Grid<T>& g, std::size_t top, std::size_t left, std::size_t w) {
  const double n = static_cast<double>(w * w);
  const double mean = static_cast<double>(block_sum(g, top, left, w)) / n;
  double acc = 0.0;
  const T* base = g.data().data() + top * g.cols() + left;
  for (std::size_t r = 0; r < w; ++r) {
    const T* p = base + r * g.cols();
    for (std::size_t k = 0; k < w; ++k) {
      const double d = static_cast<double>(p[k]) - mean;
      acc += d * d;
    }
  }
  return std::sqrt(acc / n);
}

template <Pixel T>
using square_t = std::conditional_t<std::is_integral_v<T>, u128, double>;

/// Sum and sum of squares of one w-tall column strip.
template <Pixel T>
void column_strip(const Grid<T>& g, std::size_t top, std::size_t col, std::size_t w, bool want_sq,
                  moment_t<T>& sum, square_t<T>& sq) {
  moment_t<T> s{};
  square_t<T> q{};
  const T* p = g.data().data() + top * g.cols() + col;
  for (std::size_t r = 0; r < w; ++r, p += g.cols()) s += *p;
  if (want_sq) {
    p = g.data().data() + top * g.cols() + col;
    for (std::size_t r = 0; r < w; ++r, p += g.cols()) {
      const auto v = static_cast<square_t<T>>(*p);
      q += v * v;
    }
  }
  sum = s;
  sq = q;
}

}  // namespace detail

/// Brute-force SWA: O(out_rows * out_cols * w^2).
template <Pixel T>
ResultGrid naive_swa(const Grid<T>& img, WindowSpec win, StatKind stat) {
  const Dims d = output_dims(img.rows(), img.cols(), win);
  ResultGrid out = detail::make_result<T>(d, stat);
  const double n = static_cast<double>(win.w * win.w);

  std::visit(
      [&](auto& values) {
        using V = std::decay_t<decltype(values[0])>;
        std::array<detail::moment_t<T>, detail::kNaiveBatch> sums{};
        for (std::size_t i = 0; i < d.rows; ++i) {
          const std::size_t top = i * win.stride;
          for (std::size_t j0 = 0; j0 < d.cols; j0 += detail::kNaiveBatch) {
            const std::size_t nb = std::min(detail::kNaiveBatch, d.cols - j0);
            if (stat == StatKind::StdDev) {
              for (std::size_t b = 0; b < nb; ++b) {
                values[i * d.cols + j0 + b] =
                    static_cast<V>(detail::block_stddev(img, top, (j0 + b) * win.stride, win.w));
              }
              continue;
            }
            detail::batch_block_sums(img, top, j0 * win.stride, win.stride, nb, win.w, sums.data());
            for (std::size_t b = 0; b < nb; ++b) {
              values[i * d.cols + j0 + b] = stat == StatKind::Sum
                                                ? static_cast<V>(sums[b])
                                                : static_cast<V>(static_cast<double>(sums[b]) / n);
            }
          }
        }
      },
      out.values);
  return out;
}

/// Incremental SWA: each row of windows starts from w column strips, then
/// every step right sums the entering strips, adds them and subtracts the
/// strips that leave. O(out_rows * out_cols * w * stride) when stride < w.
template <Pixel T>
ResultGrid dp_naive_swa(const Grid<T>& img, WindowSpec win, StatKind stat) {
  const Dims d = output_dims(img.rows(), img.cols(), win);
  ResultGrid out = detail::make_result<T>(d, stat);
  const std::size_t w = win.w;
  const std::size_t s = win.stride;
  const auto n = static_cast<std::uint64_t>(w * w);
  const bool want_sq = stat == StatKind::StdDev;

  using M = detail::moment_t<T>;
  using Q = detail::square_t<T>;

  auto emit = [&](std::size_t idx, M sum, Q sq) {
    std::visit(
        [&](auto& values) {
          using V = std::decay_t<decltype(values[0])>;
          switch (stat) {
            case StatKind::Sum:
              values[idx] = static_cast<V>(sum);
              break;
            case StatKind::Mean:
              values[idx] = static_cast<V>(static_cast<double>(sum) / static_cast<double>(n));
              break;
            case StatKind::StdDev:
              if constexpr (std::is_integral_v<T>) {
                values[idx] = static_cast<V>(detail::exact_stddev(sum, sq, n));
              } else {
                values[idx] = static_cast<V>(detail::real_stddev(sum, sq, static_cast<double>(n)));
              }
              break;
          }
        },
        out.values);
  };

  // Strip sums indexed by image column; a strip is summed when it enters
  // the window and read back when it leaves.
  const std::size_t ncols = (d.cols - 1) * s + w;
  std::vector<M> strip(ncols);
  std::vector<Q> strip_sq(ncols);
  auto enter = [&](std::size_t top, std::size_t c) {
    detail::column_strip(img, top, c, w, want_sq, strip[c], strip_sq[c]);
  };

  for (std::size_t i = 0; i < d.rows; ++i) {
    const std::size_t top = i * s;
    M sum{};
    Q sq{};
    for (std::size_t c = 0; c < w; ++c) {
      enter(top, c);
      sum += strip[c];
      sq += strip_sq[c];
    }
    emit(i * d.cols, sum, sq);

    for (std::size_t j = 1; j < d.cols; ++j) {
      const std::size_t left = j * s;
      if (s >= w) {
        // no overlap with the previous window
        sum = M{};
        sq = Q{};
        for (std::size_t c = left; c < left + w; ++c) {
          enter(top, c);
          sum += strip[c];
          sq += strip_sq[c];
        }
      } else {
        const std::size_t prev = left - s;
        for (std::size_t k = 0; k < s; ++k) {
          enter(top, prev + w + k);
          sum += strip[prev + w + k] - strip[prev + k];
          sq += strip_sq[prev + w + k] - strip_sq[prev + k];
        }
      }
      emit(i * d.cols + j, sum, sq);
    }
  }
  return out;
}

inline ResultGrid naive_swa(const ImageGrid& img, WindowSpec win, StatKind stat) {
  return std::visit([&](const auto& g) { return naive_swa(g, win, stat); }, img);
}

inline ResultGrid dp_naive_swa(const ImageGrid& img, WindowSpec win, StatKind stat) {
  return std::visit([&](const auto& g) { return dp_naive_swa(g, win, stat); }, img);
}

}  // namespace swa
