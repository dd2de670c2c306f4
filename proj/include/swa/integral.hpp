#pragma once

// Summed-area tables and O(1)-per-window statistics.
//
// Tables are zero-padded: an image of r x c pixels yields an (r+1) x (c+1)
// table whose first row and column are zero, so every window query is the
// same four-corner expression with no boundary branches.
//
// Accumulators are exact for integer pixels: 64-bit for the sum table (safe
// to ~2.8e14 pixels at 16-bit saturation) and 128-bit for the squared table
// (65535^2 * r * c passes 2^64 beyond ~4.29e9 pixels). Float pixels
// accumulate in double.

#include <memory>
#include <new>
#include <optional>

#include "swa/core.hpp"

namespace swa {

enum class Table { sum, squared };

template <Pixel T>
using sum_acc_t = std::conditional_t<std::is_integral_v<T>, std::uint64_t, double>;

template <Pixel T>
using sq_acc_t = std::conditional_t<std::is_integral_v<T>, detail::u128, double>;

template <Table K, Pixel T>
using table_acc_t = std::conditional_t<K == Table::sum, sum_acc_t<T>, sq_acc_t<T>>;

template <typename Acc>
class IntegralImage {
 public:
  using value_type = Acc;

  /// Allocates a table for an rows x cols source with the zero border set.
  /// Interior cells are left for the builder to fill.
  IntegralImage(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    const std::size_t w = cols + 1;
    const std::size_t h = rows + 1;
    std::size_t bytes = 0;
    if (__builtin_mul_overflow(w, h, &bytes) ||
        __builtin_mul_overflow(bytes, sizeof(Acc), &bytes)) {
      throw ResourceError("integral image size overflows size_t", SIZE_MAX);
    }
    try {
      data_ = std::make_unique_for_overwrite<Acc[]>(w * h);
    } catch (const std::bad_alloc&) {
      throw ResourceError("cannot allocate integral image for " + std::to_string(rows) + "x" +
                              std::to_string(cols) + " grid",
                          bytes);
    }
    std::fill_n(data_.get(), w, Acc{});
    for (std::size_t i = 1; i < h; ++i) data_[i * w] = Acc{};
  }

  /// Source image dimensions; the table is one larger in each direction.
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t pitch() const noexcept { return cols_ + 1; }

  Acc at(std::size_t i, std::size_t j) const { return data_[i * pitch() + j]; }
  std::span<const Acc> table() const noexcept { return {data_.get(), (rows_ + 1) * pitch()}; }

  Acc* row_ptr(std::size_t i) noexcept { return data_.get() + i * pitch(); }
  const Acc* row_ptr(std::size_t i) const noexcept { return data_.get() + i * pitch(); }

  friend bool operator==(const IntegralImage& a, const IntegralImage& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && std::ranges::equal(a.table(), b.table());
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::unique_ptr<Acc[]> data_;
};

namespace detail {

template <Table K, typename Acc, Pixel T>
inline Acc table_value(T v) {
  const auto a = static_cast<Acc>(v);
  if constexpr (K == Table::squared) {
    return a * a;
  } else {
    return a;
  }
}

/// Writes the running prefix of source row i into table row i+1.
template <Table K, Pixel T, typename Acc>
void row_prefix(const Grid<T>& img, IntegralImage<Acc>& sat, std::size_t i) {
  const T* src = img.row(i).data();
  Acc* cur = sat.row_ptr(i + 1);
  Acc run{};
  for (std::size_t j = 0; j < img.cols(); ++j) {
    run += table_value<K, Acc>(src[j]);
    cur[j + 1] = run;
  }
}

/// Adds table row i into row i+1 over columns [c0, c1) of the table.
template <typename Acc>
void column_accumulate(IntegralImage<Acc>& sat, std::size_t i, std::size_t c0, std::size_t c1) {
  const Acc* above = sat.row_ptr(i);
  Acc* cur = sat.row_ptr(i + 1);
  for (std::size_t j = c0; j < c1; ++j) cur[j] = above[j] + cur[j];
}

}  // namespace detail

/// Builds the summed-area table of img (or of its squared pixels) in a single
/// pass. Each cell is row-prefix-so-far plus the cell above, the same
/// per-cell arithmetic as the two-phase parallel builder, so both produce
/// bit-identical tables for every accumulator kind.
template <Table K = Table::sum, Pixel T>
IntegralImage<table_acc_t<K, T>> build_sat(const Grid<T>& img) {
  using Acc = table_acc_t<K, T>;
  IntegralImage<Acc> sat(img.rows(), img.cols());
  for (std::size_t i = 0; i < img.rows(); ++i) {
    const T* src = img.row(i).data();
    const Acc* above = sat.row_ptr(i);
    Acc* cur = sat.row_ptr(i + 1);
    Acc run{};
    for (std::size_t j = 0; j < img.cols(); ++j) {
      run += detail::table_value<K, Acc>(src[j]);
      cur[j + 1] = above[j + 1] + run;
    }
  }
  return sat;
}

/// Sum over the w x w region with top-left pixel (top, left).
template <typename Acc>
Acc window_sum(const IntegralImage<Acc>& sat, std::size_t top, std::size_t left, std::size_t w) {
  if (w == 0 || top + w > sat.rows() || left + w > sat.cols()) {
    throw InvalidWindow("region at (" + std::to_string(top) + "," + std::to_string(left) +
                        ") of size " + std::to_string(w) + " lies outside " +
                        std::to_string(sat.rows()) + "x" + std::to_string(sat.cols()));
  }
  const Acc* t = sat.row_ptr(top);
  const Acc* b = sat.row_ptr(top + w);
  return b[left + w] - t[left + w] - b[left] + t[left];
}

/// The tables a statistic needs: the sum table always, the squared table
/// only for StdDev.
template <Pixel T>
struct SatSet {
  IntegralImage<sum_acc_t<T>> sum;
  std::optional<IntegralImage<sq_acc_t<T>>> squared;
};

template <Pixel T>
SatSet<T> build_sats(const Grid<T>& img, StatKind stat) {
  SatSet<T> sats{build_sat<Table::sum>(img), std::nullopt};
  if (stat == StatKind::StdDev) sats.squared.emplace(build_sat<Table::squared>(img));
  return sats;
}

namespace detail {

/// Fills output rows [row_begin, row_end) of out from prebuilt tables.
template <Pixel T>
void query_rows(const SatSet<T>& sats, WindowSpec win, ResultGrid& out, std::size_t row_begin,
                std::size_t row_end) {
  const std::size_t w = win.w;
  const std::size_t s = win.stride;
  const std::size_t oc = out.cols;
  const auto n = static_cast<std::uint64_t>(w * w);
  const double nd = static_cast<double>(n);

  for (std::size_t i = row_begin; i < row_end; ++i) {
    const auto* t = sats.sum.row_ptr(i * s);
    const auto* b = sats.sum.row_ptr(i * s + w);
    switch (out.stat) {
      case StatKind::Sum:
        std::visit(
            [&](auto& values) {
              using V = std::decay_t<decltype(values[0])>;
              V* dst = values.data() + i * oc;
              for (std::size_t j = 0; j < oc; ++j) {
                const std::size_t l = j * s;
                dst[j] = static_cast<V>(b[l + w] - t[l + w] - b[l] + t[l]);
              }
            },
            out.values);
        break;
      case StatKind::Mean: {
        double* dst = std::get<1>(out.values).data() + i * oc;
        for (std::size_t j = 0; j < oc; ++j) {
          const std::size_t l = j * s;
          dst[j] = static_cast<double>(b[l + w] - t[l + w] - b[l] + t[l]) / nd;
        }
        break;
      }
      case StatKind::StdDev: {
        const auto* qt = sats.squared->row_ptr(i * s);
        const auto* qb = sats.squared->row_ptr(i * s + w);
        double* dst = std::get<1>(out.values).data() + i * oc;
        for (std::size_t j = 0; j < oc; ++j) {
          const std::size_t l = j * s;
          const auto sum = b[l + w] - t[l + w] - b[l] + t[l];
          const auto sq = qb[l + w] - qt[l + w] - qb[l] + qt[l];
          if constexpr (std::is_integral_v<T>) {
            dst[j] = exact_stddev(sum, sq, n);
          } else {
            dst[j] = real_stddev(sum, sq, nd);
          }
        }
        break;
      }
    }
  }
}

}  // namespace detail

/// Answers every window placement of win from prebuilt tables.
template <Pixel T>
ResultGrid query_sats(const SatSet<T>& sats, WindowSpec win, StatKind stat) {
  const Dims d = output_dims(sats.sum.rows(), sats.sum.cols(), win);
  if (stat == StatKind::StdDev && !sats.squared) {
    throw InvalidArgument("standard deviation requires the squared-value table");
  }
  ResultGrid out = detail::make_result<T>(d, stat);
  detail::query_rows(sats, win, out, 0, d.rows);
  return out;
}

template <Pixel T>
ResultGrid swa_integral(const Grid<T>& img, WindowSpec win, StatKind stat) {
  validate_window(img.rows(), img.cols(), win);
  return query_sats(build_sats(img, stat), win, stat);
}

/// Evaluates several windows against one set of tables. Every window is
/// validated before any table is built.
template <Pixel T>
std::vector<ResultGrid> swa_multi_window(const Grid<T>& img, std::span<const WindowSpec> windows,
                                         StatKind stat) {
  if (windows.empty()) throw InvalidArgument("window list is empty");
  for (const WindowSpec& win : windows) validate_window(img.rows(), img.cols(), win);
  const SatSet<T> sats = build_sats(img, stat);
  std::vector<ResultGrid> out;
  out.reserve(windows.size());
  for (const WindowSpec& win : windows) out.push_back(query_sats(sats, win, stat));
  return out;
}

inline ResultGrid swa_integral(const ImageGrid& img, WindowSpec win, StatKind stat) {
  return std::visit([&](const auto& g) { return swa_integral(g, win, stat); }, img);
}

inline std::vector<ResultGrid> swa_multi_window(const ImageGrid& img,
                                                std::span<const WindowSpec> windows,
                                                StatKind stat) {
  return std::visit([&](const auto& g) { return swa_multi_window(g, windows, stat); }, img);
}

}  // namespace swa
