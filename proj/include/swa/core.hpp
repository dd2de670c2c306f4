#pragma once

// Shared data model for sliding-window analysis: pixel grids, window
// geometry, statistic kinds and result grids.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace swa {

// ----------------------------------------------------------------------------
// Errors
// ----------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidWindow : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Raised when a table cannot be allocated; the message carries the byte count.
class ResourceError : public Error {
 public:
  ResourceError(std::string what, std::size_t bytes)
      : Error(std::move(what) + " (" + std::to_string(bytes) + " bytes)"), bytes_(bytes) {}
  std::size_t bytes() const noexcept { return bytes_; }

 private:
  std::size_t bytes_;
};

/// Malformed input file. offset is the byte position where decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  explicit FormatError(const std::string& what) : Error(what), offset_(0) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedFormat : public Error {
 public:
  using Error::Error;
};

// ----------------------------------------------------------------------------
// Element kinds
// ----------------------------------------------------------------------------

enum class ElemKind { U8, U16, F32 };

template <typename T>
concept Pixel = std::same_as<T, std::uint8_t> || std::same_as<T, std::uint16_t> ||
                std::same_as<T, float>;

template <Pixel T>
constexpr ElemKind elem_kind_of() {
  if constexpr (std::is_same_v<T, std::uint8_t>) {
    return ElemKind::U8;
  } else if constexpr (std::is_same_v<T, std::uint16_t>) {
    return ElemKind::U16;
  } else {
    return ElemKind::F32;
  }
}

constexpr std::string_view to_string(ElemKind k) {
  switch (k) {
    case ElemKind::U8: return "u8";
    case ElemKind::U16: return "u16";
    case ElemKind::F32: return "f32";
  }
  return "?";
}

inline ElemKind parse_elem_kind(std::string_view s) {
  if (s == "u8") return ElemKind::U8;
  if (s == "u16") return ElemKind::U16;
  if (s == "f32") return ElemKind::F32;
  throw InvalidArgument("unknown element kind '" + std::string(s) + "'");
}

constexpr std::size_t byte_width(ElemKind k) {
  switch (k) {
    case ElemKind::U8: return 1;
    case ElemKind::U16: return 2;
    case ElemKind::F32: return 4;
  }
  return 0;
}

// ----------------------------------------------------------------------------
// Grid
// ----------------------------------------------------------------------------

/// Row-major 2-D pixel grid. Immutable after construction apart from
/// move-assignment; float grids never hold NaN or Inf.
template <Pixel T>
class Grid {
 public:
  using value_type = T;

  Grid(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows_ == 0 || cols_ == 0) {
      throw InvalidArgument("grid dimensions must be at least 1x1");
    }
    if (data_.size() != rows_ * cols_) {
      throw InvalidArgument("grid data length " + std::to_string(data_.size()) +
                            " does not match " + std::to_string(rows_) + "x" +
                            std::to_string(cols_));
    }
    if constexpr (std::is_floating_point_v<T>) {
      for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
          throw InvalidArgument("non-finite pixel at index " + std::to_string(i));
        }
      }
    }
  }

  Grid(std::size_t rows, std::size_t cols, T fill)
      : Grid(rows, cols, std::vector<T>(rows * cols, fill)) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  static constexpr ElemKind kind() { return elem_kind_of<T>(); }

  T operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> data() const noexcept { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<T> data_;
};

using ImageGrid = std::variant<Grid<std::uint8_t>, Grid<std::uint16_t>, Grid<float>>;

inline ElemKind kind_of(const ImageGrid& img) {
  return std::visit([](const auto& g) { return g.kind(); }, img);
}
inline std::size_t rows_of(const ImageGrid& img) {
  return std::visit([](const auto& g) { return g.rows(); }, img);
}
inline std::size_t cols_of(const ImageGrid& img) {
  return std::visit([](const auto& g) { return g.cols(); }, img);
}

// ----------------------------------------------------------------------------
// Windows and statistics
// ----------------------------------------------------------------------------

/// Square window of side w moved in steps of stride. Only placements fully
/// inside the grid are produced.
struct WindowSpec {
  std::size_t w = 1;
  std::size_t stride = 1;

  friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
};

enum class StatKind { Sum, Mean, StdDev };

constexpr std::string_view to_string(StatKind s) {
  switch (s) {
    case StatKind::Sum: return "sum";
    case StatKind::Mean: return "mean";
    case StatKind::StdDev: return "std";
  }
  return "?";
}

inline StatKind parse_stat(std::string_view s) {
  if (s == "sum") return StatKind::Sum;
  if (s == "mean") return StatKind::Mean;
  if (s == "std") return StatKind::StdDev;
  throw InvalidArgument("unknown statistic '" + std::string(s) + "'");
}

inline void validate_window(std::size_t rows, std::size_t cols, WindowSpec win) {
  if (win.w == 0) throw InvalidWindow("window size must be at least 1");
  if (win.stride == 0) throw InvalidWindow("stride must be at least 1");
  if (win.w > rows || win.w > cols) {
    throw InvalidWindow("window " + std::to_string(win.w) + " exceeds grid " +
                        std::to_string(rows) + "x" + std::to_string(cols));
  }
}

struct Dims {
  std::size_t rows;
  std::size_t cols;
  friend bool operator==(const Dims&, const Dims&) = default;
};

inline Dims output_dims(std::size_t rows, std::size_t cols, WindowSpec win) {
  validate_window(rows, cols, win);
  return {(rows - win.w) / win.stride + 1, (cols - win.w) / win.stride + 1};
}

// ----------------------------------------------------------------------------
// Results
// ----------------------------------------------------------------------------

/// Dense grid of per-window statistics. Sums over integer inputs are held as
/// exact unsigned 64-bit values; everything else is double.
struct ResultGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  StatKind stat = StatKind::Sum;
  std::variant<std::vector<std::uint64_t>, std::vector<double>> values;

  bool is_exact() const noexcept { return values.index() == 0; }
  const std::vector<std::uint64_t>& exact() const { return std::get<0>(values); }
  const std::vector<double>& real() const { return std::get<1>(values); }

  double at(std::size_t r, std::size_t c) const {
    return std::visit([&](const auto& v) { return static_cast<double>(v[r * cols + c]); },
                      values);
  }

  friend bool operator==(const ResultGrid&, const ResultGrid&) = default;
};

namespace detail {

using u128 = unsigned __int128;

template <Pixel T>
inline constexpr bool exact_pixels = std::is_integral_v<T>;

/// Allocates the value buffer matching the result kind for (T, stat).
template <Pixel T>
ResultGrid make_result(Dims d, StatKind stat) {
  ResultGrid out{d.rows, d.cols, stat, {}};
  if (exact_pixels<T> && stat == StatKind::Sum) {
    out.values = std::vector<std::uint64_t>(d.rows * d.cols);
  } else {
    out.values = std::vector<double>(d.rows * d.cols);
  }
  return out;
}

/// Population standard deviation from exact integer moments:
/// var = (n * sq - sum^2) / n^2 evaluated without cancellation.
inline double exact_stddev(std::uint64_t sum, u128 sq, std::uint64_t n) {
  const u128 s = sum;
  const u128 num = static_cast<u128>(n) * sq - s * s;
  const double nn = static_cast<double>(n);
  return std::sqrt(static_cast<double>(num) / (nn * nn));
}

/// One-pass population standard deviation from floating moments, clamped at 0.
inline double real_stddev(double sum, double sq, double n) {
  const double mean = sum / n;
  return std::sqrt(std::max(0.0, sq / n - mean * mean));
}

}  // namespace detail
}  // namespace swa
