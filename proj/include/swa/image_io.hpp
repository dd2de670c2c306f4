#pragma once

// Grid ingestion and emission.
//
//  * Binary PGM (P5). maxval <= 255 gives one byte per sample, otherwise
//    two bytes big-endian. Comments in the header are skipped.
//  * Raw: packed little-endian samples plus a JSON sidecar holding exactly
//    {"rows", "cols", "dtype", "endianness"}. dtype is u8/u16/f32 for images
//    and u64/f64 for result grids.
//
// Synthetic images come from std::mt19937_64, whose output sequence is fixed
// by the C++ standard, so a seed yields the same bytes on every platform.

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "swa/core.hpp"

namespace swa {

namespace detail {

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

inline bool pnm_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

/// Header tokenizer for PNM files: skips whitespace and '#' comments.
class PnmHeader {
 public:
  PnmHeader(std::span<const unsigned char> bytes, std::size_t start) : bytes_(bytes), pos_(start) {}

  std::size_t pos() const { return pos_; }

  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (pnm_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  std::uint64_t number(const char* what) {
    skip_space();
    const std::size_t start = pos_;
    std::uint64_t v = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > (std::uint64_t{1} << 40)) throw FormatError(std::string(what) + " is too large", start);
      ++pos_;
    }
    if (pos_ == start) throw FormatError(std::string("expected ") + what, start);
    return v;
  }

  /// Consumes the single whitespace byte that separates header from samples.
  void end_of_header() {
    if (pos_ >= bytes_.size() || !pnm_space(bytes_[pos_])) {
      throw FormatError("expected whitespace after maxval", pos_);
    }
    ++pos_;
  }

 private:
  std::span<const unsigned char> bytes_;
  std::size_t pos_;
};

template <typename T>
void put_le(std::vector<unsigned char>& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

template <typename T>
T get_le(const unsigned char* p) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// PGM
// ----------------------------------------------------------------------------

inline ImageGrid decode_pgm(std::span<const unsigned char> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw FormatError("not a binary PGM (missing P5 magic)", 0);
  }
  detail::PnmHeader h(bytes, 2);
  const std::uint64_t cols = h.number("width");
  const std::uint64_t rows = h.number("height");
  h.skip_space();
  const std::size_t maxval_at = h.pos();
  const std::uint64_t maxval = h.number("maxval");
  if (cols == 0 || rows == 0) throw FormatError("zero image dimension", 2);
  if (maxval == 0 || maxval > 65535) {
    throw FormatError("maxval " + std::to_string(maxval) + " outside 1..65535", maxval_at);
  }
  h.end_of_header();

  const std::size_t start = h.pos();
  const std::size_t width = maxval <= 255 ? 1 : 2;
  const std::size_t need = rows * cols * width;
  if (bytes.size() - start < need) {
    throw FormatError("truncated payload: need " + std::to_string(need) + " bytes, have " +
                          std::to_string(bytes.size() - start),
                      bytes.size());
  }
  const unsigned char* p = bytes.data() + start;

  auto check = [&](std::uint64_t v, std::size_t i) {
    if (v > maxval) throw FormatError("sample exceeds maxval", start + i * width);
  };
  if (width == 1) {
    std::vector<std::uint8_t> data(p, p + rows * cols);
    for (std::size_t i = 0; i < data.size(); ++i) check(data[i], i);
    return Grid<std::uint8_t>(rows, cols, std::move(data));
  }
  std::vector<std::uint16_t> data(rows * cols);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
    check(data[i], i);
  }
  return Grid<std::uint16_t>(rows, cols, std::move(data));
}

inline ImageGrid read_pgm(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  return decode_pgm(bytes);
}

/// U8 grids are written with maxval 255, U16 grids with maxval 65535.
inline std::vector<unsigned char> encode_pgm(const ImageGrid& img) {
  return std::visit(
      [](const auto& g) -> std::vector<unsigned char> {
        using T = typename std::decay_t<decltype(g)>::value_type;
        if constexpr (std::is_floating_point_v<T>) {
          throw UnsupportedFormat("PGM cannot hold f32 samples losslessly; use raw");
        } else {
          const std::string header = "P5\n" + std::to_string(g.cols()) + " " +
                                     std::to_string(g.rows()) + "\n" +
                                     (sizeof(T) == 1 ? "255" : "65535") + "\n";
          std::vector<unsigned char> out(header.begin(), header.end());
          out.reserve(out.size() + g.size() * sizeof(T));
          for (T v : g.data()) {
            if constexpr (sizeof(T) == 2) out.push_back(static_cast<unsigned char>(v >> 8));
            out.push_back(static_cast<unsigned char>(v & 0xff));
          }
          return out;
        }
      },
      img);
}

inline void write_pgm(const ImageGrid& img, const std::filesystem::path& path) {
  detail::write_file(path, encode_pgm(img));
}

// ----------------------------------------------------------------------------
// Raw + sidecar
// ----------------------------------------------------------------------------

struct RawSidecar {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string dtype;
  std::string endianness = "little";

  friend bool operator==(const RawSidecar&, const RawSidecar&) = default;
};

inline std::size_t dtype_width(std::string_view dtype) {
  if (dtype == "u8") return 1;
  if (dtype == "u16") return 2;
  if (dtype == "f32") return 4;
  if (dtype == "u64" || dtype == "f64") return 8;
  throw FormatError("unknown dtype '" + std::string(dtype) + "'");
}

inline std::string to_json(const RawSidecar& s) {
  nlohmann::ordered_json j;
  j["rows"] = s.rows;
  j["cols"] = s.cols;
  j["dtype"] = s.dtype;
  j["endianness"] = s.endianness;
  return j.dump(2) + "\n";
}

inline RawSidecar parse_sidecar(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("sidecar is not valid JSON: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw FormatError("sidecar must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "rows" && key != "cols" && key != "dtype" && key != "endianness") {
      throw FormatError("unexpected sidecar field '" + key + "'");
    }
  }
  RawSidecar s;
  try {
    s.rows = j.at("rows").get<std::size_t>();
    s.cols = j.at("cols").get<std::size_t>();
    s.dtype = j.at("dtype").get<std::string>();
    s.endianness = j.at("endianness").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad sidecar: ") + e.what());
  }
  if (s.endianness != "little") throw FormatError("unsupported endianness '" + s.endianness + "'");
  if (s.rows == 0 || s.cols == 0) throw FormatError("sidecar dimensions must be positive");
  dtype_width(s.dtype);
  return s;
}

inline std::filesystem::path default_sidecar(const std::filesystem::path& raw) {
  return std::filesystem::path(raw.string() + ".json");
}

inline ImageGrid decode_raw(std::span<const unsigned char> bytes, const RawSidecar& side) {
  const std::size_t width = dtype_width(side.dtype);
  if (side.rows * side.cols * width != bytes.size()) {
    throw FormatError("raw payload is " + std::to_string(bytes.size()) + " bytes but sidecar " +
                      std::to_string(side.rows) + "x" + std::to_string(side.cols) + " " +
                      side.dtype + " needs " + std::to_string(side.rows * side.cols * width));
  }
  const std::size_t n = side.rows * side.cols;
  auto load = [&]<typename T>() {
    std::vector<T> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = detail::get_le<T>(bytes.data() + i * sizeof(T));
    return data;
  };
  if (side.dtype == "u8") return Grid<std::uint8_t>(side.rows, side.cols, load.operator()<std::uint8_t>());
  if (side.dtype == "u16") return Grid<std::uint16_t>(side.rows, side.cols, load.operator()<std::uint16_t>());
  if (side.dtype == "f32") {
    auto data = load.operator()<float>();
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(data[i])) throw FormatError("non-finite f32 sample", i * 4);
    }
    return Grid<float>(side.rows, side.cols, std::move(data));
  }
  throw FormatError("dtype '" + side.dtype + "' is not an image element kind");
}

inline ImageGrid read_raw(const std::filesystem::path& raw_path,
                          const std::filesystem::path& sidecar_path) {
  const auto side_bytes = detail::read_file(sidecar_path);
  const RawSidecar side =
      parse_sidecar({reinterpret_cast<const char*>(side_bytes.data()), side_bytes.size()});
  return decode_raw(detail::read_file(raw_path), side);
}

inline std::vector<unsigned char> encode_raw(const ImageGrid& img) {
  return std::visit(
      [](const auto& g) {
        std::vector<unsigned char> out;
        out.reserve(g.size() * sizeof(typename std::decay_t<decltype(g)>::value_type));
        for (auto v : g.data()) detail::put_le(out, v);
        return out;
      },
      img);
}

inline std::vector<unsigned char> encode_raw(const ResultGrid& res) {
  return std::visit(
      [](const auto& values) {
        std::vector<unsigned char> out;
        out.reserve(values.size() * 8);
        for (auto v : values) detail::put_le(out, v);
        return out;
      },
      res.values);
}

inline RawSidecar sidecar_for(const ImageGrid& img) {
  return {rows_of(img), cols_of(img), std::string(to_string(kind_of(img))), "little"};
}

inline RawSidecar sidecar_for(const ResultGrid& res) {
  return {res.rows, res.cols, res.is_exact() ? "u64" : "f64", "little"};
}

template <typename G>
  requires std::same_as<G, ImageGrid> || std::same_as<G, ResultGrid>
void write_raw(const G& grid, const std::filesystem::path& raw_path,
               const std::filesystem::path& sidecar_path) {
  detail::write_file(raw_path, encode_raw(grid));
  const std::string side = to_json(sidecar_for(grid));
  detail::write_file(sidecar_path, {reinterpret_cast<const unsigned char*>(side.data()), side.size()});
}

// ----------------------------------------------------------------------------
// Synthetic images
// ----------------------------------------------------------------------------

struct UniformRandom {
  std::uint64_t seed = 0;
};
struct Constant {
  double value = 0;
};
/// Alternating tile x tile squares; the top-left square takes low.
struct Checkerboard {
  std::size_t tile = 1;
  double low = 0;
  double high = 1;
};

using GenKind = std::variant<UniformRandom, Constant, Checkerboard>;

namespace detail {

template <Pixel T>
T checked_level(double v) {
  if constexpr (std::is_integral_v<T>) {
    if (!(v >= 0 && v <= std::numeric_limits<T>::max()) || v != std::floor(v)) {
      throw InvalidArgument("value " + std::to_string(v) + " is not representable as " +
                            std::string(to_string(elem_kind_of<T>())));
    }
  } else if (!std::isfinite(v)) {
    throw InvalidArgument("value must be finite");
  }
  return static_cast<T>(v);
}

/// Random samples take the top bits of each 64-bit draw. f32 samples are
/// 16-bit intensities scaled into [0, 1) by 2^-16.
template <Pixel T>
T random_sample(std::uint64_t bits) {
  if constexpr (std::is_same_v<T, std::uint8_t>) {
    return static_cast<T>(bits >> 56);
  } else if constexpr (std::is_same_v<T, std::uint16_t>) {
    return static_cast<T>(bits >> 48);
  } else {
    return static_cast<float>(bits >> 48) * 0x1p-16f;
  }
}

template <Pixel T>
Grid<T> generate_typed(const GenKind& kind, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw InvalidArgument("generated dimensions must be at least 1x1");
  std::vector<T> data(rows * cols);
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, UniformRandom>) {
          std::mt19937_64 rng(k.seed);
          for (T& v : data) v = random_sample<T>(rng());
        } else if constexpr (std::is_same_v<K, Constant>) {
          std::fill(data.begin(), data.end(), checked_level<T>(k.value));
        } else {
          if (k.tile == 0) throw InvalidArgument("checkerboard tile must be at least 1");
          const T lo = checked_level<T>(k.low);
          const T hi = checked_level<T>(k.high);
          for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
              data[i * cols + j] = ((i / k.tile + j / k.tile) % 2 == 0) ? lo : hi;
            }
          }
        }
      },
      kind);
  return Grid<T>(rows, cols, std::move(data));
}

}  // namespace detail

inline ImageGrid generate(const GenKind& kind, std::size_t rows, std::size_t cols, ElemKind elem) {
  switch (elem) {
    case ElemKind::U8: return detail::generate_typed<std::uint8_t>(kind, rows, cols);
    case ElemKind::U16: return detail::generate_typed<std::uint16_t>(kind, rows, cols);
    case ElemKind::F32: return detail::generate_typed<float>(kind, rows, cols);
  }
  throw InvalidArgument("unknown element kind");
}

}  // namespace swa
