#pragma once

// Benchmark harness: times each strategy on generated images and reports one
// CSV row per (method, size, window, repeat). SAT construction and the query
// sweep are timed separately so the two cost terms can be checked on their own.

#include <chrono>
#include <charconv>
#include <functional>
#include <optional>
#include <ostream>

#include "swa/image_io.hpp"
#include "swa/naive.hpp"
#include "swa/parallel.hpp"

namespace swa {

enum class Method { naive, dp_naive, integral, parallel };

constexpr std::string_view to_string(Method m) {
  switch (m) {
    case Method::naive: return "naive";
    case Method::dp_naive: return "dp_naive";
    case Method::integral: return "integral";
    case Method::parallel: return "parallel";
  }
  return "?";
}

/// Accepts the CSV names plus the short "dp" spelling used by `swa run`.
inline Method parse_method(std::string_view s) {
  if (s == "naive") return Method::naive;
  if (s == "dp" || s == "dp_naive") return Method::dp_naive;
  if (s == "integral") return Method::integral;
  if (s == "parallel") return Method::parallel;
  throw InvalidArgument("unknown method '" + std::string(s) + "'");
}

inline constexpr std::string_view kBenchHeader =
    "method,rows,cols,window,stride,stat,workers,build_ms,query_ms,total_ms,repeat_index";

struct BenchReport {
  Method method = Method::integral;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t window = 0;
  std::size_t stride = 1;
  StatKind stat = StatKind::Sum;
  std::size_t workers = 1;
  double build_ms = 0;
  double query_ms = 0;
  double total_ms = 0;
  std::size_t repeat_index = 0;
  bool skipped = false;
};

namespace detail {

inline std::string fixed3(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 3);
  return std::string(buf, end);
}

}  // namespace detail

/// One CSV line without the trailing newline. Skipped runs carry "skipped"
/// in all three timing columns.
inline std::string to_csv(const BenchReport& r) {
  std::string line;
  line += to_string(r.method);
  for (std::size_t v : {r.rows, r.cols, r.window, r.stride}) line += "," + std::to_string(v);
  line += ",";
  line += to_string(r.stat);
  line += "," + std::to_string(r.workers);
  if (r.skipped) {
    line += ",skipped,skipped,skipped";
  } else {
    line += "," + detail::fixed3(r.build_ms) + "," + detail::fixed3(r.query_ms) + "," +
            detail::fixed3(r.total_ms);
  }
  line += "," + std::to_string(r.repeat_index);
  return line;
}

struct BenchConfig {
  std::vector<Dims> sizes;
  std::vector<std::size_t> windows;
  std::vector<Method> methods;
  StatKind stat = StatKind::Sum;
  std::size_t stride = 1;
  ElemKind dtype = ElemKind::U16;
  std::size_t workers = ParallelConfig::default_workers();
  std::size_t repeats = 3;
  std::uint64_t seed = 0;
  double timeout_s = 600.0;

  /// sizes {1024^2, 2048^2, 4096^2} x windows {50, 500, 1000} x all methods.
  static BenchConfig paper_desk() {
    BenchConfig c;
    c.sizes = {{1024, 1024}, {2048, 2048}, {4096, 4096}};
    c.windows = {50, 500, 1000};
    c.methods = {Method::naive, Method::dp_naive, Method::integral, Method::parallel};
    return c;
  }
};

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

/// Times a single run of method on img.
template <Pixel T>
BenchReport time_method(Method method, const Grid<T>& img, WindowSpec win, StatKind stat,
                        const ParallelConfig& cfg) {
  BenchReport r;
  r.method = method;
  r.rows = img.rows();
  r.cols = img.cols();
  r.window = win.w;
  r.stride = win.stride;
  r.stat = stat;
  validate_window(img.rows(), img.cols(), win);

  const auto t0 = Clock::now();
  switch (method) {
    case Method::naive:
    case Method::dp_naive: {
      const ResultGrid out =
          method == Method::naive ? naive_swa(img, win, stat) : dp_naive_swa(img, win, stat);
      const auto t1 = Clock::now();
      r.query_ms = r.total_ms = elapsed_ms(t0, t1);
      break;
    }
    case Method::integral: {
      const SatSet<T> sats = build_sats(img, stat);
      const auto t1 = Clock::now();
      const ResultGrid out = query_sats(sats, win, stat);
      const auto t2 = Clock::now();
      r.build_ms = elapsed_ms(t0, t1);
      r.query_ms = elapsed_ms(t1, t2);
      r.total_ms = elapsed_ms(t0, t2);
      break;
    }
    case Method::parallel: {
      r.workers = detail::effective_workers(cfg, img.size(), std::min(img.rows(), img.cols()));
      const SatSet<T> sats = build_sats_parallel(img, stat, cfg);
      const auto t1 = Clock::now();
      const ResultGrid out = query_sats_parallel(sats, win, stat, cfg);
      const auto t2 = Clock::now();
      r.build_ms = elapsed_ms(t0, t1);
      r.query_ms = elapsed_ms(t1, t2);
      r.total_ms = elapsed_ms(t0, t2);
      break;
    }
  }
  return r;
}

namespace detail {

template <Pixel T>
Grid<T> crop(const Grid<T>& img, std::size_t rows, std::size_t cols) {
  std::vector<T> data;
  data.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const auto row = img.row(i);
    data.insert(data.end(), row.begin(), row.begin() + static_cast<std::ptrdiff_t>(cols));
  }
  return Grid<T>(rows, cols, std::move(data));
}

}  // namespace detail

/// Estimates one run's wall time in ms by timing the method on a crop of
/// the image and scaling by output cell count. The naive crop keeps up to
/// 3x16 output windows; the DP crop keeps 3 full output rows because its
/// per-row start-up cost depends on the row length.
template <Pixel T>
double project_ms(Method method, const Grid<T>& img, WindowSpec win, StatKind stat) {
  const Dims full = output_dims(img.rows(), img.cols(), win);
  const std::size_t probe_rows = std::min(img.rows(), win.w + 2 * win.stride);
  const std::size_t probe_cols =
      method == Method::naive ? std::min(img.cols(), win.w + 15 * win.stride) : img.cols();
  const Grid<T> probe = detail::crop(img, probe_rows, probe_cols);
  const Dims pd = output_dims(probe_rows, probe_cols, win);
  const BenchReport r = time_method(method, probe, win, stat, ParallelConfig{1});
  const double scale = static_cast<double>(full.rows * full.cols) / static_cast<double>(pd.rows * pd.cols);
  return r.total_ms * scale;
}

/// Runs the whole benchmark matrix, handing each report to sink as soon as
/// it is produced. Naive and DP runs projected past the timeout are reported
/// once as skipped.
inline void run_bench(const BenchConfig& cfg, const std::function<void(const BenchReport&)>& sink) {
  if (cfg.sizes.empty() || cfg.windows.empty() || cfg.methods.empty()) {
    throw InvalidArgument("bench needs at least one size, window and method");
  }
  if (cfg.repeats == 0) throw InvalidArgument("repeats must be at least 1");
  for (const Dims& d : cfg.sizes) {
    for (std::size_t w : cfg.windows) validate_window(d.rows, d.cols, {w, cfg.stride});
  }
  const ParallelConfig pcfg{cfg.workers};

  for (const Dims& d : cfg.sizes) {
    const ImageGrid img = generate(UniformRandom{cfg.seed}, d.rows, d.cols, cfg.dtype);
    std::visit(
        [&](const auto& g) {
          for (std::size_t w : cfg.windows) {
            const WindowSpec win{w, cfg.stride};
            for (Method m : cfg.methods) {
              if (m == Method::naive || m == Method::dp_naive) {
                const double projected = project_ms(m, g, win, cfg.stat);
                if (projected > cfg.timeout_s * 1000.0) {
                  BenchReport r;
                  r.method = m;
                  r.rows = d.rows;
                  r.cols = d.cols;
                  r.window = w;
                  r.stride = cfg.stride;
                  r.stat = cfg.stat;
                  r.skipped = true;
                  sink(r);
                  continue;
                }
              }
              for (std::size_t k = 0; k < cfg.repeats; ++k) {
                BenchReport r = time_method(m, g, win, cfg.stat, pcfg);
                r.repeat_index = k;
                sink(r);
              }
            }
          }
        },
        img);
  }
}

}  // namespace swa
