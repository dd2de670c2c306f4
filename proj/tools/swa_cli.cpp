// swa: command-line front end for sliding-window analysis.
//
//   swa run    analyse one image and write the result grid
//   swa gen    write a synthetic image
//   swa bench  time the strategies and emit CSV
//
// Exit codes: 0 success, 1 I/O or format error, 2 invalid flags.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "swa/swa.hpp"

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t k = s.find(sep, start);
    out.push_back(s.substr(start, k - start));
    if (k == std::string::npos) break;
    start = k + 1;
  }
  return out;
}

std::size_t parse_count(const std::string& s, const std::string& flag) {
  std::size_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || v == 0) {
    throw UsageError(flag + ": '" + s + "' is not a positive integer");
  }
  return v;
}

std::string format_value(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void write_csv(const swa::ResultGrid& res, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw swa::Error("cannot open " + path + " for writing");
  std::visit(
      [&](const auto& values) {
        for (std::size_t i = 0; i < res.rows; ++i) {
          std::string line;
          for (std::size_t j = 0; j < res.cols; ++j) {
            if (j) line += ',';
            const auto v = values[i * res.cols + j];
            if constexpr (std::is_integral_v<std::decay_t<decltype(v)>>) {
              line += std::to_string(v);
            } else {
              line += format_value(v);
            }
          }
          out << line << '\n';
        }
      },
      res.values);
  if (!out) throw swa::Error("write failed for " + path);
}

// --- run ---------------------------------------------------------------------

struct RunOptions {
  std::string input;
  std::string format = "pgm";
  std::string sidecar;
  std::size_t window = 0;
  std::size_t stride = 1;
  std::string stat;
  std::string method;
  std::size_t threads = 0;
  std::string output;
  std::string output_format = "raw";
};

int cmd_run(const RunOptions& o) {
  const swa::StatKind stat = swa::parse_stat(o.stat);
  const swa::Method method = swa::parse_method(o.method);

  const swa::ImageGrid img =
      o.format == "pgm"
          ? swa::read_pgm(o.input)
          : swa::read_raw(o.input, o.sidecar.empty() ? swa::default_sidecar(o.input)
                                                     : std::filesystem::path(o.sidecar));
  const swa::WindowSpec win{o.window, o.stride};
  try {
    swa::validate_window(swa::rows_of(img), swa::cols_of(img), win);
  } catch (const swa::InvalidWindow& e) {
    throw UsageError(std::string(o.window > swa::rows_of(img) || o.window > swa::cols_of(img)
                                     ? "--window: "
                                     : "--stride: ") +
                     e.what());
  }

  swa::ParallelConfig pcfg;
  if (o.threads != 0) pcfg.workers = o.threads;

  const auto t0 = swa::Clock::now();
  swa::ResultGrid res;
  switch (method) {
    case swa::Method::naive: res = swa::naive_swa(img, win, stat); break;
    case swa::Method::dp_naive: res = swa::dp_naive_swa(img, win, stat); break;
    case swa::Method::integral: res = swa::swa_integral(img, win, stat); break;
    case swa::Method::parallel: res = swa::swa_parallel(img, win, stat, pcfg); break;
  }
  const double ms = swa::elapsed_ms(t0, swa::Clock::now());

  if (o.output_format == "raw") {
    swa::write_raw(res, o.output, swa::default_sidecar(o.output));
  } else {
    write_csv(res, o.output);
  }
  std::cout << "in=" << swa::rows_of(img) << "x" << swa::cols_of(img) << " out=" << res.rows
            << "x" << res.cols << " method=" << swa::to_string(method)
            << " stat=" << swa::to_string(stat) << " window=" << win.w
            << " stride=" << win.stride << " elapsed_ms=" << swa::detail::fixed3(ms) << "\n";
  return 0;
}

// --- gen ---------------------------------------------------------------------

struct GenOptions {
  std::string kind;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string dtype;
  std::uint64_t seed = 0;
  double value = 1;
  std::size_t tile = 1;
  std::string output;
  std::string format;
};

int cmd_gen(const GenOptions& o) {
  const swa::ElemKind elem = swa::parse_elem_kind(o.dtype);
  if (elem == swa::ElemKind::F32 && o.format == "pgm") {
    throw UsageError("--dtype: f32 cannot be written as --format pgm; use raw");
  }
  swa::GenKind kind;
  if (o.kind == "random") {
    kind = swa::UniformRandom{o.seed};
  } else if (o.kind == "constant") {
    kind = swa::Constant{o.value};
  } else {
    kind = swa::Checkerboard{o.tile, 0, o.value};
  }
  const swa::ImageGrid img = [&] {
    try {
      return swa::generate(kind, o.rows, o.cols, elem);
    } catch (const swa::InvalidArgument& e) {
      throw UsageError(std::string("--value: ") + e.what());
    }
  }();
  if (o.format == "pgm") {
    swa::write_pgm(img, o.output);
  } else {
    swa::write_raw(img, o.output, swa::default_sidecar(o.output));
  }
  return 0;
}

// --- bench -------------------------------------------------------------------

struct BenchOptions {
  std::string sizes;
  std::string windows;
  std::string methods;
  std::string stat = "sum";
  std::size_t threads = 0;
  std::size_t repeats = 3;
  std::uint64_t seed = 0;
  std::string preset;
  double timeout = 600;
  std::size_t stride = 1;
  std::string dtype = "u16";
  std::string output;
};

int cmd_bench(const BenchOptions& o) {
  swa::BenchConfig cfg;
  if (o.preset == "paper-desk") cfg = swa::BenchConfig::paper_desk();

  if (!o.sizes.empty()) {
    cfg.sizes.clear();
    for (const std::string& s : split(o.sizes, ',')) {
      const auto parts = split(s, 'x');
      if (parts.size() != 2) throw UsageError("--sizes: expected RxC, got '" + s + "'");
      cfg.sizes.push_back({parse_count(parts[0], "--sizes"), parse_count(parts[1], "--sizes")});
    }
  }
  if (!o.windows.empty()) {
    cfg.windows.clear();
    for (const std::string& s : split(o.windows, ',')) cfg.windows.push_back(parse_count(s, "--windows"));
  }
  if (!o.methods.empty()) {
    cfg.methods.clear();
    for (const std::string& s : split(o.methods, ',')) {
      try {
        cfg.methods.push_back(swa::parse_method(s));
      } catch (const swa::InvalidArgument& e) {
        throw UsageError(std::string("--methods: ") + e.what());
      }
    }
  }
  if (cfg.sizes.empty()) throw UsageError("--sizes: required unless --preset is given");
  if (cfg.windows.empty()) throw UsageError("--windows: required unless --preset is given");
  if (cfg.methods.empty()) throw UsageError("--methods: required unless --preset is given");

  cfg.stat = swa::parse_stat(o.stat);
  cfg.stride = o.stride;
  cfg.dtype = swa::parse_elem_kind(o.dtype);
  if (o.threads != 0) cfg.workers = o.threads;
  cfg.repeats = o.repeats;
  cfg.seed = o.seed;
  cfg.timeout_s = o.timeout;
  for (const swa::Dims& d : cfg.sizes) {
    for (std::size_t w : cfg.windows) {
      if (w > d.rows || w > d.cols) {
        throw UsageError("--windows: window " + std::to_string(w) + " exceeds size " +
                         std::to_string(d.rows) + "x" + std::to_string(d.cols));
      }
    }
  }

  std::ofstream file;
  if (!o.output.empty()) {
    file.open(o.output, std::ios::trunc);
    if (!file) throw swa::Error("cannot open " + o.output + " for writing");
  }
  std::ostream& out = o.output.empty() ? std::cout : file;
  out << swa::kBenchHeader << '\n' << std::flush;
  swa::run_bench(cfg, [&](const swa::BenchReport& r) { out << swa::to_csv(r) << '\n' << std::flush; });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sliding-window analysis over 2-D grids"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Analyse one image");
  run_cmd->add_option("--input", run.input, "Input image")->required();
  run_cmd->add_option("--format", run.format, "Input format")->check(CLI::IsMember({"pgm", "raw"}));
  run_cmd->add_option("--sidecar", run.sidecar, "Raw sidecar (default: INPUT.json)");
  run_cmd->add_option("--window", run.window, "Window side length")->required()->check(CLI::PositiveNumber);
  run_cmd->add_option("--stride", run.stride, "Window step")->check(CLI::PositiveNumber);
  run_cmd->add_option("--stat", run.stat, "Statistic")->required()->check(CLI::IsMember({"sum", "mean", "std"}));
  run_cmd->add_option("--method", run.method, "Strategy")
      ->required()
      ->check(CLI::IsMember({"naive", "dp", "integral", "parallel"}));
  run_cmd->add_option("--threads", run.threads, "Workers for the parallel method (0 = all cores)");
  run_cmd->add_option("--output", run.output, "Result path")->required();
  run_cmd->add_option("--output-format", run.output_format, "Result format")->check(CLI::IsMember({"raw", "csv"}));

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic image");
  gen_cmd->add_option("--kind", gen.kind, "Image kind")
      ->required()
      ->check(CLI::IsMember({"random", "constant", "checkerboard"}));
  gen_cmd->add_option("--rows", gen.rows, "Rows")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--cols", gen.cols, "Columns")->required()->check(CLI::PositiveNumber);
  gen_cmd->add_option("--dtype", gen.dtype, "Element kind")->required()->check(CLI::IsMember({"u8", "u16", "f32"}));
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--value", gen.value, "Constant value, or checkerboard high level");
  gen_cmd->add_option("--tile", gen.tile, "Checkerboard tile size")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--output", gen.output, "Output path")->required();
  gen_cmd->add_option("--format", gen.format, "Output format")->required()->check(CLI::IsMember({"pgm", "raw"}));

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Benchmark strategies, CSV output");
  bench_cmd->add_option("--sizes", bench.sizes, "Image sizes, e.g. 1024x1024,2048x2048");
  bench_cmd->add_option("--windows", bench.windows, "Window sizes, e.g. 50,500");
  bench_cmd->add_option("--methods", bench.methods, "naive,dp_naive,integral,parallel");
  bench_cmd->add_option("--stat", bench.stat, "Statistic")->check(CLI::IsMember({"sum", "mean", "std"}));
  bench_cmd->add_option("--threads", bench.threads, "Workers for the parallel method (0 = all cores)");
  bench_cmd->add_option("--repeats", bench.repeats, "Repeats per configuration")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench.seed, "Seed for generated inputs");
  bench_cmd->add_option("--preset", bench.preset, "Named configuration")->check(CLI::IsMember({"paper-desk"}));
  bench_cmd->add_option("--timeout", bench.timeout, "Skip naive/dp runs projected beyond this many seconds")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--stride", bench.stride, "Window step")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--dtype", bench.dtype, "Element kind of generated inputs")
      ->check(CLI::IsMember({"u8", "u16", "f32"}));
  bench_cmd->add_option("--output", bench.output, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*gen_cmd) return cmd_gen(gen);
    if (*bench_cmd) return cmd_bench(bench);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const swa::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
