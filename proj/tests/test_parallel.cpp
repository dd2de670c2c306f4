#include <gtest/gtest.h>

#include <random>

#include "swa/image_io.hpp"
#include "swa/parallel.hpp"
#include "test_util.hpp"

using namespace swa;

namespace {

ParallelConfig forced(std::size_t p) { return ParallelConfig{p, 0}; }

}  // namespace

TEST(BuildSatParallel, HandExampleTwoWorkers) {
  const Grid<std::uint8_t> g(2, 2, std::vector<std::uint8_t>{1, 2, 3, 4});
  const auto sat = build_sat_parallel(g, forced(2));
  EXPECT_TRUE(std::ranges::equal(sat.table(), std::vector<std::uint64_t>{0, 0, 0, 0, 1, 3, 0, 4, 10}));
}

TEST(BuildSatParallel, BitIdenticalForAllWorkerCounts) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t r = 1 + rng() % 150;
    const std::size_t c = 1 + rng() % 150;
    const auto u = swa::testing::random_grid<std::uint16_t>(rng, r, c);
    const auto f = swa::testing::random_grid<float>(rng, r, c);
    for (std::size_t p : {1u, 2u, 3u, 4u, 8u}) {
      EXPECT_EQ(build_sat_parallel(u, forced(p)), build_sat(u));
      EXPECT_EQ(build_sat_parallel<Table::squared>(u, forced(p)), build_sat<Table::squared>(u));
      // doubles compared by bit pattern via operator== on equal tables
      EXPECT_EQ(build_sat_parallel(f, forced(p)), build_sat(f));
      EXPECT_EQ(build_sat_parallel<Table::squared>(f, forced(p)), build_sat<Table::squared>(f));
    }
  }
}

TEST(SwaParallel, BitIdenticalToSequential) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const auto kind = static_cast<ElemKind>(trial % 3);
    const std::size_t r = 1 + rng() % 120;
    const std::size_t c = 1 + rng() % 120;
    const ImageGrid img = swa::testing::random_image(rng, kind, r, c);
    const std::size_t w = 1 + rng() % std::min(r, c);
    const WindowSpec win{w, 1 + rng() % 3};
    for (StatKind stat : {StatKind::Sum, StatKind::Mean, StatKind::StdDev}) {
      const ResultGrid seq = swa_integral(img, win, stat);
      for (std::size_t p : {1u, 2u, 3u, 4u, 8u}) EXPECT_EQ(swa_parallel(img, win, stat, forced(p)), seq);
    }
  }
}

TEST(SwaParallel, SmallGridsFallBackToSequential) {
  const Grid<std::uint8_t> g(4, 4, std::uint8_t{3});
  ParallelConfig cfg{8};  // default threshold is far above 16 pixels
  EXPECT_EQ(swa_parallel(g, {2, 1}, StatKind::Sum, cfg), swa_integral(g, {2, 1}, StatKind::Sum));
}

TEST(SwaParallel, MoreWorkersThanRows) {
  const ImageGrid img = generate(UniformRandom{2}, 3, 200, ElemKind::U8);
  EXPECT_EQ(swa_parallel(img, {2, 1}, StatKind::StdDev, forced(16)),
            swa_integral(img, {2, 1}, StatKind::StdDev));
}

TEST(SwaParallel, RejectsZeroWorkers) {
  const Grid<std::uint8_t> g(4, 4, std::uint8_t{3});
  EXPECT_THROW(swa_parallel(g, {2, 1}, StatKind::Sum, forced(0)), InvalidArgument);
}

TEST(SwaParallel, InvalidWindow) {
  const Grid<std::uint8_t> g(4, 4, std::uint8_t{3});
  EXPECT_THROW(swa_parallel(g, {5, 1}, StatKind::Sum, forced(2)), InvalidWindow);
}

TEST(WriteCensus, EveryElementWrittenOncePerPhase) {
  const auto g = std::get<Grid<std::uint16_t>>(generate(UniformRandom{5}, 97, 61, ElemKind::U16));
  for (std::size_t p : {1u, 2u, 3u, 7u}) {
    WriteCensus census;
    const WindowSpec win{6, 2};
    const ResultGrid out = swa_parallel(g, win, StatKind::Sum, forced(p), &census);
    EXPECT_EQ(out, swa_integral(g, win, StatKind::Sum));

    const std::size_t pitch = g.cols() + 1;
    ASSERT_EQ(census.row_phase().size(), (g.rows() + 1) * pitch);
    for (std::size_t idx = 0; idx < census.row_phase().size(); ++idx) {
      const bool border = idx < pitch || idx % pitch == 0;
      const std::uint32_t expect = border ? 0 : 1;
      ASSERT_EQ(census.row_phase()[idx].load(), expect) << "p=" << p << " idx=" << idx;
      ASSERT_EQ(census.col_phase()[idx].load(), expect) << "p=" << p << " idx=" << idx;
    }
    ASSERT_EQ(census.output().size(), out.rows * out.cols);
    for (const auto& n : census.output()) ASSERT_EQ(n.load(), 1u);
  }
}

TEST(StaticBlock, CoversRangeDisjointly) {
  for (std::size_t n : {0u, 1u, 5u, 64u, 1000u}) {
    for (std::size_t p : {1u, 2u, 3u, 8u, 13u}) {
      std::size_t next = 0;
      for (std::size_t k = 0; k < p; ++k) {
        const auto b = detail::static_block(n, p, k);
        EXPECT_EQ(b.begin, next);
        EXPECT_LE(b.begin, b.end);
        next = b.end;
      }
      EXPECT_EQ(next, n);
    }
  }
}
