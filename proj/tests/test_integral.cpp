#include <gtest/gtest.h>

#include <random>

#include "sat_oracle.hpp"
#include "swa/image_io.hpp"
#include "swa/integral.hpp"
#include "swa/naive.hpp"
#include "test_util.hpp"

using namespace swa;
using swa::testing::max_rel_err;

namespace {

const Grid<std::uint8_t> k1234(2, 2, std::vector<std::uint8_t>{1, 2, 3, 4});

template <typename Acc>
std::vector<Acc> table_of(const IntegralImage<Acc>& sat) {
  return {sat.table().begin(), sat.table().end()};
}

}  // namespace

TEST(BuildSat, HandCumulativeSums) {
  EXPECT_EQ(table_of(build_sat(k1234)), (std::vector<std::uint64_t>{0, 0, 0, 0, 1, 3, 0, 4, 10}));
}

TEST(BuildSat, SquaredTwin) {
  const auto sq = build_sat<Table::squared>(k1234);
  const std::vector<detail::u128> expect{0, 0, 0, 0, 1, 5, 0, 10, 30};
  EXPECT_TRUE(std::ranges::equal(sq.table(), expect));
}

TEST(BuildSat, ZeroGridGivesZeroTable) {
  const auto sat = build_sat(Grid<std::uint16_t>(9, 4, std::uint16_t{0}));
  for (auto v : sat.table()) EXPECT_EQ(v, 0u);
  EXPECT_EQ(sat.rows(), 9u);
  EXPECT_EQ(sat.cols(), 4u);
}

TEST(BuildSat, MatchesDoubleLoopOracleWithInvariants) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t r = 1 + rng() % 128;
    const std::size_t c = 1 + rng() % 128;
    const auto g = swa::testing::random_grid<std::uint16_t>(rng, r, c);
    const auto sat = build_sat(g);
    EXPECT_EQ(table_of(sat), (swa::testing::oracle_sat<std::uint64_t>(g, false)));
    const auto sq = build_sat<Table::squared>(g);
    EXPECT_TRUE(std::ranges::equal(sq.table(), swa::testing::oracle_sat<detail::u128>(g, true)));
    for (std::size_t j = 0; j <= c; ++j) EXPECT_EQ(sat.at(0, j), 0u);
    for (std::size_t i = 0; i <= r; ++i) EXPECT_EQ(sat.at(i, 0), 0u);
    for (std::size_t i = 1; i <= r; ++i) {
      for (std::size_t j = 1; j <= c; ++j) {
        ASSERT_GE(sat.at(i, j), sat.at(i - 1, j));
        ASSERT_GE(sat.at(i, j), sat.at(i, j - 1));
      }
    }
  }
}

TEST(WindowSum, CornerLookups) {
  const auto sat = build_sat(k1234);
  EXPECT_EQ(window_sum(sat, 0, 0, 2), 10u);
  EXPECT_EQ(window_sum(sat, 0, 1, 1), 2u);
  EXPECT_THROW(window_sum(sat, 1, 1, 2), InvalidWindow);
  EXPECT_THROW(window_sum(sat, 0, 0, 0), InvalidWindow);
}

TEST(WindowSum, UnitWindowIsPixel) {
  std::mt19937_64 rng(3);
  const auto g = swa::testing::random_grid<std::uint8_t>(rng, 17, 23);
  const auto sat = build_sat(g);
  const auto sq = build_sat<Table::squared>(g);
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t j = 0; j < g.cols(); ++j) {
      EXPECT_EQ(window_sum(sat, i, j, 1), g(i, j));
      EXPECT_TRUE(window_sum(sq, i, j, 1) == static_cast<detail::u128>(g(i, j) * g(i, j)));
    }
  }
}

TEST(WindowSum, ArbitraryRegionsMatchBruteForce) {
  std::mt19937_64 rng(8);
  const auto g = swa::testing::random_grid<std::uint16_t>(rng, 40, 31);
  const auto sat = build_sat(g);
  for (int k = 0; k < 500; ++k) {
    const std::size_t w = 1 + rng() % 31;
    const std::size_t top = rng() % (40 - w + 1);
    const std::size_t left = rng() % (31 - w + 1);
    std::uint64_t brute = 0;
    for (std::size_t i = top; i < top + w; ++i)
      for (std::size_t j = left; j < left + w; ++j) brute += g(i, j);
    EXPECT_EQ(window_sum(sat, top, left, w), brute);
  }
}

TEST(SwaIntegral, PopulationStdDev) {
  const Grid<std::uint8_t> g(2, 2, std::vector<std::uint8_t>{0, 2, 0, 2});
  EXPECT_EQ(swa_integral(g, {2, 1}, StatKind::StdDev).real(), std::vector<double>{1.0});
}

TEST(SwaIntegral, ConstantImageHasZeroStdDev) {
  for (std::size_t w : {1u, 2u, 5u, 13u}) {
    const ResultGrid a = swa_integral(Grid<std::uint8_t>(13, 15, std::uint8_t{7}), {w, 1}, StatKind::StdDev);
    const ResultGrid b = swa_integral(Grid<float>(13, 15, 7.0f), {w, 1}, StatKind::StdDev);
    for (double v : a.real()) EXPECT_EQ(v, 0.0);
    for (double v : b.real()) EXPECT_EQ(v, 0.0);
  }
}

TEST(SwaIntegral, ExactAgainstNaiveOnIntegerInputs) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const auto kind = trial % 2 ? ElemKind::U16 : ElemKind::U8;
    const std::size_t r = 1 + rng() % 90;
    const std::size_t c = 1 + rng() % 90;
    const ImageGrid img = swa::testing::random_image(rng, kind, r, c);
    const std::size_t w = 1 + rng() % std::min(r, c);
    const WindowSpec win{w, 1 + rng() % w};
    EXPECT_EQ(swa_integral(img, win, StatKind::Sum), naive_swa(img, win, StatKind::Sum));
    EXPECT_EQ(swa_integral(img, win, StatKind::Mean), naive_swa(img, win, StatKind::Mean));
    EXPECT_LE(max_rel_err(swa_integral(img, win, StatKind::StdDev), naive_swa(img, win, StatKind::StdDev)), 1e-12);
  }
}

// Float tables carry absolute rounding error proportional to the table
// magnitude, not to the window value, so arbitrary f32 data is checked
// against that bound.
TEST(SwaIntegral, FloatErrorBoundedByTableMagnitude) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t r = 2 + rng() % 120;
    const std::size_t c = 2 + rng() % 120;
    const auto g = swa::testing::random_grid<float>(rng, r, c);
    const std::size_t w = 1 + rng() % std::min(r, c);
    const double total = 1000.0 * static_cast<double>(r * c);
    const ResultGrid a = swa_integral(g, {w, 1}, StatKind::Sum);
    const ResultGrid b = naive_swa(g, {w, 1}, StatKind::Sum);
    for (std::size_t k = 0; k < a.real().size(); ++k) {
      EXPECT_NEAR(a.real()[k], b.real()[k], 8 * 0x1p-52 * total);
    }
  }
}

// 16-bit intensities normalised to [0, 1) accumulate exactly in double, so
// the float path agrees with the naive oracle to rounding of the final ops.
TEST(SwaIntegral, NormalisedIntensitiesAreTight) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ImageGrid img = generate(UniformRandom{seed}, 60 + seed, 75, ElemKind::F32);
    for (std::size_t w : {1u, 2u, 3u, 16u, 50u}) {
      for (StatKind stat : {StatKind::Sum, StatKind::Mean, StatKind::StdDev}) {
        EXPECT_LE(max_rel_err(swa_integral(img, {w, 1}, stat), naive_swa(img, {w, 1}, stat)), 1e-12);
      }
    }
  }
}

TEST(SwaIntegral, InvalidWindow) {
  EXPECT_THROW(swa_integral(k1234, {3, 1}, StatKind::Sum), InvalidWindow);
  EXPECT_THROW(swa_integral(k1234, {1, 0}, StatKind::Sum), InvalidWindow);
}

TEST(SwaIntegral, QueryWithoutSquaredTableRejectsStdDev) {
  const SatSet<std::uint8_t> sats = build_sats(k1234, StatKind::Sum);
  EXPECT_FALSE(sats.squared.has_value());
  EXPECT_THROW(query_sats(sats, {1, 1}, StatKind::StdDev), InvalidArgument);
}

TEST(MultiWindow, PaperWindowSetMatchesSingleCalls) {
  const ImageGrid img = generate(UniformRandom{1}, 4096, 4096, ElemKind::U16);
  const std::vector<WindowSpec> wins{{50, 1}, {500, 1}, {1000, 1}};
  const auto multi = swa_multi_window(img, wins, StatKind::Sum);
  ASSERT_EQ(multi.size(), 3u);
  for (std::size_t k = 0; k < wins.size(); ++k) EXPECT_EQ(multi[k], swa_integral(img, wins[k], StatKind::Sum));
}

TEST(MultiWindow, SingletonAndDuplicates) {
  std::mt19937_64 rng(12);
  const ImageGrid img = swa::testing::random_image(rng, ElemKind::F32, 33, 40);
  const std::vector<WindowSpec> one{{4, 2}};
  EXPECT_EQ(swa_multi_window(img, one, StatKind::StdDev).at(0), swa_integral(img, one[0], StatKind::StdDev));
  const std::vector<WindowSpec> dup{{5, 1}, {5, 1}};
  const auto out = swa_multi_window(img, dup, StatKind::Mean);
  EXPECT_EQ(out[0], out[1]);
}

TEST(MultiWindow, AnyInvalidWindowFailsWholeCall) {
  const std::vector<WindowSpec> wins{{1, 1}, {3, 1}};
  EXPECT_THROW(swa_multi_window(ImageGrid{k1234}, wins, StatKind::Sum), InvalidWindow);
  EXPECT_THROW(swa_multi_window(ImageGrid{k1234}, std::span<const WindowSpec>{}, StatKind::Sum), InvalidArgument);
}

TEST(Overflow, SquaredTablePeakAtU16Saturation) {
  const auto sq = build_sat<Table::squared>(Grid<std::uint16_t>(3, 3, std::uint16_t{65535}));
  // 9 * 65535^2
  EXPECT_TRUE(sq.at(3, 3) == static_cast<detail::u128>(38'653'526'025ULL));
  static_assert(9ULL * 65535ULL * 65535ULL == 38'653'526'025ULL);
  EXPECT_EQ(swa_integral(Grid<std::uint16_t>(3, 3, std::uint16_t{65535}), {3, 1}, StatKind::StdDev).real(),
            std::vector<double>{0.0});
}

TEST(Overflow, SumTableBoundAtU16Saturation) {
  // 65535 * n fits in 64 bits up to n = floor((2^64 - 1) / 65535) pixels.
  constexpr std::uint64_t max_pixels = UINT64_MAX / 65535u;
  EXPECT_GE(max_pixels, 280'000'000'000'000ULL);
  // the squared table needs 128 bits beyond ~4.29e9 pixels
  constexpr std::uint64_t sq_limit = UINT64_MAX / (65535ULL * 65535ULL);
  EXPECT_LT(sq_limit, 70'000ULL * 85'000ULL);
  static_assert(std::is_same_v<sq_acc_t<std::uint16_t>, detail::u128>);
}

TEST(Resource, HugeTableReportsByteCount) {
  // a 2^28 x 2^28 source needs (2^28+1)^2 * 8 bytes, beyond any address space
  try {
    IntegralImage<std::uint64_t> t(std::size_t{1} << 28, std::size_t{1} << 28);
    FAIL() << "allocation unexpectedly succeeded";
  } catch (const ResourceError& e) {
    const std::size_t side = (std::size_t{1} << 28) + 1;
    EXPECT_EQ(e.bytes(), side * side * 8);
    EXPECT_NE(std::string(e.what()).find(std::to_string(e.bytes())), std::string::npos);
  }
}
