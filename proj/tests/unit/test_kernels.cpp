#include <gtest/gtest.h>

#include <cstdlib>
#include <random>
#include <vector>

#include "patchaudit/kernels.hpp"

namespace patchaudit::kernels {
namespace {

std::vector<std::uint8_t> random_bytes(std::size_t n, std::uint64_t seed, bool saturating) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> pick(0, 3);
  std::vector<std::uint8_t> out(n);
  for (auto& v : out) {
    // Saturating fixtures put a quarter of the bytes at each extreme.
    const int p = pick(rng);
    v = saturating && p == 0 ? 0 : saturating && p == 1 ? 255 : static_cast<std::uint8_t>(byte(rng));
  }
  return out;
}

std::vector<std::int32_t> random_ints(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int32_t> value(0, 255000);
  std::vector<std::int32_t> out(n);
  for (auto& v : out) {
    v = value(rng);
  }
  return out;
}

TEST(KernelsScalar, ChannelSumsMatchBruteForce) {
  const auto bytes = random_bytes(3 * 1001, 1, false);
  std::array<std::uint64_t, 3> expected{};
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    expected[i % 3] += bytes[i];
  }
  EXPECT_EQ(scalar::channel_sums(bytes), expected);
}

TEST(KernelsScalar, SaturationCountsMatchBruteForce) {
  const auto bytes = random_bytes(3 * 777, 2, true);
  SaturationCounts expected;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    expected.at_zero[i % 3] += bytes[i] == 0;
    expected.at_max[i % 3] += bytes[i] == 255;
  }
  EXPECT_EQ(scalar::saturation_counts(bytes), expected);
}

TEST(KernelsScalar, LuminanceUsesIntegerWeights) {
  const std::vector<std::uint8_t> rgb{255, 0, 0, 0, 255, 0, 0, 0, 255, 255, 255, 255, 10, 20, 30};
  std::vector<std::int32_t> out(5);
  scalar::luminance_x1000(rgb, out);
  EXPECT_EQ(out, (std::vector<std::int32_t>{299 * 255, 587 * 255, 114 * 255, 1000 * 255,
                                            299 * 10 + 587 * 20 + 114 * 30}));
}

TEST(KernelsScalar, AbsDiffs) {
  const std::vector<std::int32_t> row{5, 1, 10, 10, 0};
  EXPECT_EQ(scalar::abs_diff_adjacent(row), 4u + 9u + 0u + 10u);
  EXPECT_EQ(scalar::abs_diff_adjacent(std::span<const std::int32_t>()), 0u);
  EXPECT_EQ(scalar::abs_diff_adjacent(std::span<const std::int32_t>(row.data(), 1)), 0u);
  const std::vector<std::int32_t> other{0, 0, 0, 20, 0};
  EXPECT_EQ(scalar::abs_diff_rows(row, other), 5u + 1u + 10u + 10u + 0u);
}

TEST(KernelsScalar, HistogramBinRule) {
  const std::vector<std::uint8_t> rgb{0, 255, 16, 15, 128, 17};
  for (unsigned bins : {1u, 3u, 16u, 256u, 1000u}) {
    std::vector<std::uint64_t> out(3 * bins, 0);
    scalar::histogram_counts(rgb, bins, out);
    std::vector<std::uint64_t> expected(3 * bins, 0);
    for (std::size_t i = 0; i < rgb.size(); ++i) {
      ++expected[(i % 3) * bins + (static_cast<std::uint64_t>(rgb[i]) * bins) / 256];
    }
    EXPECT_EQ(out, expected) << "bins " << bins;
  }
}

TEST(KernelsDispatch, ScalarOverrideAndNames) {
  EXPECT_EQ(to_string(Isa::scalar), "scalar");
  EXPECT_EQ(to_string(Isa::avx2), "avx2");
  EXPECT_EQ(scalar_table().isa, Isa::scalar);
  const auto& active_table = active();
  if (const char* env = std::getenv("PATCHAUDIT_ISA"); env != nullptr && std::string(env) == "scalar") {
    EXPECT_EQ(active_table.isa, Isa::scalar);
  } else if (avx2_table() != nullptr) {
    EXPECT_EQ(active_table.isa, Isa::avx2);
  }
}

#if defined(PATCHAUDIT_HAVE_AVX2)

class Avx2Equivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (avx2_table() == nullptr) {
      GTEST_SKIP() << "CPU lacks AVX2";
    }
  }
};

// Lengths straddle the vector widths; offsets exercise unaligned starts.
const std::size_t kPixelCounts[] = {0, 1, 2, 7, 10, 11, 31, 32, 33, 63, 64, 65, 95, 96, 97, 1000, 50176};

TEST_F(Avx2Equivalence, ChannelSums) {
  std::uint64_t seed = 10;
  for (std::size_t n : kPixelCounts) {
    for (std::size_t offset : {0u, 1u, 5u}) {
      const auto bytes = random_bytes(3 * n + offset, ++seed, false);
      const std::span<const std::uint8_t> view(bytes.data() + offset, 3 * n);
      EXPECT_EQ(avx2::channel_sums(view), scalar::channel_sums(view)) << n << " " << offset;
    }
  }
}

TEST_F(Avx2Equivalence, ChannelSumsAllMax) {
  const std::vector<std::uint8_t> bytes(3 * 50176, 255);
  EXPECT_EQ(avx2::channel_sums(bytes), scalar::channel_sums(bytes));
}

TEST_F(Avx2Equivalence, SaturationCounts) {
  std::uint64_t seed = 100;
  for (std::size_t n : kPixelCounts) {
    for (std::size_t offset : {0u, 3u}) {
      const auto bytes = random_bytes(3 * n + offset, ++seed, true);
      const std::span<const std::uint8_t> view(bytes.data() + offset, 3 * n);
      EXPECT_EQ(avx2::saturation_counts(view), scalar::saturation_counts(view)) << n;
    }
  }
}

TEST_F(Avx2Equivalence, Luminance) {
  std::uint64_t seed = 200;
  for (std::size_t n : kPixelCounts) {
    for (std::size_t offset : {0u, 2u}) {
      const auto bytes = random_bytes(3 * n + offset, ++seed, true);
      const std::span<const std::uint8_t> view(bytes.data() + offset, 3 * n);
      std::vector<std::int32_t> a(n);
      std::vector<std::int32_t> b(n);
      avx2::luminance_x1000(view, a);
      scalar::luminance_x1000(view, b);
      EXPECT_EQ(a, b) << n;
    }
  }
}

TEST_F(Avx2Equivalence, AbsDiffs) {
  std::uint64_t seed = 300;
  for (std::size_t n : kPixelCounts) {
    const auto a = random_ints(n, ++seed);
    const auto b = random_ints(n, ++seed);
    EXPECT_EQ(avx2::abs_diff_adjacent(a), scalar::abs_diff_adjacent(a)) << n;
    EXPECT_EQ(avx2::abs_diff_rows(a, b), scalar::abs_diff_rows(a, b)) << n;
  }
}

TEST_F(Avx2Equivalence, AbsDiffExtremes) {
  std::vector<std::int32_t> a(4099);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = i % 2 == 0 ? 0 : 255000;
  }
  const std::vector<std::int32_t> b(a.rbegin(), a.rend());
  EXPECT_EQ(avx2::abs_diff_adjacent(a), scalar::abs_diff_adjacent(a));
  EXPECT_EQ(avx2::abs_diff_rows(a, b), scalar::abs_diff_rows(a, b));
}

TEST_F(Avx2Equivalence, TableMatchesNamespace) {
  const KernelTable* t = avx2_table();
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->isa, Isa::avx2);
  const auto bytes = random_bytes(3 * 77, 9, false);
  EXPECT_EQ(t->channel_sums(bytes), scalar::channel_sums(bytes));
}

#endif

}  // namespace
}  // namespace patchaudit::kernels
