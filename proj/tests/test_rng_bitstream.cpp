#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <set>

#include "rffqrng/bitstream.hpp"
#include "rffqrng/io.hpp"
#include "rffqrng/rng.hpp"
#include "test_support.hpp"

using namespace rffqrng;

namespace {

std::filesystem::path scratch_dir(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

static_assert(std::uniform_random_bit_generator<Xoshiro256pp>);

TEST(SplitMix64, ReferenceOutputs) {
  std::uint64_t x = 0;
  EXPECT_EQ(splitmix64(x), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(splitmix64(x), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(splitmix64(x), 0x06C45D188009454FULL);
}

TEST(Xoshiro, DeterministicAndSeedSensitive) {
  Xoshiro256pp a(5), b(5), c(6);
  for (int i = 0; i < 1000; ++i) {
    const auto va = a();
    EXPECT_EQ(va, b());
    EXPECT_NE(va, c());
  }
}

TEST(Xoshiro, SubstreamsDisjoint) {
  EXPECT_EQ(Xoshiro256pp::substream(9, 0), Xoshiro256pp(9));
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s) {
    auto g = Xoshiro256pp::substream(9, s);
    for (int i = 0; i < 10'000; ++i) EXPECT_TRUE(seen.insert(g()).second);
  }
  auto j = Xoshiro256pp(9);
  j.jump();
  j.jump();
  EXPECT_EQ(j, Xoshiro256pp::substream(9, 2));
}

TEST(Xoshiro, UniformAndExponentialVariates) {
  Xoshiro256pp g(11);
  double sum = 0, sum_exp = 0;
  constexpr int n = 1'000'000;
  for (int i = 0; i < n; ++i) {
    const double u = uniform_open(g);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum_exp += exponential(g, 2.0);
  }
  EXPECT_NEAR(sum / n, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(sum_exp / n, 0.5, 4.0 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST(BitStreamPacking, MostSignificantBitFirst) {
  const auto b = BitStream::from_string("10000000" "01");
  const auto bytes = b.to_bytes();
  ASSERT_EQ(bytes.size(), 2U);
  EXPECT_EQ(bytes[0], 0x80);
  EXPECT_EQ(bytes[1], 0x40);
  EXPECT_EQ(b.size(), 10U);
  EXPECT_EQ(b.words()[0], 0x8040000000000000ULL);
}

TEST(BitStreamPacking, StringAndByteRoundTrips) {
  for (std::size_t n : {0UL, 1UL, 7UL, 8UL, 63UL, 64UL, 65UL, 1000UL}) {
    const auto b = testutil::prng_stream(n, n + 1);
    EXPECT_EQ(BitStream::from_string(b.to_string()), b);
    EXPECT_EQ(BitStream::from_bytes(b.to_bytes(), n), b);
    const std::string str = b.to_string();
    EXPECT_EQ(b.count_ones(), static_cast<std::size_t>(std::count(str.begin(), str.end(), '1')));
  }
  EXPECT_THROW(BitStream::from_string("0102"), Error);
  const std::vector<std::uint8_t> one = {0xff};
  EXPECT_THROW(BitStream::from_bytes(one, 9), Error);
  EXPECT_EQ(BitStream::from_bytes(one, 3).to_string(), "111");
}

TEST(BitStreamOps, SliceWordAtCountAndComplement) {
  const auto b = testutil::prng_stream(1000, 3);
  const std::string s = b.to_string();
  for (std::size_t start : {0UL, 1UL, 63UL, 64UL, 130UL, 999UL}) {
    for (std::size_t len : {0UL, 1UL, 64UL, 200UL}) {
      if (start + len > 1000) continue;
      const auto sl = b.slice(start, len);
      EXPECT_EQ(sl.to_string(), s.substr(start, len));
      EXPECT_EQ(b.count_ones(start, start + len), sl.count_ones());
    }
  }
  for (std::size_t pos : {0UL, 5UL, 64UL, 950UL, 999UL}) {
    std::string window = s.substr(pos, 64);
    window.resize(64, '0');
    EXPECT_EQ(b.word_at(pos), std::stoull(window, nullptr, 2)) << pos;
  }
  const auto c = b.complement();
  EXPECT_EQ(c.count_ones(), 1000 - b.count_ones());
  EXPECT_EQ(c.complement(), b);
}

TEST(BitStreamWriter, MatchesSet) {
  const auto ref = testutil::prng_stream(777, 8);
  BitStreamWriter w(777);
  for (std::size_t i = 0; i < 777; ++i) w.push(ref.get(i));
  EXPECT_EQ(std::move(w).finish(), ref);
}

TEST(BitStreamFile, RoundTripForAnyLength) {
  const auto dir = scratch_dir("rffqrng_bitstream_io");
  for (std::size_t n : {1UL, 8UL, 9UL, 1001UL, 65'536UL}) {
    const auto path = dir / ("s" + std::to_string(n) + ".bin");
    const auto b = testutil::prng_stream(n, n);
    io::write_bitstream(path, b, {{"seed", 3}});
    EXPECT_EQ(std::filesystem::file_size(path), (n + 7) / 8);
    EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    EXPECT_EQ(io::read_bitstream(path), b);
    const auto meta = io::read_json(io::sidecar_path(path));
    EXPECT_EQ(meta.at("n_bits").get<std::size_t>(), n);
    EXPECT_EQ(meta.at("seed").get<int>(), 3);
    EXPECT_EQ(meta.at("schema_version").get<int>(), io::kSchemaVersion);
  }
  std::filesystem::remove_all(dir);
}

TEST(BitStreamFile, WithoutSidecarUsesWholeBytes) {
  const auto dir = scratch_dir("rffqrng_bitstream_raw");
  const auto path = dir / "raw.bin";
  const std::vector<std::uint8_t> bytes = {0xa5, 0x0f};
  io::write_file_atomic(path, bytes.data(), bytes.size());
  EXPECT_EQ(io::read_bitstream(path).to_string(), "1010010100001111");
  io::write_text_atomic(io::sidecar_path(path), R"({"n_bits": 100})");
  EXPECT_THROW(io::read_bitstream(path), Error);
  io::write_text_atomic(io::sidecar_path(path), "{not json");
  EXPECT_THROW(io::read_bitstream(path), Error);
  EXPECT_THROW(io::read_bitstream(dir / "missing.bin"), Error);
  std::filesystem::remove_all(dir);
}
