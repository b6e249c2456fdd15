#include <conceptpose/error.hpp>
#include <conceptpose/io/csal.hpp>

#include <gtest/gtest.h>

#include "test_support.hpp"

#include <cstring>
#include <fstream>
#include <random>

using namespace conceptpose;
using conceptpose::testkit::TempDir;

namespace {

/// Byte layout written out field by field, independent of the library encoder.
std::vector<std::uint8_t> oracle_encode(const SaliencyTensor& t) {
  std::vector<std::uint8_t> b = {'C', 'S', 'A', 'L'};
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto str = [&](const std::string& s) {
    b.push_back(static_cast<std::uint8_t>(s.size() & 0xff));
    b.push_back(static_cast<std::uint8_t>(s.size() >> 8));
    b.insert(b.end(), s.begin(), s.end());
  };
  u32(1);
  u32(static_cast<std::uint32_t>(t.labels.size()));
  u32(static_cast<std::uint32_t>(t.height));
  u32(static_cast<std::uint32_t>(t.width));
  str(t.object_category);
  for (const auto& l : t.labels) str(l);
  for (float f : t.data) {
    std::uint32_t v;
    std::memcpy(&v, &f, 4);
    u32(v);
  }
  return b;
}

SaliencyTensor random_tensor(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 9), len(0, 12);
  std::uniform_real_distribution<float> val(0.0f, 1.0f);
  std::uniform_int_distribution<int> ch('a', 'z');
  auto word = [&] {
    std::string s(len(rng), 'x');
    for (auto& c : s) c = static_cast<char>(ch(rng));
    return s;
  };
  const int l = dim(rng);
  std::vector<std::string> labels;
  for (int i = 0; i < l; ++i) labels.push_back(word() + std::to_string(i));
  SaliencyTensor t(labels, word(), dim(rng), dim(rng));
  for (auto& v : t.data) v = val(rng);
  return t;
}

bool bitwise_equal(const SaliencyTensor& a, const SaliencyTensor& b) {
  return a.labels == b.labels && a.object_category == b.object_category && a.height == b.height &&
         a.width == b.width && a.data.size() == b.data.size() &&
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * 4) == 0;
}

std::size_t format_error_offset(const std::vector<std::uint8_t>& bytes) {
  try {
    io::decode_csal(bytes);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Format);
    const std::string msg = e.what();
    const auto at = msg.find("at byte ");
    EXPECT_NE(at, std::string::npos) << msg;
    return std::stoul(msg.substr(at + 8));
  }
  ADD_FAILURE() << "decode succeeded";
  return 0;
}

}  // namespace

TEST(Csal, TinyTensorSizeFromLayout) {
  SaliencyTensor t({"handle"}, "mug", 2, 2);
  t.data = {0.0f, 0.5f, 0.75f, 1.0f};
  const auto bytes = io::encode_csal(t);
  // fixed header + (2 + 3) category + (2 + 6) label + 4 floats
  EXPECT_EQ(bytes.size(), 20u + 5u + 8u + 16u);
  EXPECT_EQ(bytes, oracle_encode(t));
}

TEST(Csal, EncoderMatchesLayoutOracle) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto t = random_tensor(rng);
    EXPECT_EQ(io::encode_csal(t), oracle_encode(t));
  }
}

TEST(Csal, RoundTripIsBitwise) {
  std::mt19937_64 rng(2);
  TempDir dir("csal");
  for (int i = 0; i < 50; ++i) {
    auto t = random_tensor(rng);
    t.data[0] = std::nextafter(0.0f, 1.0f);
    const auto path = dir.path() / ("t" + std::to_string(i) + ".csal");
    io::write_saliency(path, t);
    EXPECT_TRUE(bitwise_equal(io::read_saliency(path), t));
    EXPECT_TRUE(bitwise_equal(io::decode_csal(io::encode_csal(t)), t));
  }
}

TEST(Csal, EveryTruncationIsRejected) {
  SaliencyTensor t({"a", "bb"}, "cat", 2, 3);
  for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] = 0.1f * i;
  const auto bytes = io::encode_csal(t);
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + n);
    EXPECT_THROW(io::decode_csal(cut), Error) << n;
  }
}

TEST(Csal, ErrorsCarryByteOffsets) {
  SaliencyTensor t({"a"}, "c", 1, 1);
  t.data = {0.5f};
  const auto good = io::encode_csal(t);

  auto bad_magic = good;
  bad_magic[2] = 'X';
  EXPECT_EQ(format_error_offset(bad_magic), 0u);

  auto bad_version = good;
  bad_version[4] = 2;
  EXPECT_EQ(format_error_offset(bad_version), 4u);

  auto zero_dim = good;
  zero_dim[8] = 0;
  EXPECT_EQ(format_error_offset(zero_dim), 8u);

  auto huge = good;
  for (int i = 12; i < 20; ++i) huge[i] = 0xff;
  EXPECT_GE(format_error_offset(huge), 8u);

  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(format_error_offset(trailing), good.size());
}

TEST(Csal, MissingFileIsIngestionError) {
  try {
    io::read_saliency("/nonexistent/path.csal");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Ingestion);
  }
}

TEST(Csal, RejectsInconsistentTensor) {
  SaliencyTensor t({"a"}, "c", 2, 2);
  t.data.pop_back();
  EXPECT_THROW(io::encode_csal(t), Error);
}
