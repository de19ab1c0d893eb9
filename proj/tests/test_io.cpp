#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "laf/io.hpp"
#include "support/fixtures.hpp"

using namespace laf;

namespace {

std::string fvecs_record(std::int32_t dim, std::initializer_list<float> values) {
  std::ostringstream os;
  detail::put_u32(os, static_cast<std::uint32_t>(dim));
  for (float v : values) detail::put_f32(os, v);
  return os.str();
}

template <typename Fn>
std::string error_of(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

class TempDir : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("laf_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::filesystem::path dir_;
};

} // namespace

TEST(Csv, TwoVectors) {
  std::istringstream is("1,0\n0,1\n");
  const Dataset d = read_csv(is, false);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.dim(), 2u);
}

TEST(Csv, NormalizesOnRequest) {
  std::istringstream is("3,4\n");
  const Dataset d = read_csv(is, true);
  EXPECT_FLOAT_EQ(d[0][0], 0.6f);
  EXPECT_FLOAT_EQ(d[0][1], 0.8f);
}

TEST(Csv, ToleratesWhitespaceAndBlankLines) {
  std::istringstream is(" 1 , 2\r\n\n3,4\n");
  const Dataset d = read_csv(is, false);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_FLOAT_EQ(d[1][1], 4.0f);
}

TEST(Csv, ErrorsCarryLineNumbers) {
  auto parse = [](const char* text) {
    return error_of([&] {
      std::istringstream is(text);
      read_csv(is, false);
    });
  };
  EXPECT_NE(parse("1,0\n1,2,3\n").find("line 2"), std::string::npos);
  EXPECT_NE(parse("1,0\n1,x\n").find("line 2"), std::string::npos);
  EXPECT_NE(parse("1,0\n0,1\nnan,1\n").find("line 3"), std::string::npos);
  EXPECT_NE(parse("1,0\ninf,1\n").find("line 2"), std::string::npos);
  EXPECT_FALSE(parse("").empty());
  std::istringstream zero("0,0\n");
  EXPECT_THROW(read_csv(zero, true), FormatError);
}

TEST(Fvecs, ReadsRecords) {
  std::istringstream is(fvecs_record(2, {1, 0}) + fvecs_record(2, {0, 1}));
  const Dataset d = read_fvecs(is, false);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.dim(), 2u);
  EXPECT_FLOAT_EQ(d[1][1], 1.0f);
}

TEST(Fvecs, DimensionMismatchNamesRecord) {
  std::istringstream is(fvecs_record(2, {1, 0}) + fvecs_record(3, {0, 1, 0}));
  const auto msg = error_of([&] { read_fvecs(is, false); });
  EXPECT_NE(msg.find("record 1"), std::string::npos);
}

TEST(Fvecs, TruncatedAndNonFinite) {
  const auto full = fvecs_record(3, {1, 2, 3});
  std::istringstream cut(full.substr(0, full.size() - 2));
  EXPECT_THROW(read_fvecs(cut, false), FormatError);
  std::istringstream bad(fvecs_record(2, {1, 0}) + fvecs_record(2, {NAN, 0}));
  EXPECT_NE(error_of([&] { read_fvecs(bad, false); }).find("record 1"), std::string::npos);
  std::istringstream neg(fvecs_record(-1, {}));
  EXPECT_THROW(read_fvecs(neg, false), FormatError);
}

TEST(Fvecs, LittleEndianOnDisk) {
  const auto rec = fvecs_record(1, {1.0f});
  ASSERT_EQ(rec.size(), 8u);
  EXPECT_EQ(rec[0], 1);
  EXPECT_EQ(rec[1], 0);
  EXPECT_EQ(static_cast<unsigned char>(rec[7]), 0x3F);
  EXPECT_EQ(static_cast<unsigned char>(rec[6]), 0x80);
}

TEST(Fvecs, BitExactRoundTrip) {
  const Dataset d = laf::testing::random_mixture(1, 50, 7, 2, 0.4);
  std::ostringstream os;
  write_fvecs(os, d);
  std::istringstream is(os.str());
  const Dataset back = read_fvecs(is, false);
  ASSERT_EQ(back.flat().size(), d.flat().size());
  EXPECT_EQ(std::memcmp(back.flat().data(), d.flat().data(), d.flat().size() * sizeof(float)), 0);
}

TEST(Csv, RoundTripIsExact) {
  const Dataset d = laf::testing::random_mixture(2, 50, 5, 2, 0.4);
  std::ostringstream os;
  write_csv(os, d);
  std::istringstream is(os.str());
  const Dataset back = read_csv(is, false);
  EXPECT_EQ(std::vector<float>(back.flat().begin(), back.flat().end()),
            std::vector<float>(d.flat().begin(), d.flat().end()));
}

TEST(Labels, RoundTrip) {
  const ClusterAssignment c{{1, 1, kNoise, 2, 3, kNoise}, 3};
  std::ostringstream os;
  write_labels(os, c);
  EXPECT_EQ(os.str().substr(0, 12), "index,label\n");
  std::istringstream is(os.str());
  EXPECT_EQ(read_labels(is), c);
}

TEST(Labels, RejectsMalformedRows) {
  std::istringstream gap("index,label\n0,1\n2,1\n");
  EXPECT_THROW(read_labels(gap), FormatError);
  std::istringstream zero("index,label\n0,0\n");
  EXPECT_THROW(read_labels(zero), FormatError);
  std::istringstream junk("index,label\n0,abc\n");
  EXPECT_THROW(read_labels(junk), FormatError);
}

TEST(Formats, Parse) {
  EXPECT_EQ(parse_vector_format("csv"), VectorFormat::csv);
  EXPECT_EQ(parse_vector_format("fvecs"), VectorFormat::fvecs);
  EXPECT_THROW(parse_vector_format("xml"), InvalidArgument);
  EXPECT_EQ(format_from_path("a/b.fvecs"), VectorFormat::fvecs);
  EXPECT_EQ(format_from_path("a/b.txt"), VectorFormat::csv);
}

TEST_F(TempDir, AtomicWriteLeavesNoTemporary) {
  const auto target = path("labels.csv");
  save_labels(target, ClusterAssignment{{1, kNoise}, 1});
  EXPECT_TRUE(std::filesystem::exists(target));
  EXPECT_FALSE(std::filesystem::exists(target + ".tmp"));
  EXPECT_EQ(load_labels(target).labels, (std::vector<Label>{1, kNoise}));
}

TEST_F(TempDir, LoadDatasetPrefixesPath) {
  const auto p = path("bad.csv");
  std::ofstream(p) << "1,2\n3\n";
  const auto msg = error_of([&] { load_dataset(p, VectorFormat::csv, false); });
  EXPECT_NE(msg.find("bad.csv"), std::string::npos);
  EXPECT_NE(msg.find("line 2"), std::string::npos);
  EXPECT_THROW(load_dataset(path("missing.csv"), VectorFormat::csv, false), Error);
}

TEST_F(TempDir, Thresholds) {
  const auto p = path("t.txt");
  std::ofstream(p) << "0.1, 0.2\n0.3\n";
  EXPECT_EQ(load_thresholds(p), (std::vector<double>{0.1, 0.2, 0.3}));
}
