#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "nbstein/report.hpp"

using namespace nbstein;

TEST(FmtDouble, RoundTripsAndHandlesNonFinite) {
  for (double x : {0.1, 1.0 / 3.0, 2.0353392747684893, -1e-300, 6.02e23}) {
    EXPECT_EQ(std::strtod(fmt_double(x).c_str(), nullptr), x);
  }
  EXPECT_EQ(fmt_double(2.0), "2");
  EXPECT_EQ(fmt_double(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(fmt_double(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(CsvTable, RendersHeaderAndRows) {
  CsvTable t({"k", "value", "ok"});
  t.row(std::int64_t{1}, 0.5, true);
  t.row(std::int64_t{2}, 0.25, false);
  EXPECT_EQ(t.str(), "k,value,ok\n1,0.5,true\n2,0.25,false\n");
  EXPECT_EQ(t.size(), 2u);
  EXPECT_THROW(t.row(1.0), DomainError);
}

TEST(CsvTable, JsonKeepsTypes) {
  CsvTable t({"k", "value", "name"});
  t.row(std::int64_t{3}, std::numeric_limits<double>::infinity(), "x");
  const auto j = t.to_json();
  ASSERT_EQ(j.size(), 1u);
  EXPECT_TRUE(j[0]["k"].is_number_integer());
  EXPECT_EQ(j[0]["value"], "inf");
  EXPECT_EQ(j[0]["name"], "x");
  EXPECT_EQ(dump_json(j).back(), '\n');
}

TEST(WriteOutput, FileAndFailure) {
  const auto path = std::filesystem::temp_directory_path() / "nbstein_report_test.txt";
  write_output("hello\n", path.string());
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), "hello\n");
  std::filesystem::remove(path);
  EXPECT_THROW(write_output("x", "/nonexistent-dir/out.txt"), IoError);
}
