#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "adaphrase/errors.hpp"
#include "adaphrase/util.hpp"

using namespace adaphrase;

TEST_CASE("two-decimal display rounds half away from zero on the binary value") {
  CHECK(format_2dp(0.73) == "0.73");
  CHECK(format_2dp(0.125) == "0.13");    // exactly representable half
  CHECK(format_2dp(0.745) == "0.74");    // stored just below the half
  CHECK(format_2dp(0.5) == "0.50");
  CHECK(format_2dp(-0.125) == "-0.13");
  CHECK(format_2dp(1.0) == "1.00");
  CHECK(format_2dp(0.004) == "0.00");
}

TEST_CASE("split_tabs keeps empty fields") {
  const auto f = split_tabs("a\t\tb");
  REQUIRE(f.size() == 3);
  CHECK(f[0] == "a");
  CHECK(f[1].empty());
  CHECK(f[2] == "b");
  CHECK(split_tabs("").size() == 1);
}

TEST_CASE("parse_double rejects trailing text and non-finite values") {
  double x = 0.0;
  CHECK(parse_double("2.5", x));
  CHECK(x == 2.5);
  CHECK(parse_double("-1e-3", x));
  CHECK_FALSE(parse_double("", x));
  CHECK_FALSE(parse_double("1.5x", x));
  CHECK_FALSE(parse_double("inf", x));
  CHECK_FALSE(parse_double("nan", x));
}

TEST_CASE("atomic write replaces the target and leaves no temp file") {
  const auto dir = std::filesystem::temp_directory_path() / "adaphrase_util_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "out.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  CHECK(s.str() == "second");
  CHECK_FALSE(std::filesystem::exists(dir / "out.txt.tmp"));
  CHECK_THROWS_AS(write_file_atomic(dir / "missing" / "x.txt", "y"), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("crc32 of a known string") {
  CHECK(crc32_text("123456789") == 0xCBF43926u);
}
