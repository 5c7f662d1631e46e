#include <doctest.h>

#include <cstdint>
#include <cstdio>
#include <charconv>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nld/io.hpp"

using namespace nld;

TEST_SUITE("io") {

TEST_CASE("format_double emits the shortest round-trip form") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");

  const std::vector<double> samples = {0.1,    1.0 / 3.0,  7.0 / 128.0,
                                       -1e-17, 6.02214e23, 123456.789,
                                       1e308,  5e-324};
  for (double v : samples) {
    const std::string s = format_double(v);
    double back = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), back);
    REQUIRE(res.ec == std::errc());
    CHECK(back == v);
  }
}

TEST_CASE("fnv1a matches its published vectors") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
  CHECK(fnv1a("ab") != fnv1a("ba"));
}

TEST_CASE("hex64 zero-pads to sixteen digits") {
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(0xdeadbeefull) == "00000000deadbeef");
  CHECK(hex64(0xcbf29ce484222325ull) == "cbf29ce484222325");
}

TEST_CASE("text files round-trip bytes") {
  const std::string path = "io_roundtrip.txt";
  const std::string content = "line one\nline two\n# trailing\n";
  write_text_file(path, content);
  CHECK(read_text_file(path) == content);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_text_file(path), std::runtime_error);
  CHECK_THROWS_AS(write_text_file("no_such_dir/x.txt", "x"),
                  std::runtime_error);
}

TEST_CASE("binary matrices carry magic, shape, then row-major doubles") {
  const std::string path = "io_matrix.bin";
  const double data[6] = {1.0, 2.5, -3.0, 0.0, 4.25, 1e-9};
  write_binary_matrix(path, 2, 3, data);

  std::ifstream is(path, std::ios::binary);
  REQUIRE(static_cast<bool>(is));
  char magic[4];
  is.read(magic, 4);
  CHECK(std::memcmp(magic, "NLDF", 4) == 0);
  std::uint64_t rows = 0, cols = 0;
  is.read(reinterpret_cast<char*>(&rows), sizeof(rows));
  is.read(reinterpret_cast<char*>(&cols), sizeof(cols));
  CHECK(rows == 2);
  CHECK(cols == 3);
  double back[6];
  is.read(reinterpret_cast<char*>(back), sizeof(back));
  REQUIRE(static_cast<bool>(is));
  for (int i = 0; i < 6; ++i) CHECK(back[i] == data[i]);
  CHECK(is.peek() == EOF);
  std::remove(path.c_str());
}

}  // TEST_SUITE
