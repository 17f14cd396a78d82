#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "corelens/nrdf.hpp"
#include "generators.hpp"

using namespace corelens;
using namespace corelens::nrdf;

namespace {

// Hand-rolled little-endian writer used as an independent encoder oracle.
struct Bytes {
  std::vector<std::byte> v;
  void u8(std::uint8_t x) { v.push_back(std::byte{x}); }
  void u32(std::uint32_t x) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(x >> (8 * i)));
  }
  void u64(std::uint64_t x) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(x >> (8 * i)));
  }
  void f64(double d) {
    std::uint64_t x;
    std::memcpy(&x, &d, 8);
    u64(x);
  }
  void str(const char* s) {
    v.push_back(std::byte{static_cast<unsigned char>(s[0])});
    for (const char* p = s + 1; *p; ++p) v.push_back(std::byte{static_cast<unsigned char>(*p)});
  }
};

ErrorCode decode_code(std::span<const std::byte> bytes) {
  try {
    decode(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("decode accepted the input");
  return ErrorCode::invalid_argument;
}

File sample_file() {
  Builder b;
  Node root = b.node("");
  root.name = kNoName;
  Node core = b.node("core");
  b.attr(core, "size", std::int64_t{17});
  b.attr(core, "pitch", 21.5);
  b.attr_string(core, "type", "pwr");
  b.attr(core, "units", std::uint32_t{3});
  const std::vector<double> values{0.1, -2.5, 3.0, 4.0, 5.0, 6.0};
  b.array<double>(core, "values", {2, 3}, values);
  const std::vector<std::int64_t> idx{-1, 0, 7};
  b.array<std::int64_t>(core, "index", {3}, idx);
  root.children.push_back(core);
  return std::move(b).finish(root);
}

}  // namespace

TEST_SUITE("nrdf") {
  TEST_CASE("empty container matches the hand-built encoding") {
    Bytes e;
    e.str("NRDF");
    e.u32(1);
    e.u64(32);  // heap offset
    e.u64(4);   // heap length: just the count
    e.u64(36);  // root offset
    e.u32(0);   // no strings
    e.u32(kNoName);
    e.u32(0);
    e.u32(0);
    e.u32(0);
    REQUIRE(e.v.size() == 52);
    CHECK(encode(File{}) == e.v);
    CHECK(decode(e.v) == File{});
  }

  TEST_CASE("small container matches the hand-built encoding") {
    Bytes e;
    const char* names[] = {"", "core", "size", "pitch", "type", "pwr", "units", "values", "index"};
    std::uint64_t heap = 4;
    for (const char* n : names) heap += 4 + std::strlen(n);
    e.str("NRDF");
    e.u32(1);
    e.u64(32);
    e.u64(heap);
    e.u64(32 + heap);
    e.u32(9);
    for (const char* n : names) {
      e.u32(static_cast<std::uint32_t>(std::strlen(n)));
      for (const char* p = n; *p; ++p) e.u8(static_cast<std::uint8_t>(*p));
    }
    // root
    e.u32(kNoName);
    e.u32(0);
    e.u32(0);
    e.u32(1);
    // core
    e.u32(1);
    e.u32(4);
    e.u32(2);
    e.u32(0);
    e.u32(2);
    e.u8(1);
    e.u64(17);
    e.u32(3);
    e.u8(2);
    e.f64(21.5);
    e.u32(4);
    e.u8(3);
    e.u64(5);
    e.u32(6);
    e.u8(4);
    e.u64(3);
    e.u32(7);
    e.u8(2);
    e.u8(2);
    e.u64(2);
    e.u64(3);
    for (double d : {0.1, -2.5, 3.0, 4.0, 5.0, 6.0}) e.f64(d);
    e.u32(8);
    e.u8(1);
    e.u8(1);
    e.u64(3);
    for (std::int64_t i : {-1, 0, 7}) e.u64(static_cast<std::uint64_t>(i));

    const File f = sample_file();
    CHECK(encode(f) == e.v);
    CHECK(decode(e.v) == f);
  }

  TEST_CASE("random containers round-trip") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 300; ++i) {
      const File f = testing::random_file(rng);
      const auto bytes = encode(f);
      const File back = decode(bytes);
      CHECK(back == f);
      // Canonical: re-encoding the decoded file gives the same bytes.
      CHECK(encode(back) == bytes);
    }
  }

  TEST_CASE("special doubles keep their bits") {
    Builder b;
    Node root;
    const std::vector<double> v{std::numeric_limits<double>::quiet_NaN(), -0.0,
                                std::numeric_limits<double>::infinity(),
                                std::numeric_limits<double>::denorm_min()};
    b.array<double>(root, "v", {4}, v);
    b.attr(root, "neg_zero", -0.0);
    const File f = std::move(b).finish(root);
    const File back = decode(encode(f));
    const auto got = back.root.arrays[0].as_f64();
    CHECK(std::isnan(got[0]));
    CHECK(std::signbit(got[1]));
    CHECK(got[2] == v[2]);
    CHECK(got[3] == v[3]);
    CHECK(std::signbit(std::get<double>(back.root.attributes[0].value)));
  }

  TEST_CASE("dump") {
    CHECK(dump(File{}, DumpMode::tree) == "/\n");
    const File f = sample_file();
    CHECK(dump(f, DumpMode::tree) == "/\n  core\n");
    CHECK(dump(f, DumpMode::full) ==
          "/\n"
          "  core\n"
          "    @size: i64 = 17\n"
          "    @pitch: f64 = 21.5\n"
          "    @type: string = \"pwr\"\n"
          "    @units: u32 = 3\n"
          "    values: f64[2x3] = 0.1 -2.5 3 4 5 6\n"
          "    index: i64[3] = -1 0 7\n");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  }

  TEST_CASE("error codes") {
    const auto good = encode(sample_file());
    SUBCASE("bad magic") {
      auto b = good;
      b[0] = std::byte{'X'};
      CHECK(decode_code(b) == ErrorCode::not_nrdf);
      try {
        decode(b);
      } catch (const Error& e) {
        CHECK(std::string(e.what()).find("not an NRDF file (bad magic)") != std::string::npos);
        CHECK(e.offset() == 0u);
      }
    }
    SUBCASE("version") {
      auto b = good;
      b[4] = std::byte{2};
      CHECK(decode_code(b) == ErrorCode::unsupported_version);
    }
    SUBCASE("truncated") {
      for (std::size_t n = 0; n < good.size(); ++n) {
        CHECK(decode_code(std::span(good).first(n)) == ErrorCode::corrupt_file);
      }
    }
    SUBCASE("dangling string index") {
      auto b = good;
      std::uint64_t root_offset;
      std::memcpy(&root_offset, good.data() + 24, 8);
      // First child name follows the root's 16 bytes.
      b[root_offset + 16] = std::byte{0x7f};
      CHECK(decode_code(b) == ErrorCode::corrupt_file);
    }
    SUBCASE("heap length mismatch") {
      auto b = good;
      b[16] = std::byte{static_cast<unsigned char>(static_cast<unsigned>(b[16]) + 1)};
      CHECK(decode_code(b) == ErrorCode::corrupt_file);
    }
    SUBCASE("missing file") {
      try {
        read_file("/nonexistent/dir/x.nrdf");
        FAIL("expected io-error");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::io_error);
      }
    }
  }

  TEST_CASE("writer rejects invalid trees") {
    File dup;
    dup.strings = {"a", "a"};
    CHECK_THROWS_AS(encode(dup), Error);

    File dangling;
    dangling.strings = {"a"};
    dangling.root.children.push_back(Node{5, {}, {}, {}});
    try {
      encode(dangling);
      FAIL("expected encode-error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::encode_error);
    }

    Builder b;
    Node root;
    const std::vector<double> v{1.0, 2.0};
    b.array<double>(root, "v", {3}, v);  // dims disagree with the payload
    CHECK_THROWS_AS(encode(std::move(b).finish(root)), Error);

    File bad_utf8;
    bad_utf8.strings = {std::string("\xff\xfe")};
    CHECK_THROWS_AS(encode(bad_utf8), Error);
  }

  TEST_CASE("node view accessors") {
    const File f = sample_file();
    const NodeView root(f, f.root);
    CHECK(root.name() == "/");
    const auto core = root.get_child("core");
    CHECK(core.get_i64("size") == 17);
    CHECK(core.get_f64("pitch") == 21.5);
    CHECK(core.get_string("type") == "pwr");
    CHECK(core.get_u32("units") == 3u);
    CHECK(core.get_array("index", ElementType::i64).as_i64() == std::vector<std::int64_t>{-1, 0, 7});
    try {
      core.get_f64("size");
      FAIL("expected corrupt-file");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::corrupt_file);
    }
    CHECK_THROWS_AS(core.get_array("values", ElementType::i64), Error);
    CHECK_FALSE(root.child("missing"));
  }
}
