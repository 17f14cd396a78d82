#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>

#include "corelens/layout.hpp"
#include "corelens/samples.hpp"
#include "generators.hpp"

using namespace corelens;

namespace {

std::size_t count_named(const nrdf::File& f, const nrdf::Node& n, std::string_view name) {
  std::size_t total = 0;
  if (n.name != nrdf::kNoName && f.strings[n.name] == name) ++total;
  for (const auto& c : n.children) total += count_named(f, c, name);
  return total;
}

nrdf::NodeView reactor_node(const nrdf::File& f, std::string_view name) {
  return nrdf::NodeView(f, f.root).get_child("reactors").get_child(name);
}

}  // namespace

TEST_SUITE("layout") {
  TEST_CASE("random reactors round-trip") {
    std::mt19937_64 rng(31337);
    for (int i = 0; i < 200; ++i) {
      const Reactor r = testing::random_reactor(rng);
      const auto bytes = nrdf::encode(store_reactor(r));
      const Reactor back = load_reactor(nrdf::decode(bytes));
      CHECK(back == r);
      CHECK(back.frozen());
      // Storing the loaded reactor reproduces the bytes.
      CHECK(nrdf::encode(store_reactor(back)) == bytes);
    }
  }

  TEST_CASE("several reactors in one file") {
    const Reactor a = samples::make_small_pwr(2);
    const Reactor b = samples::make_sfr7(2);
    const Reactor* both[] = {&a, &b};
    const auto file = store_reactors(both);
    const auto back = load_reactors(file);
    REQUIRE(back.size() == 2);
    CHECK(back[0] == a);
    CHECK(back[1] == b);
    CHECK(load_reactor(file, b.name()) == b);
    CHECK(load_reactor(file) == a);
    CHECK_THROWS_AS(load_reactor(file, "absent"), Error);

    const auto path = (std::filesystem::temp_directory_path() / "corelens_layout.nrdf").string();
    save_reactors(path, both);
    const auto opened = open_reactors(path);
    CHECK(opened.size() == 2);
    std::filesystem::remove(path);

    const Reactor* dup[] = {&a, &a};
    CHECK_THROWS_AS(store_reactors(dup), Error);
  }

  TEST_CASE("unfrozen reactors are not stored") {
    Reactor r("x", ReactorType::pwr, 1);
    try {
      store_reactor(r);
      FAIL("expected encode-error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::encode_error);
    }
  }

  TEST_CASE("definitions are stored once") {
    const Reactor one = samples::make_repeated(1);
    const Reactor many = samples::make_repeated(200);
    const auto f1 = store_reactor(one);
    const auto f200 = store_reactor(many);
    const auto b1 = nrdf::encode(f1).size();
    const auto b200 = nrdf::encode(f200).size();
    // Only the grid indexes grow: 8 bytes per cell of each type's grid.
    const std::size_t n = many.size();
    CHECK(b200 - b1 <= 8 * n * n * many.grids().size() + 1024);
    CHECK(nrdf::NodeView(f200, f200.root).get_child("reactors").children().size() == 1);
    const auto defs = reactor_node(f200, many.name()).get_child("assembly_defs").children();
    CHECK(defs.size() == 1);
    CHECK(reactor_node(f200, many.name()).get_child("rod_defs").children().size() ==
          many.rod_defs().size());
    CHECK(count_named(f200, f200.root, "rod_grid") == 0);  // an array, not a node
  }

  TEST_CASE("layout shape") {
    const Reactor r = samples::make_small_pwr(3);
    const auto f = store_reactor(r);
    const auto node = reactor_node(f, r.name());
    CHECK(node.get_string("reactor_type") == "PWR");
    CHECK(node.get_i64("size") == 1);
    const auto& grid = node.get_child("grids").get_child("fuel").get_array("index", nrdf::ElementType::i64);
    CHECK(grid.dims == std::vector<std::uint64_t>{1, 1});
    CHECK(grid.as_i64() == std::vector<std::int64_t>{0});
    const auto labels = node.get_child("labels").get_array("rows", nrdf::ElementType::u32).as_u32();
    REQUIRE(labels.size() == 1);
    CHECK(f.str(labels[0]) == "A");
  }

  TEST_CASE("layout errors are corrupt-file") {
    const Reactor r = samples::make_small_pwr(2);
    auto f = store_reactor(r);
    // Point a grid cell at a definition that does not exist.
    auto& reactors = f.root.children[0];
    auto& core = reactors.children[0];
    for (auto& child : core.children) {
      if (f.strings[child.name] != "grids") continue;
      auto& idx = child.children[0].arrays[0];
      const std::int64_t bad = 7;
      std::memcpy(idx.payload.data(), &bad, 8);
    }
    try {
      load_reactors(f);
      FAIL("expected corrupt-file");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::corrupt_file);
    }

    nrdf::File empty;
    CHECK_THROWS_AS(load_reactors(empty), Error);
  }
}
