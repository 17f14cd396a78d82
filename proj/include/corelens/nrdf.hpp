#pragma once

// NRDF: a self-describing hierarchical binary container.
//
// Layout (little-endian throughout):
//   header   "NRDF" | u32 version | u64 heap offset | u64 heap length
//            | u64 root offset
//   heap     u32 count, then per string: u32 byte length + UTF-8 bytes
//   node     u32 name | u32 attr count | u32 array count | u32 child count
//            attrs:  u32 name | u8 type (1 i64, 2 f64, 3 string, 4 u32)
//                    | 8-byte value (u32 / string index zero-padded)
//            arrays: u32 name | u8 element type (1 i64, 2 f64, 4 u32)
//                    | u8 rank | rank x u64 dims | raw payload
//            children, depth-first
//
// The writer emits the heap directly after the header and the root node
// directly after the heap. The root node is unnamed (name = kNoName).

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "corelens/error.hpp"

namespace corelens::nrdf {

static_assert(std::endian::native == std::endian::little,
              "NRDF payloads are copied verbatim; a big-endian port must swap");

inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::uint32_t kNoName = 0xFFFFFFFFu;
inline constexpr std::size_t kHeaderSize = 32;
inline constexpr std::size_t kMaxDepth = 256;
inline constexpr std::size_t kMaxRank = 8;

struct StringRef {
  std::uint32_t index = 0;
  bool operator==(const StringRef&) const = default;
};

enum class ScalarType : std::uint8_t { i64 = 1, f64 = 2, string = 3, u32 = 4 };
enum class ElementType : std::uint8_t { i64 = 1, f64 = 2, u32 = 4 };

std::size_t element_size(ElementType t);
std::string_view to_string(ElementType t);

using Scalar = std::variant<std::int64_t, double, StringRef, std::uint32_t>;

struct Attribute {
  std::uint32_t name = 0;
  Scalar value;

  // Bitwise on doubles, so NaN payloads compare equal to themselves.
  bool operator==(const Attribute& o) const;
};

/// Typed n-dimensional array stored as its little-endian payload bytes.
struct Array {
  std::uint32_t name = 0;
  ElementType type = ElementType::f64;
  std::vector<std::uint64_t> dims;
  std::vector<std::byte> payload;

  bool operator==(const Array&) const = default;

  std::uint64_t element_count() const;

  template <class T>
  static Array make(std::uint32_t name, std::vector<std::uint64_t> dims,
                    std::span<const T> values);

  std::vector<double> as_f64() const;
  std::vector<std::int64_t> as_i64() const;
  std::vector<std::uint32_t> as_u32() const;
};

struct Node {
  std::uint32_t name = kNoName;
  std::vector<Attribute> attributes;
  std::vector<Array> arrays;
  std::vector<Node> children;

  bool operator==(const Node&) const = default;
};

struct File {
  std::uint32_t version = kVersion;
  std::vector<std::string> strings;
  Node root;

  bool operator==(const File&) const = default;

  const std::string& str(std::uint32_t index) const;
};

template <class T>
Array Array::make(std::uint32_t name, std::vector<std::uint64_t> dims,
                  std::span<const T> values) {
  static_assert(std::is_same_v<T, double> || std::is_same_v<T, std::int64_t> ||
                std::is_same_v<T, std::uint32_t>);
  Array a;
  a.name = name;
  if constexpr (std::is_same_v<T, double>) {
    a.type = ElementType::f64;
  } else if constexpr (std::is_same_v<T, std::int64_t>) {
    a.type = ElementType::i64;
  } else {
    a.type = ElementType::u32;
  }
  a.dims = std::move(dims);
  a.payload.resize(values.size_bytes());
  if (!values.empty()) std::memcpy(a.payload.data(), values.data(), values.size_bytes());
  return a;
}

/// Throws encode-error describing the first violated invariant.
void validate(const File& file);

/// Writes the canonical encoding; returns the number of bytes written.
std::uint64_t write(const File& file, std::ostream& sink);
std::vector<std::byte> encode(const File& file);
void write_file(const File& file, const std::string& path);

/// Parses and validates a whole container held in memory.
File decode(std::span<const std::byte> bytes);
File read_file(const std::string& path);
std::vector<std::byte> read_bytes(const std::string& path);

enum class DumpMode { tree, full };

/// Line-oriented text rendering, two spaces of indent per depth.
std::string dump(const File& file, DumpMode mode);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Interns strings in first-use order and builds nodes by name.
class Builder {
 public:
  std::uint32_t intern(std::string_view s);

  Node node(std::string_view name) { return Node{intern(name), {}, {}, {}}; }

  void attr(Node& n, std::string_view name, std::int64_t v);
  void attr(Node& n, std::string_view name, double v);
  void attr(Node& n, std::string_view name, std::uint32_t v);
  void attr_string(Node& n, std::string_view name, std::string_view v);

  template <class T>
  void array(Node& n, std::string_view name, std::vector<std::uint64_t> dims,
             std::span<const T> values) {
    n.arrays.push_back(Array::make<T>(intern(name), std::move(dims), values));
  }

  File finish(Node root) &&;

 private:
  std::vector<std::string> strings_;
  std::map<std::string, std::uint32_t, std::less<>> index_;
};

/// Name-based read access over a parsed file.
class NodeView {
 public:
  NodeView(const File& file, const Node& node) : file_(&file), node_(&node) {}

  std::string_view name() const;
  const Node& node() const noexcept { return *node_; }
  const File& file() const noexcept { return *file_; }

  const Attribute* find_attr(std::string_view name) const;
  const Array* find_array(std::string_view name) const;
  std::vector<NodeView> children() const;
  /// First child with the given name, if any.
  std::optional<NodeView> child(std::string_view name) const;

  // Typed accessors throw corrupt-file when missing or mistyped.
  std::int64_t get_i64(std::string_view name) const;
  double get_f64(std::string_view name) const;
  std::uint32_t get_u32(std::string_view name) const;
  const std::string& get_string(std::string_view name) const;
  const Array& get_array(std::string_view name, ElementType type) const;
  NodeView get_child(std::string_view name) const;

 private:
  const File* file_;
  const Node* node_;
};

}  // namespace corelens::nrdf
