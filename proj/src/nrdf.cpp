#include "corelens/nrdf.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace corelens::nrdf {

namespace {

constexpr std::array<char, 4> kMagic{'N', 'R', 'D', 'F'};

// Smallest encodings, used to bound counts against the bytes left.
constexpr std::uint64_t kMinAttrBytes = 4 + 1 + 8;
constexpr std::uint64_t kMinArrayBytes = 4 + 1 + 1;
constexpr std::uint64_t kMinNodeBytes = 16;

[[noreturn]] void encode_error(const std::string& msg) {
  throw Error(ErrorCode::encode_error, msg);
}

[[noreturn]] void corrupt(const std::string& msg, std::uint64_t offset) {
  throw Error(ErrorCode::corrupt_file, msg, offset);
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    constexpr std::uint32_t kMinForLength[4] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMinForLength[extra] || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

// Element count of `dims`, or nullopt on u64 overflow.
std::optional<std::uint64_t> checked_product(std::span<const std::uint64_t> dims) {
  std::uint64_t n = 1;
  for (auto d : dims) {
    if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d) {
      return std::nullopt;
    }
    n *= d;
  }
  return n;
}

template <class T>
std::vector<T> copy_out(const Array& a, ElementType expected) {
  if (a.type != expected) {
    throw Error(ErrorCode::corrupt_file,
                "array has element type " + std::string(to_string(a.type)) +
                    ", expected " + std::string(to_string(expected)));
  }
  std::vector<T> out(a.payload.size() / sizeof(T));
  if (!out.empty()) std::memcpy(out.data(), a.payload.data(), out.size() * sizeof(T));
  return out;
}

// ---------------------------------------------------------------------------
// Validation

void validate_node(const File& f, const Node& n, std::size_t depth, bool is_root) {
  if (depth > kMaxDepth) encode_error("node tree deeper than " + std::to_string(kMaxDepth));
  const auto nstr = f.strings.size();
  if (!(is_root && n.name == kNoName) && n.name >= nstr) {
    encode_error("node name index " + std::to_string(n.name) + " out of range");
  }
  std::set<std::uint32_t> names;
  for (const auto& a : n.attributes) {
    if (a.name >= nstr) encode_error("attribute name index out of range");
    if (!names.insert(a.name).second) {
      encode_error("duplicate attribute '" + f.strings[a.name] + "'");
    }
    if (const auto* s = std::get_if<StringRef>(&a.value); s && s->index >= nstr) {
      encode_error("string attribute '" + f.strings[a.name] + "' out of range");
    }
  }
  names.clear();
  for (const auto& arr : n.arrays) {
    if (arr.name >= nstr) encode_error("array name index out of range");
    if (!names.insert(arr.name).second) {
      encode_error("duplicate array '" + f.strings[arr.name] + "'");
    }
    if (arr.type != ElementType::f64 && arr.type != ElementType::i64 &&
        arr.type != ElementType::u32) {
      encode_error("array '" + f.strings[arr.name] + "' has an unknown element type");
    }
    if (arr.dims.size() > kMaxRank) {
      encode_error("array '" + f.strings[arr.name] + "' rank exceeds " +
                   std::to_string(kMaxRank));
    }
    const auto count = checked_product(arr.dims);
    if (!count || *count > std::numeric_limits<std::uint64_t>::max() /
                               element_size(arr.type) ||
        *count * element_size(arr.type) != arr.payload.size()) {
      encode_error("array '" + f.strings[arr.name] + "' payload does not match dims");
    }
  }
  for (const auto& c : n.children) validate_node(f, c, depth + 1, false);
}

// ---------------------------------------------------------------------------
// Writing

class Sink {
 public:
  explicit Sink(std::ostream& os) : os_(os) {}

  void bytes(const void* p, std::size_t n) {
    if (n == 0) return;
    os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!os_) throw Error(ErrorCode::io_error, "write failed");
    count_ += n;
  }
  template <class T>
  void put(T v) {
    bytes(&v, sizeof v);
  }
  std::uint64_t count() const noexcept { return count_; }

 private:
  std::ostream& os_;
  std::uint64_t count_ = 0;
};

std::uint64_t heap_bytes(const File& f) {
  std::uint64_t n = 4;
  for (const auto& s : f.strings) n += 4 + s.size();
  return n;
}

void write_node(Sink& out, const Node& n) {
  out.put<std::uint32_t>(n.name);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(n.attributes.size()));
  out.put<std::uint32_t>(static_cast<std::uint32_t>(n.arrays.size()));
  out.put<std::uint32_t>(static_cast<std::uint32_t>(n.children.size()));
  for (const auto& a : n.attributes) {
    out.put<std::uint32_t>(a.name);
    std::array<std::byte, 8> value{};
    std::uint8_t code = 0;
    std::visit(
        [&](auto v) {
          using T = decltype(v);
          if constexpr (std::is_same_v<T, std::int64_t>) {
            code = static_cast<std::uint8_t>(ScalarType::i64);
            std::memcpy(value.data(), &v, 8);
          } else if constexpr (std::is_same_v<T, double>) {
            code = static_cast<std::uint8_t>(ScalarType::f64);
            std::memcpy(value.data(), &v, 8);
          } else if constexpr (std::is_same_v<T, StringRef>) {
            code = static_cast<std::uint8_t>(ScalarType::string);
            std::memcpy(value.data(), &v.index, 4);
          } else {
            code = static_cast<std::uint8_t>(ScalarType::u32);
            std::memcpy(value.data(), &v, 4);
          }
        },
        a.value);
    out.put<std::uint8_t>(code);
    out.bytes(value.data(), value.size());
  }
  for (const auto& arr : n.arrays) {
    out.put<std::uint32_t>(arr.name);
    out.put<std::uint8_t>(static_cast<std::uint8_t>(arr.type));
    out.put<std::uint8_t>(static_cast<std::uint8_t>(arr.dims.size()));
    for (auto d : arr.dims) out.put<std::uint64_t>(d);
    out.bytes(arr.payload.data(), arr.payload.size());
  }
  for (const auto& c : n.children) write_node(out, c);
}

// ---------------------------------------------------------------------------
// Reading

class Reader {
 public:
  Reader(std::span<const std::byte> bytes, std::uint64_t pos, std::uint64_t limit)
      : bytes_(bytes), pos_(pos), limit_(limit) {}

  std::uint64_t pos() const noexcept { return pos_; }
  std::uint64_t remaining() const noexcept { return pos_ < end() ? end() - pos_ : 0; }

  void need(std::uint64_t n, std::string_view what) const {
    if (n > remaining()) {
      corrupt("truncated " + std::string(what), pos_ < end() ? pos_ : end());
    }
  }

  template <class T>
  T get(std::string_view what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::span<const std::byte> take(std::uint64_t n, std::string_view what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::uint64_t end() const noexcept {
    return std::min<std::uint64_t>(limit_, bytes_.size());
  }

  std::span<const std::byte> bytes_;
  std::uint64_t pos_;
  std::uint64_t limit_;
};

Node read_node(Reader& in, const File& f, std::size_t depth, bool is_root) {
  const auto start = in.pos();
  if (depth > kMaxDepth) corrupt("node tree too deep", start);
  const auto nstr = f.strings.size();
  Node n;
  n.name = in.get<std::uint32_t>("node name");
  if (!(is_root && n.name == kNoName) && n.name >= nstr) {
    corrupt("dangling node name index " + std::to_string(n.name), start);
  }
  const auto nattr = in.get<std::uint32_t>("attribute count");
  const auto narr = in.get<std::uint32_t>("array count");
  const auto nchild = in.get<std::uint32_t>("child count");
  const std::uint64_t least =
      nattr * kMinAttrBytes + narr * kMinArrayBytes + nchild * kMinNodeBytes;
  if (least > in.remaining()) {
    corrupt("node counts exceed the remaining bytes", start);
  }

  n.attributes.reserve(nattr);
  std::set<std::uint32_t> names;
  for (std::uint32_t i = 0; i < nattr; ++i) {
    const auto at = in.pos();
    Attribute a;
    a.name = in.get<std::uint32_t>("attribute name");
    if (a.name >= nstr) corrupt("dangling attribute name index", at);
    if (!names.insert(a.name).second) corrupt("duplicate attribute name", at);
    const auto code = in.get<std::uint8_t>("attribute type");
    const auto raw = in.take(8, "attribute value");
    std::uint32_t low;
    std::uint32_t high;
    std::memcpy(&low, raw.data(), 4);
    std::memcpy(&high, raw.data() + 4, 4);
    switch (static_cast<ScalarType>(code)) {
      case ScalarType::i64: {
        std::int64_t v;
        std::memcpy(&v, raw.data(), 8);
        a.value = v;
        break;
      }
      case ScalarType::f64: {
        double v;
        std::memcpy(&v, raw.data(), 8);
        a.value = v;
        break;
      }
      case ScalarType::string:
        if (high != 0) corrupt("non-zero padding in string attribute", at);
        if (low >= nstr) corrupt("dangling string attribute index", at);
        a.value = StringRef{low};
        break;
      case ScalarType::u32:
        if (high != 0) corrupt("non-zero padding in u32 attribute", at);
        a.value = low;
        break;
      default:
        corrupt("unknown attribute type " + std::to_string(code), at);
    }
    n.attributes.push_back(a);
  }

  n.arrays.reserve(narr);
  names.clear();
  for (std::uint32_t i = 0; i < narr; ++i) {
    const auto at = in.pos();
    Array arr;
    arr.name = in.get<std::uint32_t>("array name");
    if (arr.name >= nstr) corrupt("dangling array name index", at);
    if (!names.insert(arr.name).second) corrupt("duplicate array name", at);
    const auto code = in.get<std::uint8_t>("array element type");
    if (code != 1 && code != 2 && code != 4) {
      corrupt("unknown array element type " + std::to_string(code), at);
    }
    arr.type = static_cast<ElementType>(code);
    const auto rank = in.get<std::uint8_t>("array rank");
    if (rank > kMaxRank) corrupt("array rank too large", at);
    arr.dims.resize(rank);
    for (auto& d : arr.dims) d = in.get<std::uint64_t>("array dims");
    const auto payload_at = in.pos();
    const auto count = checked_product(arr.dims);
    const auto esize = element_size(arr.type);
    if (!count || *count > in.remaining() / esize) {
      corrupt("array payload exceeds the remaining bytes", payload_at);
    }
    const auto bytes = in.take(*count * esize, "array payload");
    arr.payload.assign(bytes.begin(), bytes.end());
    n.arrays.push_back(std::move(arr));
  }

  n.children.reserve(nchild);
  for (std::uint32_t i = 0; i < nchild; ++i) {
    n.children.push_back(read_node(in, f, depth + 1, false));
  }
  return n;
}

void append_quoted(std::string& out, std::string_view s) {
  out += '"';
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (ch == '"' || ch == '\\') {
      out += '\\';
      out += ch;
    } else if (c < 0x20 || c == 0x7F) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\x%02x", c);
      out += buf;
    } else {
      out += ch;
    }
  }
  out += '"';
}

void dump_node(const File& f, const Node& n, std::size_t depth, bool is_root,
               DumpMode mode, std::string& out) {
  const std::string indent(2 * depth, ' ');
  out += indent;
  if (is_root) {
    out += '/';
  } else {
    out += f.strings[n.name];
  }
  out += '\n';
  if (mode == DumpMode::full) {
    const std::string inner(2 * (depth + 1), ' ');
    for (const auto& a : n.attributes) {
      out += inner;
      out += '@';
      out += f.strings[a.name];
      std::visit(
          [&](auto v) {
            using T = decltype(v);
            if constexpr (std::is_same_v<T, std::int64_t>) {
              out += ": i64 = " + std::to_string(v);
            } else if constexpr (std::is_same_v<T, double>) {
              out += ": f64 = " + format_double(v);
            } else if constexpr (std::is_same_v<T, StringRef>) {
              out += ": string = ";
              append_quoted(out, f.strings[v.index]);
            } else {
              out += ": u32 = " + std::to_string(v);
            }
          },
          a.value);
      out += '\n';
    }
    for (const auto& arr : n.arrays) {
      out += inner;
      out += f.strings[arr.name];
      out += ": ";
      out += to_string(arr.type);
      out += '[';
      for (std::size_t i = 0; i < arr.dims.size(); ++i) {
        if (i) out += 'x';
        out += std::to_string(arr.dims[i]);
      }
      out += "] =";
      switch (arr.type) {
        case ElementType::f64:
          for (double v : arr.as_f64()) out += ' ' + format_double(v);
          break;
        case ElementType::i64:
          for (auto v : arr.as_i64()) out += ' ' + std::to_string(v);
          break;
        case ElementType::u32:
          for (auto v : arr.as_u32()) out += ' ' + std::to_string(v);
          break;
      }
      out += '\n';
    }
  }
  for (const auto& c : n.children) dump_node(f, c, depth + 1, false, mode, out);
}

}  // namespace

std::size_t element_size(ElementType t) {
  return t == ElementType::u32 ? 4 : 8;
}

std::string_view to_string(ElementType t) {
  switch (t) {
    case ElementType::i64: return "i64";
    case ElementType::f64: return "f64";
    case ElementType::u32: return "u32";
  }
  return "?";
}

bool Attribute::operator==(const Attribute& o) const {
  if (name != o.name || value.index() != o.value.index()) return false;
  if (const auto* d = std::get_if<double>(&value)) {
    return std::bit_cast<std::uint64_t>(*d) ==
           std::bit_cast<std::uint64_t>(std::get<double>(o.value));
  }
  return value == o.value;
}

std::uint64_t Array::element_count() const {
  return checked_product(dims).value_or(0);
}

std::vector<double> Array::as_f64() const { return copy_out<double>(*this, ElementType::f64); }
std::vector<std::int64_t> Array::as_i64() const {
  return copy_out<std::int64_t>(*this, ElementType::i64);
}
std::vector<std::uint32_t> Array::as_u32() const {
  return copy_out<std::uint32_t>(*this, ElementType::u32);
}

const std::string& File::str(std::uint32_t index) const {
  if (index >= strings.size()) {
    throw Error(ErrorCode::corrupt_file,
                "string index " + std::to_string(index) + " out of range");
  }
  return strings[index];
}

void validate(const File& file) {
  if (file.version != kVersion) {
    encode_error("only version " + std::to_string(kVersion) + " can be written");
  }
  if (file.strings.size() > std::numeric_limits<std::uint32_t>::max() - 1) {
    encode_error("string heap too large");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& s : file.strings) {
    if (s.size() > std::numeric_limits<std::uint32_t>::max()) encode_error("string too long");
    if (!valid_utf8(s)) encode_error("string heap entry is not valid UTF-8");
    if (!seen.insert(s).second) encode_error("duplicate string heap entry '" + s + "'");
  }
  validate_node(file, file.root, 0, true);
}

std::uint64_t write(const File& file, std::ostream& sink) {
  validate(file);
  Sink out(sink);
  const std::uint64_t heap_offset = kHeaderSize;
  const std::uint64_t heap_length = heap_bytes(file);
  out.bytes(kMagic.data(), kMagic.size());
  out.put<std::uint32_t>(file.version);
  out.put<std::uint64_t>(heap_offset);
  out.put<std::uint64_t>(heap_length);
  out.put<std::uint64_t>(heap_offset + heap_length);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(file.strings.size()));
  for (const auto& s : file.strings) {
    out.put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    out.bytes(s.data(), s.size());
  }
  write_node(out, file.root);
  return out.count();
}

std::vector<std::byte> encode(const File& file) {
  std::ostringstream os(std::ios::binary);
  write(file, os);
  const std::string s = std::move(os).str();
  std::vector<std::byte> out(s.size());
  if (!s.empty()) std::memcpy(out.data(), s.data(), s.size());
  return out;
}

void write_file(const File& file, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  write(file, os);
  os.flush();
  if (!os) throw Error(ErrorCode::io_error, "write to '" + path + "' failed");
}

File decode(std::span<const std::byte> bytes) {
  // A short prefix of the magic is a truncated file; anything else is foreign.
  const std::size_t magic_len = std::min<std::size_t>(bytes.size(), kMagic.size());
  if (magic_len > 0 && std::memcmp(bytes.data(), kMagic.data(), magic_len) != 0) {
    throw Error(ErrorCode::not_nrdf, "not an NRDF file (bad magic)", 0);
  }
  Reader header(bytes, 0, bytes.size());
  header.take(4, "magic");
  File f;
  f.version = header.get<std::uint32_t>("version");
  if (f.version != kVersion) {
    throw Error(ErrorCode::unsupported_version,
                "unsupported NRDF version " + std::to_string(f.version), 4);
  }
  const auto heap_offset = header.get<std::uint64_t>("heap offset");
  const auto heap_length = header.get<std::uint64_t>("heap length");
  const auto root_offset = header.get<std::uint64_t>("root offset");
  if (heap_length > std::numeric_limits<std::uint64_t>::max() - heap_offset) {
    corrupt("heap extent overflows", 16);
  }
  const auto heap_end = heap_offset + heap_length;

  Reader heap(bytes, heap_offset, heap_end);
  const auto count = heap.get<std::uint32_t>("string count");
  if (count == kNoName) corrupt("string heap too large", heap_offset);
  if (std::uint64_t{count} * 4 > heap.remaining()) {
    corrupt("string count exceeds the heap", heap_offset);
  }
  f.strings.reserve(count);
  std::unordered_set<std::string_view> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto at = heap.pos();
    const auto len = heap.get<std::uint32_t>("string length");
    const auto raw = heap.take(len, "string bytes");
    std::string s(reinterpret_cast<const char*>(raw.data()), raw.size());
    if (!valid_utf8(s)) corrupt("string is not valid UTF-8", at);
    f.strings.push_back(std::move(s));
  }
  for (const auto& s : f.strings) {
    if (!seen.insert(s).second) corrupt("duplicate string in heap", heap_offset);
  }
  if (heap.pos() != heap_end) corrupt("heap length mismatch", heap.pos());

  Reader body(bytes, root_offset, bytes.size());
  f.root = read_node(body, f, 0, true);
  return f;
}

std::vector<std::byte> read_bytes(const std::string& path) {
  std::ifstream is(path, std::ios::binary | std::ios::ate);
  if (!is) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
  const auto size = static_cast<std::size_t>(is.tellg());
  is.seekg(0);
  std::vector<std::byte> data(size);
  if (size && !is.read(reinterpret_cast<char*>(data.data()),
                       static_cast<std::streamsize>(size))) {
    throw Error(ErrorCode::io_error, "read of '" + path + "' failed");
  }
  return data;
}

File read_file(const std::string& path) { return decode(read_bytes(path)); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string dump(const File& file, DumpMode mode) {
  std::string out;
  dump_node(file, file.root, 0, true, mode, out);
  return out;
}

// ---------------------------------------------------------------------------
// Builder

std::uint32_t Builder::intern(std::string_view s) {
  auto it = index_.find(s);
  if (it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(strings_.size());
  strings_.emplace_back(s);
  index_.emplace(std::string(s), id);
  return id;
}

void Builder::attr(Node& n, std::string_view name, std::int64_t v) {
  n.attributes.push_back({intern(name), v});
}
void Builder::attr(Node& n, std::string_view name, double v) {
  n.attributes.push_back({intern(name), v});
}
void Builder::attr(Node& n, std::string_view name, std::uint32_t v) {
  n.attributes.push_back({intern(name), v});
}
void Builder::attr_string(Node& n, std::string_view name, std::string_view v) {
  const auto key = intern(name);
  n.attributes.push_back({key, StringRef{intern(v)}});
}

File Builder::finish(Node root) && {
  File f;
  f.strings = std::move(strings_);
  f.root = std::move(root);
  index_.clear();
  return f;
}

// ---------------------------------------------------------------------------
// NodeView

std::string_view NodeView::name() const {
  return node_->name == kNoName ? std::string_view("/") : file_->str(node_->name);
}

const Attribute* NodeView::find_attr(std::string_view name) const {
  for (const auto& a : node_->attributes) {
    if (file_->str(a.name) == name) return &a;
  }
  return nullptr;
}

const Array* NodeView::find_array(std::string_view name) const {
  for (const auto& a : node_->arrays) {
    if (file_->str(a.name) == name) return &a;
  }
  return nullptr;
}

std::vector<NodeView> NodeView::children() const {
  std::vector<NodeView> out;
  out.reserve(node_->children.size());
  for (const auto& c : node_->children) out.emplace_back(*file_, c);
  return out;
}

std::optional<NodeView> NodeView::child(std::string_view name) const {
  for (const auto& c : node_->children) {
    if (file_->str(c.name) == name) return NodeView(*file_, c);
  }
  return std::nullopt;
}

namespace {
template <class T>
const T& typed_attr(const NodeView& v, std::string_view name, std::string_view type) {
  const Attribute* a = v.find_attr(name);
  if (!a) {
    throw Error(ErrorCode::corrupt_file, "node '" + std::string(v.name()) +
                                             "' lacks attribute '" +
                                             std::string(name) + "'");
  }
  const T* p = std::get_if<T>(&a->value);
  if (!p) {
    throw Error(ErrorCode::corrupt_file, "attribute '" + std::string(name) +
                                             "' of node '" + std::string(v.name()) +
                                             "' is not " + std::string(type));
  }
  return *p;
}
}  // namespace

std::int64_t NodeView::get_i64(std::string_view name) const {
  return typed_attr<std::int64_t>(*this, name, "i64");
}
double NodeView::get_f64(std::string_view name) const {
  return typed_attr<double>(*this, name, "f64");
}
std::uint32_t NodeView::get_u32(std::string_view name) const {
  return typed_attr<std::uint32_t>(*this, name, "u32");
}
const std::string& NodeView::get_string(std::string_view name) const {
  return file_->str(typed_attr<StringRef>(*this, name, "a string").index);
}

const Array& NodeView::get_array(std::string_view name, ElementType type) const {
  const Array* a = find_array(name);
  if (!a || a->type != type) {
    throw Error(ErrorCode::corrupt_file, "node '" + std::string(this->name()) +
                                             "' lacks " + std::string(to_string(type)) +
                                             " array '" + std::string(name) + "'");
  }
  return *a;
}

NodeView NodeView::get_child(std::string_view name) const {
  auto c = child(name);
  if (!c) {
    throw Error(ErrorCode::corrupt_file, "node '" + std::string(this->name()) +
                                             "' lacks child '" + std::string(name) + "'");
  }
  return *c;
}

}  // namespace corelens::nrdf
