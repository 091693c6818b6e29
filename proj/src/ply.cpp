#include <algorithm>
#include <bit>
#include <cctype>
#include <optional>
#include <charconv>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "poseval/error.hpp"
#include "poseval/io.hpp"

namespace poseval {

namespace {

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<ScalarType> scalar_type(std::string_view name) {
  if (name == "char" || name == "int8") return ScalarType::Int8;
  if (name == "uchar" || name == "uint8") return ScalarType::UInt8;
  if (name == "short" || name == "int16") return ScalarType::Int16;
  if (name == "ushort" || name == "uint16") return ScalarType::UInt16;
  if (name == "int" || name == "int32") return ScalarType::Int32;
  if (name == "uint" || name == "uint32") return ScalarType::UInt32;
  if (name == "float" || name == "float32") return ScalarType::Float32;
  if (name == "double" || name == "float64") return ScalarType::Float64;
  return std::nullopt;
}

std::size_t scalar_size(ScalarType t) {
  switch (t) {
    case ScalarType::Int8:
    case ScalarType::UInt8: return 1;
    case ScalarType::Int16:
    case ScalarType::UInt16: return 2;
    case ScalarType::Int32:
    case ScalarType::UInt32:
    case ScalarType::Float32: return 4;
    case ScalarType::Float64: return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  ScalarType type = ScalarType::Float32;
  bool is_list = false;
  ScalarType count_type = ScalarType::UInt8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

class BodyReader {
 public:
  BodyReader(std::string_view body, bool binary, const std::string& source)
      : body_(body), binary_(binary), source_(source) {}

  double read(ScalarType type) { return binary_ ? read_binary(type) : read_ascii(); }

 private:
  double read_binary(ScalarType type) {
    const std::size_t n = scalar_size(type);
    if (pos_ + n > body_.size()) throw Error(ErrorCode::DecodeError, "binary PLY body is truncated", source_);
    unsigned char bytes[8];
    std::memcpy(bytes, body_.data() + pos_, n);
    pos_ += n;
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + n);
    switch (type) {
      case ScalarType::Int8: return load<std::int8_t>(bytes);
      case ScalarType::UInt8: return load<std::uint8_t>(bytes);
      case ScalarType::Int16: return load<std::int16_t>(bytes);
      case ScalarType::UInt16: return load<std::uint16_t>(bytes);
      case ScalarType::Int32: return load<std::int32_t>(bytes);
      case ScalarType::UInt32: return load<std::uint32_t>(bytes);
      case ScalarType::Float32: return load<float>(bytes);
      case ScalarType::Float64: return load<double>(bytes);
    }
    return 0.0;
  }

  template <typename T>
  static double load(const unsigned char* bytes) {
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return static_cast<double>(value);
  }

  double read_ascii() {
    while (pos_ < body_.size() && std::isspace(static_cast<unsigned char>(body_[pos_]))) ++pos_;
    if (pos_ >= body_.size()) throw Error(ErrorCode::DecodeError, "ASCII PLY body is truncated", source_);
    const char* begin = body_.data() + pos_;
    const char* end = body_.data() + body_.size();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) throw Error(ErrorCode::DecodeError, "invalid number in ASCII PLY body", source_);
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  std::string_view body_;
  bool binary_;
  const std::string& source_;
  std::size_t pos_ = 0;
};

std::vector<std::string> split_words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

}  // namespace

TriMesh parse_ply(std::string_view bytes, const std::string& source) {
  const auto malformed = [&](const std::string& what) { return Error(ErrorCode::MalformedHeader, what, source); };

  std::size_t pos = 0;
  std::size_t line_no = 0;
  const auto next_line = [&]() -> std::optional<std::string> {
    if (pos >= bytes.size()) return std::nullopt;
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    std::string line(bytes.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  auto first = next_line();
  if (!first || *first != "ply") throw malformed("missing 'ply' magic");

  bool binary = false;
  bool have_format = false;
  std::vector<Element> elements;
  bool ended = false;
  while (auto line = next_line()) {
    const auto words = split_words(*line);
    if (words.empty()) continue;
    const std::string& key = words[0];
    if (key == "comment" || key == "obj_info") continue;
    if (key == "end_header") {
      ended = true;
      break;
    }
    if (key == "format") {
      if (words.size() != 3) throw malformed("bad format line");
      if (words[1] == "ascii") {
        binary = false;
      } else if (words[1] == "binary_little_endian") {
        binary = true;
      } else if (words[1] == "binary_big_endian") {
        throw Error(ErrorCode::UnsupportedEncoding, "big-endian PLY is not supported", source);
      } else {
        throw malformed("unknown format '" + words[1] + "'");
      }
      have_format = true;
    } else if (key == "element") {
      if (words.size() != 3) throw malformed("bad element line " + std::to_string(line_no));
      Element e;
      e.name = words[1];
      const auto [ptr, ec] = std::from_chars(words[2].data(), words[2].data() + words[2].size(), e.count);
      if (ec != std::errc() || ptr != words[2].data() + words[2].size()) throw malformed("bad element count");
      elements.push_back(std::move(e));
    } else if (key == "property") {
      if (elements.empty()) throw malformed("property before any element");
      Property p;
      if (words.size() == 5 && words[1] == "list") {
        const auto count_type = scalar_type(words[2]);
        const auto item_type = scalar_type(words[3]);
        if (!count_type || !item_type) throw malformed("unknown list property type");
        p.is_list = true;
        p.count_type = *count_type;
        p.type = *item_type;
        p.name = words[4];
      } else if (words.size() == 3) {
        const auto type = scalar_type(words[1]);
        if (!type) throw malformed("unknown property type '" + words[1] + "'");
        p.type = *type;
        p.name = words[2];
      } else {
        throw malformed("bad property line " + std::to_string(line_no));
      }
      elements.back().properties.push_back(std::move(p));
    } else {
      throw malformed("unexpected header keyword '" + key + "'");
    }
  }
  if (!ended) throw malformed("missing end_header");
  if (!have_format) throw malformed("missing format line");

  TriMesh mesh;
  BodyReader reader(bytes.substr(std::min(pos, bytes.size())), binary, source);
  bool have_vertices = false;
  for (const Element& e : elements) {
    if (e.name == "vertex") {
      int ix = -1, iy = -1, iz = -1;
      for (std::size_t i = 0; i < e.properties.size(); ++i) {
        const auto& name = e.properties[i].name;
        if (e.properties[i].is_list) continue;
        if (name == "x") ix = static_cast<int>(i);
        if (name == "y") iy = static_cast<int>(i);
        if (name == "z") iz = static_cast<int>(i);
      }
      if (ix < 0 || iy < 0 || iz < 0) throw malformed("vertex element lacks x/y/z");
      have_vertices = true;
      mesh.vertices.reserve(e.count);
      for (std::size_t n = 0; n < e.count; ++n) {
        Vec3 v = Vec3::Zero();
        for (std::size_t i = 0; i < e.properties.size(); ++i) {
          const Property& p = e.properties[i];
          if (p.is_list) {
            const auto len = static_cast<std::size_t>(reader.read(p.count_type));
            for (std::size_t k = 0; k < len; ++k) reader.read(p.type);
            continue;
          }
          const double value = reader.read(p.type);
          if (static_cast<int>(i) == ix) v.x() = value;
          if (static_cast<int>(i) == iy) v.y() = value;
          if (static_cast<int>(i) == iz) v.z() = value;
        }
        mesh.vertices.push_back(v);
      }
    } else if (e.name == "face") {
      mesh.triangles.reserve(e.count);
      std::vector<std::uint32_t> poly;
      for (std::size_t n = 0; n < e.count; ++n) {
        for (const Property& p : e.properties) {
          if (!p.is_list) {
            reader.read(p.type);
            continue;
          }
          const double raw_len = reader.read(p.count_type);
          if (raw_len < 0) throw Error(ErrorCode::DecodeError, "negative face list length", source);
          const auto len = static_cast<std::size_t>(raw_len);
          const bool indices = p.name == "vertex_indices" || p.name == "vertex_index";
          poly.clear();
          for (std::size_t k = 0; k < len; ++k) {
            const double idx = reader.read(p.type);
            if (!indices) continue;
            if (idx < 0 || idx >= static_cast<double>(mesh.vertices.size()) || !have_vertices) {
              throw Error(ErrorCode::IndexOutOfRange,
                          "face " + std::to_string(n) + " references vertex " + std::to_string(static_cast<long long>(idx)) +
                              " but the mesh has " + std::to_string(mesh.vertices.size()) + " vertices",
                          source);
            }
            poly.push_back(static_cast<std::uint32_t>(idx));
          }
          for (std::size_t k = 1; k + 1 < poly.size(); ++k) mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
        }
      }
    } else {
      for (std::size_t n = 0; n < e.count; ++n) {
        for (const Property& p : e.properties) {
          if (p.is_list) {
            const auto len = static_cast<std::size_t>(reader.read(p.count_type));
            for (std::size_t k = 0; k < len; ++k) reader.read(p.type);
          } else {
            reader.read(p.type);
          }
        }
      }
    }
  }
  if (!have_vertices) throw malformed("no vertex element");
  return mesh;
}

std::string write_ply_ascii(const TriMesh& mesh) {
  std::string out;
  out += "ply\nformat ascii 1.0\n";
  out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  out += "element face " + std::to_string(mesh.triangles.size()) + "\n";
  out += "property list uchar int vertex_indices\nend_header\n";
  for (const Vec3& v : mesh.vertices) {
    out += format_double(v.x()) + ' ' + format_double(v.y()) + ' ' + format_double(v.z()) + '\n';
  }
  for (const Triangle& t : mesh.triangles) {
    out += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
  }
  return out;
}

std::string write_ply_binary(const TriMesh& mesh) {
  std::string out;
  out += "ply\nformat binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(mesh.vertices.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\n";
  out += "element face " + std::to_string(mesh.triangles.size()) + "\n";
  out += "property list uchar int vertex_indices\nend_header\n";
  const auto put = [&out](const auto& value) {
    char bytes[sizeof(value)];
    std::memcpy(bytes, &value, sizeof(value));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(value));
    out.append(bytes, sizeof(value));
  };
  for (const Vec3& v : mesh.vertices) {
    put(static_cast<float>(v.x()));
    put(static_cast<float>(v.y()));
    put(static_cast<float>(v.z()));
  }
  for (const Triangle& t : mesh.triangles) {
    put(std::uint8_t{3});
    for (auto i : t) put(static_cast<std::int32_t>(i));
  }
  return out;
}

}  // namespace poseval
