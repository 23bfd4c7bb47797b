#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "lanekit/io.hpp"

namespace lanekit {

namespace {

struct TensorHeader {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t depth = 0;
};

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((v >> shift) & 0xffu));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_tensor(const std::filesystem::path& path, TensorHeader header, std::span<const float> values) {
  std::string bytes(kTensorMagic, sizeof(kTensorMagic));
  put_u32(bytes, header.height);
  put_u32(bytes, header.width);
  put_u32(bytes, header.depth);
  bytes.reserve(bytes.size() + values.size() * 4);
  for (float v : values) put_u32(bytes, std::bit_cast<std::uint32_t>(v));
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw Error("cannot write " + path.string());
  }
}

std::vector<float> read_tensor(const std::filesystem::path& path, TensorHeader& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kTensorMagic, sizeof(kTensorMagic)) != 0) {
    throw ParseError(path.string(), 0, "not a tensor file (bad magic)");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  header = {get_u32(p + 4), get_u32(p + 8), get_u32(p + 12)};
  if (header.height == 0 || header.width == 0 || header.depth == 0) {
    throw ParseError(path.string(), 0, "tensor dimensions must be positive");
  }
  const std::uint64_t count = static_cast<std::uint64_t>(header.height) * header.width * header.depth;
  if (bytes.size() != 16 + count * 4) {
    throw ParseError(path.string(), 0, "tensor payload size does not match its header");
  }
  std::vector<float> values(count);
  for (std::uint64_t i = 0; i < count; ++i) values[i] = std::bit_cast<float>(get_u32(p + 16 + i * 4));
  return values;
}

}  // namespace

void write_embedding_file(const std::filesystem::path& path, const EmbeddingField& field) {
  std::vector<float> values(field.values().begin(), field.values().end());
  write_tensor(path,
               {static_cast<std::uint32_t>(field.grid().height()), static_cast<std::uint32_t>(field.grid().width()),
                static_cast<std::uint32_t>(field.dim())},
               values);
}

EmbeddingField read_embedding_file(const std::filesystem::path& path) {
  TensorHeader header;
  const std::vector<float> values = read_tensor(path, header);
  std::vector<double> wide(values.begin(), values.end());
  for (double v : wide) {
    if (!std::isfinite(v)) throw ParseError(path.string(), 0, "non-finite embedding value");
  }
  return EmbeddingField(ImageGrid(static_cast<int>(header.width), static_cast<int>(header.height)), header.depth,
                        std::move(wide));
}

void write_mask_file(const std::filesystem::path& path, const BinaryMask& mask) {
  std::vector<float> values;
  values.reserve(mask.values().size());
  for (std::uint8_t b : mask.values()) values.push_back(b != 0 ? 1.0f : 0.0f);
  write_tensor(path,
               {static_cast<std::uint32_t>(mask.grid().height()), static_cast<std::uint32_t>(mask.grid().width()), 1},
               values);
}

BinaryMask read_mask_file(const std::filesystem::path& path) {
  TensorHeader header;
  const std::vector<float> values = read_tensor(path, header);
  if (header.depth != 1) throw ParseError(path.string(), 0, "mask tensor must have depth 1");
  std::vector<std::uint8_t> bits;
  bits.reserve(values.size());
  for (float v : values) bits.push_back(v != 0.0f ? 1 : 0);
  return BinaryMask(ImageGrid(static_cast<int>(header.width), static_cast<int>(header.height)), std::move(bits));
}

void write_instance_map(std::ostream& out, const InstanceMap& map) {
  const ImageGrid& grid = map.grid();
  std::string buffer = std::to_string(grid.height()) + ' ' + std::to_string(grid.width()) + ' ' +
                       std::to_string(instance_count(map)) + '\n';
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      if (x > 0) buffer.push_back(' ');
      buffer += std::to_string(map(x, y));
    }
    buffer.push_back('\n');
  }
  out << buffer;
}

InstanceMap read_instance_map(std::istream& in, const std::string& source) {
  long long height = 0;
  long long width = 0;
  long long lanes = 0;
  if (!(in >> height >> width >> lanes) || height < 1 || width < 1 || lanes < 0) {
    throw ParseError(source, 1, "expected header 'H W L'");
  }
  InstanceMap map(ImageGrid(static_cast<int>(width), static_cast<int>(height)));
  for (auto& label : map.values()) {
    long long v = 0;
    if (!(in >> v) || v < 0 || v > lanes) throw ParseError(source, 0, "bad or missing instance label");
    label = static_cast<std::uint32_t>(v);
  }
  return map;
}

}  // namespace lanekit
