#include "rwi/idx.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>

namespace rwi {

long IdxTensor::size() const {
  long total = 1;
  for (std::uint32_t d : dims) total *= static_cast<long>(d);
  return dims.empty() ? 0 : total;
}

IdxParseError::IdxParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " (offset " + std::to_string(offset) + ")"), offset_(offset) {}

namespace {

int element_size(std::uint8_t type_code) {
  switch (type_code) {
    case kIdxU8:
    case kIdxI8: return 1;
    case kIdxI16: return 2;
    case kIdxI32:
    case kIdxF32: return 4;
    case kIdxF64: return 8;
    default: return 0;
  }
}

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
         std::uint32_t(p[3]);
}

void write_be32(std::uint32_t v, std::vector<std::uint8_t>& out) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> gunzip(std::span<const std::uint8_t> bytes) {
  z_stream strm{};
  if (inflateInit2(&strm, 15 + 32) != Z_OK) throw std::runtime_error("zlib init failed");
  std::vector<std::uint8_t> out;
  out.resize(std::max<std::size_t>(bytes.size() * 4, 1 << 16));
  strm.next_in = const_cast<Bytef*>(bytes.data());
  strm.avail_in = static_cast<uInt>(bytes.size());
  std::size_t written = 0;
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    if (written == out.size()) out.resize(out.size() * 2);
    strm.next_out = out.data() + written;
    strm.avail_out = static_cast<uInt>(out.size() - written);
    rc = inflate(&strm, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&strm);
      throw IdxParseError("gzip payload corrupt", bytes.size() - strm.avail_in);
    }
    written = out.size() - strm.avail_out;
  }
  inflateEnd(&strm);
  out.resize(written);
  return out;
}

}  // namespace

IdxTensor parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) {
    const std::vector<std::uint8_t> inflated = gunzip(bytes);
    return parse_idx(std::span<const std::uint8_t>(inflated));
  }
  if (bytes.size() < 4) throw IdxParseError("truncated IDX header", 0);
  if (bytes[0] != 0 || bytes[1] != 0) throw IdxParseError("bad IDX magic", 0);
  IdxTensor t;
  t.type_code = bytes[2];
  const int elem = element_size(t.type_code);
  if (elem == 0) throw IdxParseError("unsupported IDX type code", 2);
  const int rank = bytes[3];
  if (rank == 0) throw IdxParseError("zero-rank IDX tensor", 3);

  std::size_t offset = 4;
  long count = 1;
  for (int i = 0; i < rank; ++i) {
    if (offset + 4 > bytes.size()) throw IdxParseError("truncated IDX dimension header", offset);
    const std::uint32_t dim = read_be32(bytes.data() + offset);
    t.dims.push_back(dim);
    count *= static_cast<long>(dim);
    offset += 4;
  }
  const std::size_t need = offset + static_cast<std::size_t>(count) * elem;
  if (bytes.size() < need) throw IdxParseError("truncated IDX payload", bytes.size());
  if (bytes.size() > need) throw IdxParseError("trailing bytes after IDX payload", need);

  t.data.resize(count);
  const std::uint8_t* p = bytes.data() + offset;
  for (long i = 0; i < count; ++i, p += elem) {
    switch (t.type_code) {
      case kIdxU8: t.data[i] = static_cast<double>(*p) / 255.0; break;
      case kIdxI8: t.data[i] = static_cast<double>(static_cast<std::int8_t>(*p)); break;
      case kIdxI16:
        t.data[i] = static_cast<double>(static_cast<std::int16_t>((std::uint16_t(p[0]) << 8) | p[1]));
        break;
      case kIdxI32: t.data[i] = static_cast<double>(static_cast<std::int32_t>(read_be32(p))); break;
      case kIdxF32: {
        const std::uint32_t bits = read_be32(p);
        float f;
        std::memcpy(&f, &bits, sizeof(f));
        t.data[i] = f;
        break;
      }
      case kIdxF64: {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits = (bits << 8) | p[b];
        double d;
        std::memcpy(&d, &bits, sizeof(d));
        t.data[i] = d;
        break;
      }
    }
  }
  return t;
}

std::vector<std::uint8_t> encode_idx(const IdxTensor& tensor) {
  if (tensor.dims.empty()) throw std::invalid_argument("encode_idx: need at least one dimension");
  if (tensor.size() != static_cast<long>(tensor.data.size()))
    throw std::invalid_argument("encode_idx: data length does not match dimensions");
  if (element_size(tensor.type_code) == 0)
    throw std::invalid_argument("encode_idx: unsupported type code");

  std::vector<std::uint8_t> out;
  out.push_back(0);
  out.push_back(0);
  out.push_back(tensor.type_code);
  out.push_back(static_cast<std::uint8_t>(tensor.dims.size()));
  for (std::uint32_t d : tensor.dims) write_be32(d, out);

  for (double v : tensor.data) {
    switch (tensor.type_code) {
      case kIdxU8: {
        const long raw = std::lround(v * 255.0);
        if (raw < 0 || raw > 255) throw std::invalid_argument("encode_idx: u8 value out of range");
        out.push_back(static_cast<std::uint8_t>(raw));
        break;
      }
      case kIdxI8: out.push_back(static_cast<std::uint8_t>(static_cast<std::int8_t>(v))); break;
      case kIdxI16: {
        const auto raw = static_cast<std::int16_t>(v);
        out.push_back(static_cast<std::uint8_t>(std::uint16_t(raw) >> 8));
        out.push_back(static_cast<std::uint8_t>(raw));
        break;
      }
      case kIdxI32: write_be32(static_cast<std::uint32_t>(static_cast<std::int32_t>(v)), out); break;
      case kIdxF32: {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, sizeof(f));
        write_be32(bits, out);
        break;
      }
      case kIdxF64: {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(v));
        for (int b = 7; b >= 0; --b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
        break;
      }
    }
  }
  return out;
}

IdxTensor read_idx_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_idx_file: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return parse_idx(bytes);
}

void write_idx_file(const IdxTensor& tensor, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_idx(tensor);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_idx_file: cannot open " + path.string());
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw std::runtime_error("write_idx_file: write failed for " + path.string());
}

Dataset dataset_from_idx(const IdxTensor& images, const IdxTensor& labels, int classes) {
  if (images.dims.empty() || labels.dims.size() != 1)
    throw std::invalid_argument("dataset_from_idx: images need rank >= 1, labels rank 1");
  const long examples = images.dims[0];
  if (static_cast<long>(labels.dims[0]) != examples)
    throw std::invalid_argument("dataset_from_idx: image/label example counts differ");
  long dims = 1;
  for (std::size_t i = 1; i < images.dims.size(); ++i) dims *= images.dims[i];
  if (classes < 2) throw std::invalid_argument("dataset_from_idx: classes must be >= 2");

  Dataset d;
  d.objective = Objective::CrossEntropy;
  d.inputs.resize(dims, examples);
  for (long e = 0; e < examples; ++e)
    for (long i = 0; i < dims; ++i) d.inputs(i, e) = images.data[e * dims + i];
  d.targets = Matrix::Zero(classes, examples);
  for (long e = 0; e < examples; ++e) {
    const double raw = labels.data[e];
    const long label = labels.type_code == kIdxU8 ? std::lround(raw * 255.0) : std::lround(raw);
    if (label < 0 || label >= classes)
      throw std::invalid_argument("dataset_from_idx: label out of range at example " +
                                  std::to_string(e));
    d.targets(label, e) = 1.0;
  }
  return d;
}

Dataset load_idx_dataset(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path, int classes) {
  return dataset_from_idx(read_idx_file(images_path), read_idx_file(labels_path), classes);
}

}  // namespace rwi
