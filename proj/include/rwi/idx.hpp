#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "rwi/dataset.hpp"

namespace rwi {

/// IDX container: magic 0x00 0x00 <type> <rank>, rank big-endian uint32
/// dimension sizes, then the payload in row-major order. Unsigned-byte data
/// is mapped to [0, 1] (value / 255); other numeric types are kept verbatim.
struct IdxTensor {
  std::uint8_t type_code = 0x08;
  std::vector<std::uint32_t> dims;
  std::vector<double> data;

  long size() const;
};

class IdxParseError : public std::runtime_error {
 public:
  IdxParseError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

constexpr std::uint8_t kIdxU8 = 0x08;
constexpr std::uint8_t kIdxI8 = 0x09;
constexpr std::uint8_t kIdxI16 = 0x0B;
constexpr std::uint8_t kIdxI32 = 0x0C;
constexpr std::uint8_t kIdxF32 = 0x0D;
constexpr std::uint8_t kIdxF64 = 0x0E;

/// Decode an IDX byte stream; gzip containers are detected by magic and
/// inflated transparently.
IdxTensor parse_idx(std::span<const std::uint8_t> bytes);

/// Inverse of parse_idx (u8 data is scaled back by 255 and rounded).
std::vector<std::uint8_t> encode_idx(const IdxTensor& tensor);

IdxTensor read_idx_file(const std::filesystem::path& path);
void write_idx_file(const IdxTensor& tensor, const std::filesystem::path& path);

/// Assemble a classification dataset from an image tensor (examples first
/// dimension, remaining dimensions flattened) and a label tensor.
Dataset dataset_from_idx(const IdxTensor& images, const IdxTensor& labels, int classes);

/// Load images/labels files (optionally .gz) into an unnormalized dataset.
Dataset load_idx_dataset(const std::filesystem::path& images_path,
                         const std::filesystem::path& labels_path, int classes);

}  // namespace rwi
