#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "frpt/tensor.hpp"

namespace frpt {

// Binary array container shared by backbone weights and FRPT checkpoints.
//
//   "FRPT" | version u32 | count u32 |
//   count x ( name_len u16 | name utf-8 | rank u8 | dims u32[rank] | dtype u8 | data )
//   | crc32 u32 over all preceding bytes
//
// Integers are little-endian. dtype 0 is little-endian IEEE-754 binary32.
inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::uint8_t kDtypeF32 = 0;

struct NamedArray {
    std::string name;
    Tensor<float> tensor;
};

using ArrayList = std::vector<NamedArray>;

std::vector<std::uint8_t> encode_container(const ArrayList& arrays);
// Throws FormatError (with byte offset) on bad magic, version, truncation,
// unknown dtype, trailing bytes, or checksum mismatch.
ArrayList decode_container(std::span<const std::uint8_t> bytes);

void write_container(const std::filesystem::path& path, const ArrayList& arrays);
ArrayList read_container(const std::filesystem::path& path);

// Lookup helpers. `find_array` returns nullptr when absent; `require_array`
// throws StructureError.
const Tensor<float>* find_array(const ArrayList& arrays, const std::string& name);
const Tensor<float>& require_array(const ArrayList& arrays, const std::string& name);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace frpt
