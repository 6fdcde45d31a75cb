#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ssn4/tensor.hpp"

namespace ssn4 {

// Named-tensor container, little-endian:
//
//   bytes 0..7   magic "SSN4CKPT"
//   u32          format version (currently 1)
//   u32          header length, then that many UTF-8 bytes (application data)
//   u32          entry count
//   per entry:   u32 name length, name bytes,
//                u32 rank, u32 dims[rank],
//                f64 row-major payload
struct NamedTensor {
    std::string name;
    Tensor tensor;
};

struct TensorArchive {
    std::string header;
    std::vector<NamedTensor> entries;

    const Tensor* find(const std::string& name) const;
};

void save_tensor_archive(const std::string& path, const TensorArchive& archive);
TensorArchive load_tensor_archive(const std::string& path);

}  // namespace ssn4
