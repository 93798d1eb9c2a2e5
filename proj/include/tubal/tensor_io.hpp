#pragma once

#include <string>

#include "tubal/tensor.hpp"

namespace tubal {

// T3R1 binary format: magic "T3R1", three little-endian uint32 dims
// (n1, n2, n3), then n1*n2*n3 little-endian IEEE-754 doubles in
// slice-major, row-major-within-slice order.
void write_tensor(const std::string& path, const Tensor3& t);
Tensor3 read_tensor(const std::string& path);

}  // namespace tubal
