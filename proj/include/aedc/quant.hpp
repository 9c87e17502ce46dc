#pragma once

#include <cstdint>
#include <vector>

#include "aedc/matrix.hpp"

namespace aedc {

// Frozen n-bit representation of a tensor: packed codes plus the
// full-precision scale alpha and offset beta. Dequantized value of code k
// is alpha * k / (2^n - 1) + beta.
struct QuantizedTensor {
  std::vector<std::uint8_t> packed;
  int n_bits = 8;
  double alpha = 1.0;
  double beta = 0.0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

// Min/max affine quantization. alpha = max - min, beta = min; codes are
// round-half-away-from-zero of (v - beta) / alpha * (2^n - 1). A constant
// tensor (alpha = 0) stores alpha = 1 with all-zero codes so dequantization
// returns beta exactly.
QuantizedTensor quantize(const Matrix& v, int n_bits);

Matrix dequantize(const QuantizedTensor& q);

// Quantize-dequantize round trip Q_n(v). Idempotent: applying it twice gives
// bit-identical output.
Matrix fake_quant(const Matrix& v, int n_bits);

// Straight-through estimator: the gradient w.r.t. the full-precision tensor
// is the upstream gradient w.r.t. its quantized surrogate, unchanged.
inline Matrix ste_backward(const Matrix& upstream_grad) { return upstream_grad; }

// Per-clip dynamic fake quantization of a feature matrix.
Matrix quantize_inputs(const Matrix& features, int n_bits);

// Code packing. n_bits <= 8 packs a little-endian bitstream (low bits of a
// byte filled first, so 4-bit codes go low nibble first); 9..16 bits use two
// bytes per code, little-endian. Trailing bits are zero-padded.
std::vector<std::uint8_t> pack_codes(const std::vector<std::uint32_t>& codes, int n_bits);
std::vector<std::uint32_t> unpack_codes(const std::vector<std::uint8_t>& bytes,
                                        std::size_t count, int n_bits);

std::size_t packed_byte_count(std::size_t element_count, int n_bits);

}  // namespace aedc
