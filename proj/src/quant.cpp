#include "aedc/quant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aedc {

namespace {

void check_bits(int n_bits) {
  if (n_bits < 1 || n_bits > 16)
    throw std::invalid_argument("n_bits must be in [1, 16], got " +
                                std::to_string(n_bits));
}

void check_input(const Matrix& v) {
  if (v.empty()) throw std::invalid_argument("quantize: empty tensor");
  for (double x : v.data)
    if (!std::isfinite(x)) throw std::invalid_argument("quantize: non-finite entry");
}

// Single dequantization expression shared by every path so repeated round
// trips reproduce bit-identical values.
inline double grid_value(double alpha, double beta, std::uint32_t code, double levels) {
  return beta + alpha * (static_cast<double>(code) / levels);
}

inline std::uint32_t encode(double x, double alpha, double beta, double levels,
                            std::uint32_t max_code) {
  const double scaled = (x - beta) / alpha * levels;
  long long k = std::llround(scaled);  // rounds half away from zero
  if (k < 0) k = 0;
  if (k > static_cast<long long>(max_code)) k = max_code;
  return static_cast<std::uint32_t>(k);
}

}  // namespace

std::size_t packed_byte_count(std::size_t element_count, int n_bits) {
  check_bits(n_bits);
  if (n_bits <= 8) return (element_count * static_cast<std::size_t>(n_bits) + 7) / 8;
  return element_count * 2;
}

std::vector<std::uint8_t> pack_codes(const std::vector<std::uint32_t>& codes, int n_bits) {
  check_bits(n_bits);
  std::vector<std::uint8_t> out(packed_byte_count(codes.size(), n_bits), 0);
  if (n_bits <= 8) {
    for (std::size_t i = 0; i < codes.size(); ++i) {
      const std::size_t bit = i * static_cast<std::size_t>(n_bits);
      const std::size_t byte = bit >> 3;
      const unsigned shift = bit & 7;
      const std::uint32_t c = codes[i];
      out[byte] |= static_cast<std::uint8_t>(c << shift);
      if (shift + static_cast<unsigned>(n_bits) > 8)
        out[byte + 1] |= static_cast<std::uint8_t>(c >> (8 - shift));
    }
  } else {
    for (std::size_t i = 0; i < codes.size(); ++i) {
      out[2 * i] = static_cast<std::uint8_t>(codes[i] & 0xff);
      out[2 * i + 1] = static_cast<std::uint8_t>((codes[i] >> 8) & 0xff);
    }
  }
  return out;
}

std::vector<std::uint32_t> unpack_codes(const std::vector<std::uint8_t>& bytes,
                                        std::size_t count, int n_bits) {
  check_bits(n_bits);
  if (bytes.size() < packed_byte_count(count, n_bits))
    throw std::invalid_argument("unpack_codes: byte buffer too short (" +
                                std::to_string(bytes.size()) + " bytes for " +
                                std::to_string(count) + " codes at " +
                                std::to_string(n_bits) + " bits)");
  std::vector<std::uint32_t> codes(count, 0);
  if (n_bits <= 8) {
    const std::uint32_t mask = (1u << n_bits) - 1u;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t bit = i * static_cast<std::size_t>(n_bits);
      const std::size_t byte = bit >> 3;
      const unsigned shift = bit & 7;
      std::uint32_t c = static_cast<std::uint32_t>(bytes[byte]) >> shift;
      if (shift + static_cast<unsigned>(n_bits) > 8)
        c |= static_cast<std::uint32_t>(bytes[byte + 1]) << (8 - shift);
      codes[i] = c & mask;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i)
      codes[i] = static_cast<std::uint32_t>(bytes[2 * i]) |
                 (static_cast<std::uint32_t>(bytes[2 * i + 1]) << 8);
  }
  return codes;
}

QuantizedTensor quantize(const Matrix& v, int n_bits) {
  check_bits(n_bits);
  check_input(v);

  const auto [mn_it, mx_it] = std::minmax_element(v.data.begin(), v.data.end());
  double beta = *mn_it;
  double alpha = *mx_it - beta;

  const std::uint32_t max_code = (1u << n_bits) - 1u;
  const double levels = static_cast<double>(max_code);

  std::vector<std::uint32_t> codes(v.size(), 0);
  if (alpha == 0.0) {
    alpha = 1.0;  // constant-tensor guard: dequantization returns beta exactly
  } else {
    for (std::size_t i = 0; i < v.size(); ++i)
      codes[i] = encode(v.data[i], alpha, beta, levels, max_code);
  }

  QuantizedTensor q;
  q.packed = pack_codes(codes, n_bits);
  q.n_bits = n_bits;
  q.alpha = alpha;
  q.beta = beta;
  q.rows = v.rows;
  q.cols = v.cols;
  return q;
}

Matrix dequantize(const QuantizedTensor& q) {
  const std::size_t count = q.rows * q.cols;
  const std::vector<std::uint32_t> codes = unpack_codes(q.packed, count, q.n_bits);
  const double levels = static_cast<double>((1u << q.n_bits) - 1u);
  Matrix v(q.rows, q.cols);
  for (std::size_t i = 0; i < count; ++i)
    v.data[i] = grid_value(q.alpha, q.beta, codes[i], levels);
  return v;
}

Matrix fake_quant(const Matrix& v, int n_bits) {
  check_bits(n_bits);
  check_input(v);

  const auto [mn_it, mx_it] = std::minmax_element(v.data.begin(), v.data.end());
  const double beta = *mn_it;
  const double alpha = *mx_it - beta;
  if (alpha == 0.0) return v;

  const std::uint32_t max_code = (1u << n_bits) - 1u;
  const double levels = static_cast<double>(max_code);
  Matrix out(v.rows, v.cols);
  for (std::size_t i = 0; i < v.size(); ++i)
    out.data[i] =
        grid_value(alpha, beta, encode(v.data[i], alpha, beta, levels, max_code), levels);
  return out;
}

Matrix quantize_inputs(const Matrix& features, int n_bits) {
  return fake_quant(features, n_bits);
}

}  // namespace aedc
