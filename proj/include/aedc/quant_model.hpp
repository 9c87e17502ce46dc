#pragma once

#include <string>
#include <vector>

#include "aedc/lstm.hpp"

namespace aedc {

// Weight-matrix roles for the current model state: {"w_x","w_h"} for a full
// model, {"z_h","z_x","v_r","v_x"} for a factorized one. Biases and the
// classifier head are never quantized.
std::vector<std::string> default_quant_targets(const LstmModel& m);

// Marks each targeted weight matrix for n-bit quantization and turns on
// per-clip input quantization at the same width. targets empty = defaults
// for the model's state; an unknown role name is an error. n_bits == 32 is
// the full-precision passthrough sentinel: the model is returned unchanged.
LstmModel quantize_model(const LstmModel& m, int n_bits,
                         const std::vector<std::string>& targets = {});

}  // namespace aedc
