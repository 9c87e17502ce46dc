#include "aedc/quant_model.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace aedc {

namespace {

const std::set<std::string> kFullRoles = {"w_x", "w_h"};
const std::set<std::string> kFactorizedRoles = {"z_h", "z_x", "v_r", "v_x"};

}  // namespace

std::vector<std::string> default_quant_targets(const LstmModel& m) {
  bool any_factorized = false;
  for (const auto& l : m.layers)
    if (l.state == WeightState::kFactorized) any_factorized = true;
  if (any_factorized) return {"z_h", "z_x", "v_r", "v_x"};
  return {"w_x", "w_h"};
}

LstmModel quantize_model(const LstmModel& m, int n_bits,
                         const std::vector<std::string>& targets) {
  if (n_bits == 32) return m;  // full-precision passthrough
  if (n_bits < 1 || n_bits > 16)
    throw std::invalid_argument("quantize_model: n_bits must be 1..16 or the 32 sentinel");

  std::vector<std::string> roles = targets.empty() ? default_quant_targets(m) : targets;
  for (const auto& r : roles) {
    if (kFullRoles.count(r) == 0 && kFactorizedRoles.count(r) == 0)
      throw std::invalid_argument("quantize_model: unknown target role '" + r + "'");
  }
  auto wants = [&roles](const char* role) {
    return std::find(roles.begin(), roles.end(), role) != roles.end();
  };

  LstmModel out = m;
  for (std::size_t l = 0; l < out.layers.size(); ++l) {
    LstmLayer& L = out.layers[l];
    if (L.state == WeightState::kFull) {
      if (wants("w_x")) L.w_x.n_bits = n_bits;
      if (wants("w_h")) L.w_h.n_bits = n_bits;
    } else {
      if (wants("z_h")) L.z_h.n_bits = n_bits;
      if (wants("z_x")) L.z_x.n_bits = n_bits;
      if (wants("v_r")) L.v_r.n_bits = n_bits;
      if (l == 0 && wants("v_x")) L.v_x.n_bits = n_bits;
    }
  }
  out.input_bits = n_bits;
  return out;
}

}  // namespace aedc
