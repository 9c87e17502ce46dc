#include "aedc/lstm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "aedc/quant.hpp"
#include "aedc/rng.hpp"

namespace aedc {

namespace {

constexpr double kProbClamp = 1e-12;

inline double sigmoid(double x) {
  if (x >= 0.0) {
    const double z = std::exp(-x);
    return 1.0 / (1.0 + z);
  }
  const double z = std::exp(x);
  return z / (1.0 + z);
}

// Resolves a tensor to the values the forward pass actually uses: the
// master matrix, or its fake-quantized copy when marked.
struct EffTensor {
  const Matrix* master = nullptr;
  Matrix quantized;
  bool is_quantized = false;

  const Matrix& get() const { return is_quantized ? quantized : *master; }
};

EffTensor make_effective(const TensorParam& p) {
  EffTensor e;
  e.master = &p.value;
  if (p.n_bits > 0 && !p.value.empty()) {
    e.quantized = fake_quant(p.value, p.n_bits);
    e.is_quantized = true;
  }
  return e;
}

struct EffLayer {
  EffTensor w_x, w_h, z_x, v_x, z_h, v_r;
};

std::vector<EffLayer> effective_layers(const LstmModel& m) {
  std::vector<EffLayer> eff(m.layers.size());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const LstmLayer& L = m.layers[l];
    if (L.state == WeightState::kFull) {
      eff[l].w_x = make_effective(L.w_x);
      eff[l].w_h = make_effective(L.w_h);
    } else {
      eff[l].z_x = make_effective(L.z_x);
      eff[l].z_h = make_effective(L.z_h);
      eff[l].v_r = make_effective(L.v_r);
      if (l == 0) eff[l].v_x = make_effective(L.v_x);
    }
  }
  return eff;
}

// Parameter layout: one index per tensor in canonical order. Gradients and
// optimizer state use the same indices.
struct ParamLayout {
  struct LayerSlots {
    int w_x = -1, w_h = -1, z_x = -1, v_x = -1, z_h = -1, v_r = -1, bias = -1;
  };
  std::vector<LayerSlots> layers;
  int head_w = -1, head_b = -1;
  int count = 0;
};

ParamLayout param_layout(const LstmModel& m) {
  ParamLayout lay;
  lay.layers.resize(m.layers.size());
  int idx = 0;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    auto& s = lay.layers[l];
    if (m.layers[l].state == WeightState::kFull) {
      s.w_x = idx++;
      s.w_h = idx++;
    } else {
      s.z_x = idx++;
      if (l == 0) s.v_x = idx++;
      s.z_h = idx++;
      s.v_r = idx++;
    }
    s.bias = idx++;
  }
  lay.head_w = idx++;
  lay.head_b = idx++;
  lay.count = idx;
  return lay;
}

void check_layer_dims(const LstmModel& m) {
  if (m.layers.empty()) throw std::invalid_argument("model has no layers");
  if (m.hidden == 0 || m.input == 0 || m.classes == 0)
    throw std::invalid_argument("model dims must be positive");
}

Matrix broadcast_rows(const Matrix& row, std::size_t n) {
  Matrix out(n, row.cols);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < row.cols; ++j) out(i, j) = row(0, j);
  return out;
}

void colsum_into(Matrix& acc, const Matrix& a) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* r = a.row(i);
    double* out = acc.row(0);
    for (std::size_t j = 0; j < a.cols; ++j) out[j] += r[j];
  }
}

}  // namespace

LstmModel make_lstm(std::size_t layer_count, std::size_t hidden, std::size_t input,
                    std::size_t classes, double dropout, std::uint64_t seed) {
  if (layer_count == 0 || hidden == 0 || input == 0 || classes == 0)
    throw std::invalid_argument("make_lstm: dims must be positive");
  if (dropout < 0.0 || dropout >= 1.0)
    throw std::invalid_argument("make_lstm: dropout must be in [0, 1)");

  Rng rng(seed);
  auto init = [&rng](std::size_t r, std::size_t c, std::size_t fan_in) {
    const double k = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Matrix m(r, c);
    for (double& v : m.data) v = rng.uniform(-k, k);
    return m;
  };

  LstmModel m;
  m.hidden = hidden;
  m.input = input;
  m.classes = classes;
  m.dropout = dropout;
  m.layers.resize(layer_count);
  for (std::size_t l = 0; l < layer_count; ++l) {
    const std::size_t d_in = (l == 0) ? input : hidden;
    LstmLayer& L = m.layers[l];
    L.state = WeightState::kFull;
    L.w_x.value = init(4 * hidden, d_in, d_in);
    L.w_h.value = init(4 * hidden, hidden, hidden);
    L.bias.value = Matrix(1, 4 * hidden, 0.0);
    for (std::size_t j = hidden; j < 2 * hidden; ++j) L.bias.value(0, j) = 1.0;
  }
  m.head_w.value = init(classes, hidden, hidden);
  m.head_b.value = Matrix(1, classes, 0.0);
  return m;
}

std::vector<ParamRef> trainable_params(LstmModel& m) {
  std::vector<ParamRef> out;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    LstmLayer& L = m.layers[l];
    const std::string p = "layer" + std::to_string(l) + ".";
    if (L.state == WeightState::kFull) {
      out.push_back({p + "w_x", &L.w_x});
      out.push_back({p + "w_h", &L.w_h});
    } else {
      out.push_back({p + "z_x", &L.z_x});
      if (l == 0) out.push_back({p + "v_x", &L.v_x});
      out.push_back({p + "z_h", &L.z_h});
      out.push_back({p + "v_r", &L.v_r});
    }
    out.push_back({p + "bias", &L.bias});
  }
  out.push_back({"head.w", &m.head_w});
  out.push_back({"head.b", &m.head_b});
  return out;
}

std::vector<std::string> param_names(const LstmModel& m) {
  std::vector<std::string> names;
  auto refs = trainable_params(const_cast<LstmModel&>(m));
  names.reserve(refs.size());
  for (const auto& r : refs) names.push_back(r.name);
  return names;
}

ParamCount param_count(const LstmModel& m) {
  ParamCount pc;
  auto refs = trainable_params(const_cast<LstmModel&>(m));
  for (const auto& r : refs) {
    pc.per_tensor.emplace_back(r.name, r.param->value.size());
    pc.total += r.param->value.size();
  }
  return pc;
}

bool has_quantized_tensors(const LstmModel& m) {
  if (m.input_bits > 0) return true;
  auto refs = trainable_params(const_cast<LstmModel&>(m));
  for (const auto& r : refs)
    if (r.param->n_bits > 0) return true;
  return false;
}

Matrix forward_batch(const LstmModel& m, const std::vector<const Matrix*>& features,
                     const ForwardMode& mode, ForwardTrace* trace) {
  check_layer_dims(m);
  const std::size_t B = features.size();
  if (B == 0) throw std::invalid_argument("forward: empty batch");
  const std::size_t T = features[0]->rows;
  if (T == 0) throw std::invalid_argument("forward: empty sequence");
  for (const Matrix* f : features) {
    if (f->rows != T)
      throw std::invalid_argument("forward: unequal sequence lengths in batch");
    if (f->cols != m.input)
      throw std::invalid_argument("forward: feature dim " + std::to_string(f->cols) +
                                  " does not match model input dim " +
                                  std::to_string(m.input));
    for (double v : f->data)
      if (!std::isfinite(v)) throw std::invalid_argument("forward: non-finite feature");
  }
  if (mode.train && mode.seeds.size() != B)
    throw std::invalid_argument("forward: train mode needs one seed per sequence");

  const std::size_t H = m.hidden;
  const std::size_t L = m.layers.size();

  std::vector<Matrix> feat_q;
  if (m.input_bits > 0) {
    feat_q.reserve(B);
    for (const Matrix* f : features) feat_q.push_back(quantize_inputs(*f, m.input_bits));
  }
  auto feat_row = [&](std::size_t b, std::size_t t) {
    return m.input_bits > 0 ? feat_q[b].row(t) : features[b]->row(t);
  };

  const std::vector<EffLayer> eff = effective_layers(m);

  std::vector<Rng> rngs;
  const bool use_dropout = mode.train && m.dropout > 0.0 && L > 1;
  if (mode.train)
    for (std::uint64_t s : mode.seeds) rngs.emplace_back(s);

  if (trace) {
    *trace = ForwardTrace{};
    trace->train = mode.train;
    trace->batch = B;
    trace->steps = T;
    trace->hidden = H;
    trace->input = m.input;
    trace->classes = m.classes;
    trace->layers.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
      trace->layer_states.push_back(m.layers[l].state);
      const bool fact = m.layers[l].state == WeightState::kFactorized;
      trace->layer_ranks.push_back(fact ? m.layers[l].v_r.value.cols : 0);
      trace->layer_in_ranks.push_back(fact ? m.layers[l].z_x.value.cols : 0);
      trace->layers[l].steps.resize(T);
    }
  }

  std::vector<Matrix> h_prev(L, Matrix(B, H, 0.0));
  std::vector<Matrix> c_prev(L, Matrix(B, H, 0.0));

  Matrix x(B, m.input);
  const double keep = 1.0 - m.dropout;

  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t b = 0; b < B; ++b) {
      const double* src = feat_row(b, t);
      double* dst = x.row(b);
      for (std::size_t j = 0; j < m.input; ++j) dst[j] = src[j];
    }

    for (std::size_t l = 0; l < L; ++l) {
      const LstmLayer& layer = m.layers[l];
      const EffLayer& E = eff[l];

      Matrix a = broadcast_rows(layer.bias.value, B);
      Matrix px, ph;
      if (layer.state == WeightState::kFull) {
        add_matmul_nt(a, x, E.w_x.get());
        add_matmul_nt(a, h_prev[l], E.w_h.get());
      } else {
        const Matrix& basis = (l == 0) ? E.v_x.get() : eff[l - 1].v_r.get();
        px = matmul(x, basis);
        add_matmul_nt(a, px, E.z_x.get());
        ph = matmul(h_prev[l], E.v_r.get());
        add_matmul_nt(a, ph, E.z_h.get());
      }

      Matrix gi(B, H), gf(B, H), gg(B, H), go(B, H);
      Matrix c(B, H), tc(B, H), h(B, H);
      for (std::size_t b = 0; b < B; ++b) {
        const double* ar = a.row(b);
        const double* cp = c_prev[l].row(b);
        double* ir = gi.row(b);
        double* fr = gf.row(b);
        double* gr = gg.row(b);
        double* orr = go.row(b);
        double* cr = c.row(b);
        double* tr = tc.row(b);
        double* hr = h.row(b);
        for (std::size_t j = 0; j < H; ++j) {
          const double iv = sigmoid(ar[j]);
          const double fv = sigmoid(ar[H + j]);
          const double gv = std::tanh(ar[2 * H + j]);
          const double ov = sigmoid(ar[3 * H + j]);
          const double cv = fv * cp[j] + iv * gv;
          const double tv = std::tanh(cv);
          ir[j] = iv;
          fr[j] = fv;
          gr[j] = gv;
          orr[j] = ov;
          cr[j] = cv;
          tr[j] = tv;
          hr[j] = ov * tv;
        }
      }

      Matrix drop;
      Matrix next_x;
      if (l + 1 < L) {
        if (use_dropout) {
          drop = Matrix(B, H);
          next_x = Matrix(B, H);
          for (std::size_t b = 0; b < B; ++b) {
            double* dr = drop.row(b);
            const double* hr = h.row(b);
            double* nx = next_x.row(b);
            for (std::size_t j = 0; j < H; ++j) {
              dr[j] = (rngs[b].uniform() < m.dropout) ? 0.0 : 1.0 / keep;
              nx[j] = hr[j] * dr[j];
            }
          }
        } else {
          next_x = h;
        }
      }

      if (trace) {
        StepCache& sc = trace->layers[l].steps[t];
        sc.x = x;
        sc.px = px;
        sc.ph = ph;
        sc.i = gi;
        sc.f = gf;
        sc.g = gg;
        sc.o = go;
        sc.c = c;
        sc.tanh_c = tc;
        sc.h = h;
        sc.drop = drop;
      }

      h_prev[l] = std::move(h);
      c_prev[l] = std::move(c);
      if (l + 1 < L) x = std::move(next_x);
    }
  }

  Matrix logits = broadcast_rows(m.head_b.value, B);
  add_matmul_nt(logits, h_prev[L - 1], m.head_w.value);
  Matrix probs(B, m.classes);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    double p = sigmoid(logits.data[i]);
    if (p < kProbClamp) p = kProbClamp;
    if (p > 1.0 - kProbClamp) p = 1.0 - kProbClamp;
    probs.data[i] = p;
  }
  if (trace) trace->probs = probs;
  return probs;
}

Vector forward(const LstmModel& m, const Matrix& features, const ForwardMode& mode,
               ForwardTrace* trace) {
  ForwardMode single = mode;
  if (mode.train && single.seeds.empty()) single.seeds = {0};
  Matrix probs = forward_batch(m, {&features}, single, trace);
  return Vector(probs.data.begin(), probs.data.end());
}

Gradients backward_batch(const LstmModel& m, const ForwardTrace& trace,
                         const Matrix& grad_probs) {
  check_layer_dims(m);
  const std::size_t B = trace.batch;
  const std::size_t T = trace.steps;
  const std::size_t H = m.hidden;
  const std::size_t L = m.layers.size();

  if (!trace.train)
    throw std::invalid_argument("backward: trace was not produced in train mode");
  if (B == 0 || T == 0) throw std::invalid_argument("backward: empty trace");
  if (trace.hidden != H || trace.input != m.input || trace.classes != m.classes ||
      trace.layer_states.size() != L)
    throw std::invalid_argument("backward: trace does not match model architecture");
  for (std::size_t l = 0; l < L; ++l) {
    const bool fact = m.layers[l].state == WeightState::kFactorized;
    if (trace.layer_states[l] != m.layers[l].state ||
        trace.layer_ranks[l] != (fact ? m.layers[l].v_r.value.cols : 0) ||
        trace.layer_in_ranks[l] != (fact ? m.layers[l].z_x.value.cols : 0))
      throw std::invalid_argument("backward: trace does not match layer " +
                                  std::to_string(l) + " weight state");
  }
  if (grad_probs.rows != B || grad_probs.cols != m.classes)
    throw std::invalid_argument("backward: grad_probs shape mismatch");

  const ParamLayout lay = param_layout(m);
  Gradients grads;
  grads.tensors.resize(lay.count);
  {
    auto refs = trainable_params(const_cast<LstmModel&>(m));
    for (int i = 0; i < lay.count; ++i)
      grads.tensors[i] =
          Matrix(refs[i].param->value.rows, refs[i].param->value.cols, 0.0);
  }

  const std::vector<EffLayer> eff = effective_layers(m);

  // head: probs = sigmoid(logits), so dlogits = dprobs * p * (1 - p)
  Matrix dz(B, m.classes);
  for (std::size_t i = 0; i < dz.size(); ++i) {
    const double p = trace.probs.data[i];
    dz.data[i] = grad_probs.data[i] * p * (1.0 - p);
  }
  const Matrix& h_top = trace.layers[L - 1].steps[T - 1].h;
  add_matmul_tn(grads.tensors[lay.head_w], dz, h_top);
  colsum_into(grads.tensors[lay.head_b], dz);

  // gradient arriving at each layer's output from above, per timestep
  std::vector<Matrix> d_above(T);
  for (std::size_t t = 0; t < T; ++t) d_above[t] = Matrix(B, H, 0.0);
  add_matmul(d_above[T - 1], dz, m.head_w.value);

  const Matrix zeros_bh(B, H, 0.0);

  for (std::size_t l = L; l-- > 0;) {
    const LstmLayer& layer = m.layers[l];
    const EffLayer& E = eff[l];
    const auto& slots = lay.layers[l];
    const LayerTrace& lt = trace.layers[l];

    Matrix dh_rec(B, H, 0.0);
    Matrix dc_carry(B, H, 0.0);
    std::vector<Matrix> dx_seq;
    if (l > 0) dx_seq.resize(T);

    Matrix da(B, 4 * H);
    for (std::size_t t = T; t-- > 0;) {
      const StepCache& sc = lt.steps[t];
      const Matrix& c_tm1 = (t > 0) ? lt.steps[t - 1].c : zeros_bh;
      const Matrix& h_tm1 = (t > 0) ? lt.steps[t - 1].h : zeros_bh;

      for (std::size_t b = 0; b < B; ++b) {
        const double* dab = d_above[t].row(b);
        const double* dhr = dh_rec.row(b);
        const double* iv = sc.i.row(b);
        const double* fv = sc.f.row(b);
        const double* gv = sc.g.row(b);
        const double* ov = sc.o.row(b);
        const double* tcv = sc.tanh_c.row(b);
        const double* cp = c_tm1.row(b);
        double* dcc = dc_carry.row(b);
        double* dar = da.row(b);
        for (std::size_t j = 0; j < H; ++j) {
          const double dh = dab[j] + dhr[j];
          const double dov = dh * tcv[j];
          const double dc = dh * ov[j] * (1.0 - tcv[j] * tcv[j]) + dcc[j];
          const double div = dc * gv[j];
          const double dgv = dc * iv[j];
          const double dfv = dc * cp[j];
          dar[j] = div * iv[j] * (1.0 - iv[j]);
          dar[H + j] = dfv * fv[j] * (1.0 - fv[j]);
          dar[2 * H + j] = dgv * (1.0 - gv[j] * gv[j]);
          dar[3 * H + j] = dov * ov[j] * (1.0 - ov[j]);
          dcc[j] = dc * fv[j];  // carried to t-1
        }
      }

      colsum_into(grads.tensors[slots.bias], da);

      if (layer.state == WeightState::kFull) {
        add_matmul_tn(grads.tensors[slots.w_x], da, sc.x);
        if (t > 0) add_matmul_tn(grads.tensors[slots.w_h], da, h_tm1);
        if (l > 0) dx_seq[t] = matmul(da, E.w_x.get());
        dh_rec = matmul(da, E.w_h.get());
      } else {
        add_matmul_tn(grads.tensors[slots.z_h], da, sc.ph);
        Matrix dph = matmul(da, E.z_h.get());
        if (t > 0) add_matmul_tn(grads.tensors[slots.v_r], h_tm1, dph);
        dh_rec = matmul_nt(dph, E.v_r.get());

        add_matmul_tn(grads.tensors[slots.z_x], da, sc.px);
        Matrix dpx = matmul(da, E.z_x.get());
        const int basis_slot = (l == 0) ? slots.v_x : lay.layers[l - 1].v_r;
        add_matmul_tn(grads.tensors[basis_slot], sc.x, dpx);
        if (l > 0) {
          const Matrix& basis = eff[l - 1].v_r.get();
          dx_seq[t] = matmul_nt(dpx, basis);
        }
      }
    }

    if (l > 0) {
      // route dx through the dropout applied to layer l-1's output
      for (std::size_t t = 0; t < T; ++t) {
        const Matrix& mask = trace.layers[l - 1].steps[t].drop;
        if (mask.empty()) {
          d_above[t] = std::move(dx_seq[t]);
        } else {
          d_above[t] = std::move(dx_seq[t]);
          for (std::size_t i = 0; i < d_above[t].size(); ++i)
            d_above[t].data[i] *= mask.data[i];
        }
      }
    }
  }

  return grads;
}

Gradients backward(const LstmModel& m, const ForwardTrace& trace,
                   const Vector& grad_probs) {
  Matrix gp(1, grad_probs.size());
  gp.data = grad_probs;
  return backward_batch(m, trace, gp);
}

}  // namespace aedc
