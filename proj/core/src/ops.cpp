#include "mmnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mmnet {

namespace {

std::string axis_mismatch(const char* what, const std::string& got, const std::string& want) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s: got %s, expected %s", what, got.c_str(), want.c_str());
  return buf;
}

}  // namespace

int conv_out_dim(int in, int k, int stride, int pad) {
  int span = in + 2 * pad - k;
  if (span < 0) throw ConfigError("conv2d: kernel larger than padded input");
  return span / stride + 1;
}

ConvParams make_conv(int oc, int ic, int kh, int kw, int stride, int padding, Rng& rng) {
  ConvParams p;
  p.kernel = Tensor::kernel(oc, ic, kh, kw);
  p.bias = Tensor::vec(oc);
  p.stride = stride;
  p.padding = padding;
  // Kaiming-uniform bound: keeps activation variance stable through the
  // ReLU conv stacks (uniform on [-s, s] has variance s^2/3).
  double s = std::sqrt(6.0 / (ic * kh * kw));
  for (int64_t i = 0; i < p.kernel.size(); ++i) p.kernel[i] = rng.uniform(-s, s);
  return p;
}

FeatureMap conv2d(const FeatureMap& input, const ConvParams& params) {
  const Tensor& k = params.kernel;
  if (input.rank() != 3) throw ConfigError("conv2d: input must be rank-3");
  if (k.rank() != 4) throw ConfigError("conv2d: kernel must be rank-4");
  if (k.dim(1) != input.c())
    throw ConfigError(axis_mismatch("conv2d: input channel axis", input.shape_str(), k.shape_str()));
  if (params.bias.rank() != 1 || params.bias.dim(0) != k.dim(0))
    throw ConfigError(axis_mismatch("conv2d: bias axis", params.bias.shape_str(), k.shape_str()));
  if (params.stride < 1) throw ConfigError("conv2d: stride must be >= 1");
  if (params.padding < 0) throw ConfigError("conv2d: padding must be >= 0");

  const int ih = input.h(), iw = input.w(), ic = input.c();
  const int oc = k.dim(0), kh = k.dim(2), kw = k.dim(3);
  const int stride = params.stride, pad = params.padding;
  const int oh = conv_out_dim(ih, kh, stride, pad);
  const int ow = conv_out_dim(iw, kw, stride, pad);

  // Repack kernel as (ky, kx, ic, oc) so the inner accumulation runs over a
  // contiguous out-channel span.
  std::vector<double> kt(static_cast<size_t>(kh) * kw * ic * oc);
  for (int o = 0; o < oc; ++o)
    for (int i = 0; i < ic; ++i)
      for (int ky = 0; ky < kh; ++ky)
        for (int kx = 0; kx < kw; ++kx)
          kt[((static_cast<size_t>(ky) * kw + kx) * ic + i) * oc + o] = k.at4(o, i, ky, kx);

  FeatureMap out = Tensor::map(oh, ow, oc);
  std::vector<double> acc(static_cast<size_t>(oc));
  const double* in = input.data();
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int o = 0; o < oc; ++o) acc[o] = params.bias[o];
      const int y0 = y * stride - pad, x0 = x * stride - pad;
      for (int ky = 0; ky < kh; ++ky) {
        const int yy = y0 + ky;
        if (yy < 0 || yy >= ih) continue;
        for (int kx = 0; kx < kw; ++kx) {
          const int xx = x0 + kx;
          if (xx < 0 || xx >= iw) continue;
          const double* src = in + (static_cast<size_t>(yy) * iw + xx) * ic;
          const double* kk = kt.data() + (static_cast<size_t>(ky) * kw + kx) * ic * oc;
          for (int i = 0; i < ic; ++i) {
            const double v = src[i];
            const double* krow = kk + static_cast<size_t>(i) * oc;
            for (int o = 0; o < oc; ++o) acc[o] += v * krow[o];
          }
        }
      }
      double* dst = out.data() + (static_cast<size_t>(y) * ow + x) * oc;
      std::copy(acc.begin(), acc.end(), dst);
    }
  }
  return out;
}

void conv2d_backward(const FeatureMap& input, const ConvParams& params, const FeatureMap& upstream,
                     FeatureMap* d_input, Tensor* d_kernel, Tensor* d_bias) {
  const Tensor& k = params.kernel;
  const int ih = input.h(), iw = input.w(), ic = input.c();
  const int oc = k.dim(0), kh = k.dim(2), kw = k.dim(3);
  const int stride = params.stride, pad = params.padding;
  const int oh = upstream.h(), ow = upstream.w();

  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      const double* up = upstream.data() + (static_cast<size_t>(y) * ow + x) * oc;
      if (d_bias) {
        for (int o = 0; o < oc; ++o) (*d_bias)[o] += up[o];
      }
      const int y0 = y * stride - pad, x0 = x * stride - pad;
      for (int ky = 0; ky < kh; ++ky) {
        const int yy = y0 + ky;
        if (yy < 0 || yy >= ih) continue;
        for (int kx = 0; kx < kw; ++kx) {
          const int xx = x0 + kx;
          if (xx < 0 || xx >= iw) continue;
          const double* src = input.data() + (static_cast<size_t>(yy) * iw + xx) * ic;
          double* din = d_input ? d_input->data() + (static_cast<size_t>(yy) * iw + xx) * ic : nullptr;
          for (int o = 0; o < oc; ++o) {
            const double g = up[o];
            if (g == 0.0) continue;
            for (int i = 0; i < ic; ++i) {
              if (d_kernel) d_kernel->at4(o, i, ky, kx) += g * src[i];
              if (din) din[i] += g * k.at4(o, i, ky, kx);
            }
          }
        }
      }
    }
  }
}

FeatureMap dense_map(const FeatureMap& input, const Tensor& weights, const Tensor& bias) {
  if (weights.rank() != 2) throw ConfigError("dense: weights must be rank-2");
  if (weights.dim(1) != input.c())
    throw ConfigError(axis_mismatch("dense: input channel axis", input.shape_str(), weights.shape_str()));
  const int out_c = weights.dim(0), in_c = weights.dim(1);
  if (bias.dim(0) != out_c) throw ConfigError("dense: bias size mismatch");
  FeatureMap out = Tensor::map(input.h(), input.w(), out_c);
  const int positions = input.h() * input.w();
  for (int p = 0; p < positions; ++p) {
    const double* src = input.data() + static_cast<size_t>(p) * in_c;
    double* dst = out.data() + static_cast<size_t>(p) * out_c;
    for (int o = 0; o < out_c; ++o) {
      double acc = bias[o];
      const double* wr = weights.data() + static_cast<size_t>(o) * in_c;
      for (int i = 0; i < in_c; ++i) acc += wr[i] * src[i];
      dst[o] = acc;
    }
  }
  return out;
}

void dense_map_backward(const FeatureMap& input, const Tensor& weights, const FeatureMap& upstream,
                        FeatureMap* d_input, Tensor* d_weights, Tensor* d_bias) {
  const int out_c = weights.dim(0), in_c = weights.dim(1);
  const int positions = input.h() * input.w();
  for (int p = 0; p < positions; ++p) {
    const double* src = input.data() + static_cast<size_t>(p) * in_c;
    const double* up = upstream.data() + static_cast<size_t>(p) * out_c;
    double* din = d_input ? d_input->data() + static_cast<size_t>(p) * in_c : nullptr;
    for (int o = 0; o < out_c; ++o) {
      const double g = up[o];
      if (d_bias) (*d_bias)[o] += g;
      if (g == 0.0) continue;
      const double* wr = weights.data() + static_cast<size_t>(o) * in_c;
      double* dwr = d_weights ? d_weights->data() + static_cast<size_t>(o) * in_c : nullptr;
      for (int i = 0; i < in_c; ++i) {
        if (dwr) dwr[i] += g * src[i];
        if (din) din[i] += g * wr[i];
      }
    }
  }
}

FeatureMap relu(const FeatureMap& x) {
  FeatureMap out = x;
  for (int64_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
  return out;
}

FeatureMap relu_backward(const FeatureMap& x, const FeatureMap& upstream) {
  FeatureMap d = upstream;
  for (int64_t i = 0; i < d.size(); ++i)
    if (x[i] <= 0.0) d[i] = 0.0;
  return d;
}

FeatureMap sigmoid(const FeatureMap& x) {
  FeatureMap out = x;
  for (int64_t i = 0; i < out.size(); ++i) {
    double z = out[i];
    out[i] = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  }
  return out;
}

FeatureMap sigmoid_backward(const FeatureMap& y, const FeatureMap& upstream) {
  FeatureMap d = upstream;
  for (int64_t i = 0; i < d.size(); ++i) d[i] *= y[i] * (1.0 - y[i]);
  return d;
}

std::vector<double> softmax(const std::vector<double>& values) {
  if (values.empty()) throw UsageError("softmax: empty input");
  double mx = *std::max_element(values.begin(), values.end());
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    out[i] = std::exp(values[i] - mx);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

FeatureMap softmax_channels(const FeatureMap& x) {
  FeatureMap out = x;
  const int ch = x.c();
  const int positions = x.h() * x.w();
  for (int p = 0; p < positions; ++p) {
    double* row = out.data() + static_cast<size_t>(p) * ch;
    double mx = row[0];
    for (int i = 1; i < ch; ++i) mx = std::max(mx, row[i]);
    double sum = 0.0;
    for (int i = 0; i < ch; ++i) {
      row[i] = std::exp(row[i] - mx);
      sum += row[i];
    }
    for (int i = 0; i < ch; ++i) row[i] /= sum;
  }
  return out;
}

FeatureMap softmax_channels_backward(const FeatureMap& y, const FeatureMap& upstream) {
  FeatureMap d = upstream;
  const int ch = y.c();
  const int positions = y.h() * y.w();
  for (int p = 0; p < positions; ++p) {
    const double* yr = y.data() + static_cast<size_t>(p) * ch;
    double* dr = d.data() + static_cast<size_t>(p) * ch;
    double dot = 0.0;
    for (int i = 0; i < ch; ++i) dot += dr[i] * yr[i];
    for (int i = 0; i < ch; ++i) dr[i] = yr[i] * (dr[i] - dot);
  }
  return d;
}

std::vector<double> mlp_forward(const std::vector<double>& input, const MlpParams& mlp) {
  std::vector<double> cur = input;
  for (const DenseLayer& layer : mlp.layers) {
    const int out_n = layer.weights.dim(0), in_n = layer.weights.dim(1);
    if (static_cast<int>(cur.size()) != in_n)
      throw ConfigError(axis_mismatch("mlp: layer input size", std::to_string(cur.size()),
                                      layer.weights.shape_str()));
    std::vector<double> next(static_cast<size_t>(out_n));
    for (int o = 0; o < out_n; ++o) {
      double acc = layer.bias[o];
      for (int i = 0; i < in_n; ++i) acc += layer.weights.at2(o, i) * cur[i];
      switch (layer.act) {
        case Activation::kIdentity: break;
        case Activation::kRelu: acc = acc > 0.0 ? acc : 0.0; break;
        case Activation::kSigmoid: acc = 1.0 / (1.0 + std::exp(-acc)); break;
      }
      next[static_cast<size_t>(o)] = acc;
    }
    cur = std::move(next);
  }
  return cur;
}

FeatureMap add(const FeatureMap& a, const FeatureMap& b) {
  if (!a.same_shape(b)) throw UsageError("add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  FeatureMap out = a;
  for (int64_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

FeatureMap mul(const FeatureMap& a, const FeatureMap& b) {
  if (!a.same_shape(b)) throw UsageError("mul: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  FeatureMap out = a;
  for (int64_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

FeatureMap scale(const FeatureMap& a, double s) {
  FeatureMap out = a;
  for (int64_t i = 0; i < out.size(); ++i) out[i] *= s;
  return out;
}

FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b) {
  if (a.h() != b.h() || a.w() != b.w())
    throw UsageError("concat: spatial mismatch " + a.shape_str() + " vs " + b.shape_str());
  FeatureMap out = Tensor::map(a.h(), a.w(), a.c() + b.c());
  const int positions = a.h() * a.w();
  for (int p = 0; p < positions; ++p) {
    double* dst = out.data() + static_cast<size_t>(p) * out.c();
    const double* pa = a.data() + static_cast<size_t>(p) * a.c();
    const double* pb = b.data() + static_cast<size_t>(p) * b.c();
    std::copy(pa, pa + a.c(), dst);
    std::copy(pb, pb + b.c(), dst + a.c());
  }
  return out;
}

FeatureMap channel_sum(const FeatureMap& x) {
  FeatureMap out = Tensor::map(x.h(), x.w(), 1);
  const int ch = x.c();
  const int positions = x.h() * x.w();
  for (int p = 0; p < positions; ++p) {
    const double* src = x.data() + static_cast<size_t>(p) * ch;
    double acc = 0.0;
    for (int i = 0; i < ch; ++i) acc += src[i];
    out[p] = acc;
  }
  return out;
}

FeatureMap avg_pool(const FeatureMap& x, int k) {
  if (k < 1) throw ConfigError("avg_pool: kernel must be >= 1");
  if (x.h() % k != 0 || x.w() % k != 0)
    throw ConfigError("avg_pool: dims " + x.shape_str() + " not divisible by " + std::to_string(k));
  const int oh = x.h() / k, ow = x.w() / k, ch = x.c();
  FeatureMap out = Tensor::map(oh, ow, ch);
  const double inv = 1.0 / (k * k);
  for (int y = 0; y < oh; ++y)
    for (int x2 = 0; x2 < ow; ++x2)
      for (int dy = 0; dy < k; ++dy)
        for (int dx = 0; dx < k; ++dx) {
          const double* src = x.data() + (static_cast<size_t>(y * k + dy) * x.w() + (x2 * k + dx)) * ch;
          double* dst = out.data() + (static_cast<size_t>(y) * ow + x2) * ch;
          for (int i = 0; i < ch; ++i) dst[i] += src[i] * inv;
        }
  return out;
}

FeatureMap avg_pool_backward(const FeatureMap& x, int k, const FeatureMap& upstream) {
  FeatureMap d = Tensor::map(x.h(), x.w(), x.c());
  const int oh = upstream.h(), ow = upstream.w(), ch = x.c();
  const double inv = 1.0 / (k * k);
  for (int y = 0; y < oh; ++y)
    for (int x2 = 0; x2 < ow; ++x2)
      for (int dy = 0; dy < k; ++dy)
        for (int dx = 0; dx < k; ++dx) {
          const double* up = upstream.data() + (static_cast<size_t>(y) * ow + x2) * ch;
          double* dst = d.data() + (static_cast<size_t>(y * k + dy) * x.w() + (x2 * k + dx)) * ch;
          for (int i = 0; i < ch; ++i) dst[i] += up[i] * inv;
        }
  return d;
}

}  // namespace mmnet
