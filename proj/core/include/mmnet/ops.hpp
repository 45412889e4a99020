#pragma once

#include <vector>

#include "mmnet/rng.hpp"
#include "mmnet/tensor.hpp"

namespace mmnet {

// Convolution configuration: cross-correlation (no kernel flip) with zero
// padding.  Output dims = floor((in + 2*pad - k) / stride) + 1 per axis.
struct ConvParams {
  Tensor kernel;  // (out_ch, in_ch, kh, kw)
  Tensor bias;    // (out_ch)
  int stride = 1;
  int padding = 0;
};

ConvParams make_conv(int oc, int ic, int kh, int kw, int stride, int padding, Rng& rng);

int conv_out_dim(int in, int k, int stride, int pad);

// Forward kernels.  All are pure; inputs are untouched.
FeatureMap conv2d(const FeatureMap& input, const ConvParams& params);
FeatureMap dense_map(const FeatureMap& input, const Tensor& weights, const Tensor& bias);
FeatureMap relu(const FeatureMap& x);
FeatureMap sigmoid(const FeatureMap& x);
FeatureMap softmax_channels(const FeatureMap& x);
FeatureMap add(const FeatureMap& a, const FeatureMap& b);
FeatureMap mul(const FeatureMap& a, const FeatureMap& b);
FeatureMap scale(const FeatureMap& a, double s);
FeatureMap concat_channels(const FeatureMap& a, const FeatureMap& b);
FeatureMap channel_sum(const FeatureMap& x);
FeatureMap avg_pool(const FeatureMap& x, int k);  // kernel = stride = k

// Vector softmax with max-subtraction stabilization.
std::vector<double> softmax(const std::vector<double>& values);

// Position-shared MLP applied to a plain vector.
enum class Activation { kIdentity, kRelu, kSigmoid };
struct DenseLayer {
  Tensor weights;  // (out, in)
  Tensor bias;     // (out)
  Activation act = Activation::kIdentity;
};
struct MlpParams {
  std::vector<DenseLayer> layers;
};
std::vector<double> mlp_forward(const std::vector<double>& input, const MlpParams& mlp);

// Backward kernels (adjoints for fixed shapes).
void conv2d_backward(const FeatureMap& input, const ConvParams& params, const FeatureMap& upstream,
                     FeatureMap* d_input, Tensor* d_kernel, Tensor* d_bias);
void dense_map_backward(const FeatureMap& input, const Tensor& weights, const FeatureMap& upstream,
                        FeatureMap* d_input, Tensor* d_weights, Tensor* d_bias);
FeatureMap relu_backward(const FeatureMap& x, const FeatureMap& upstream);
FeatureMap sigmoid_backward(const FeatureMap& y /* forward output */, const FeatureMap& upstream);
FeatureMap softmax_channels_backward(const FeatureMap& y, const FeatureMap& upstream);
FeatureMap avg_pool_backward(const FeatureMap& x, int k, const FeatureMap& upstream);

}  // namespace mmnet
