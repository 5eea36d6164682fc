#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "stlncs/rng.hpp"

namespace stlncs {

enum class OutputActivation { Identity, Tanh };

// Dense feed-forward network with rectified-linear hidden layers. Rows of
// all batch matrices are samples. 64-bit floats throughout.
struct Mlp {
  std::vector<Eigen::MatrixXd> weights;  // layer l: (size[l+1] x size[l])
  std::vector<Eigen::VectorXd> biases;
  OutputActivation output_activation = OutputActivation::Identity;

  int input_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.front().cols()); }
  int output_dim() const { return weights.empty() ? 0 : static_cast<int>(weights.back().rows()); }
  int layer_count() const { return static_cast<int>(weights.size()); }
  std::vector<int> layer_sizes() const;
  std::size_t parameter_count() const;
};

// Fan-in-scaled uniform weights, zero biases.
Mlp mlp_init(const std::vector<int>& layer_sizes, OutputActivation output_activation, RngStream& rng);

struct ForwardCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> pre;   // pre-activations per layer
  std::vector<Eigen::MatrixXd> post;  // post-activations per layer
};

// Batched forward pass; fills cache for a later backward pass if given.
Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& input, ForwardCache* cache = nullptr);

struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

MlpGradients zero_gradients(const Mlp& net);

// Exact reverse-mode gradients for the scalar loss whose d(loss)/d(output)
// is output_grad. Parameter gradients go to grads (skipped when null);
// d(loss)/d(input) goes to input_grad when requested. The cache must come
// from a forward pass of the same network.
void mlp_backward(const Mlp& net, const ForwardCache& cache, const Eigen::MatrixXd& output_grad, MlpGradients* grads,
                  Eigen::MatrixXd* input_grad = nullptr);

struct AdamState {
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;
  long step = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState adam_init(const Mlp& net, double lr = 3e-4);

// One bias-corrected Adam update, in place.
void adam_step(Mlp& net, const MlpGradients& grads, AdamState& opt);

// Scalar twin used for the entropy temperature.
struct ScalarAdam {
  double m = 0.0, v = 0.0;
  long step = 0;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

void adam_step_scalar(double& param, double grad, ScalarAdam& opt);

// Flat binary checkpoint (little-endian doubles) with a JSON sidecar at
// path + ".json" describing the header.
void save_mlp(const Mlp& net, const std::string& path);
Mlp load_mlp(const std::string& path);

void save_adam(const AdamState& opt, const std::string& path);
AdamState load_adam(const std::string& path);

bool all_finite(const Mlp& net);

}  // namespace stlncs
