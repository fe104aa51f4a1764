#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace cardioemu {

enum class Activation { kTanh, kLinear };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// Fully-connected feedforward net: hidden_layers blocks of neurons_per_layer
// units with the hidden activation, then a linear output layer.
struct AnnArchitecture {
  int input_dim = 1;
  int hidden_layers = 1;
  int neurons_per_layer = 1;
  int output_dim = 1;
  Activation hidden_activation = Activation::kTanh;
  Activation output_activation = Activation::kLinear;

  // Affine layers including the output layer.
  int num_layers() const { return hidden_layers + 1; }
  int layer_input(int layer) const { return layer == 0 ? input_dim : neurons_per_layer; }
  int layer_output(int layer) const { return layer == num_layers() - 1 ? output_dim : neurons_per_layer; }

  void validate() const;
  bool operator==(const AnnArchitecture&) const = default;
};

// Total trainable parameter count: sum over layers of (fan_in + 1) * fan_out.
std::int64_t count_params(const AnnArchitecture& arch);

// Per-layer weight matrices (fan_out x fan_in) and bias vectors. The flat
// order is layer-major, each weight matrix row-major, biases after the
// layer's weights; flatten/unflatten round-trip bit-exactly.
struct AnnWeights {
  AnnArchitecture arch;
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;

  static AnnWeights zeros(const AnnArchitecture& arch);

  Eigen::VectorXd flatten() const;
  void set_flat(const Eigen::Ref<const Eigen::VectorXd>& flat);
  static AnnWeights from_flat(const AnnArchitecture& arch,
                              const Eigen::Ref<const Eigen::VectorXd>& flat);

  double squared_norm() const;
};

// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out)) per layer) with
// all biases exactly zero; deterministic in the seed.
AnnWeights init_glorot(const AnnArchitecture& arch, std::uint64_t seed);

// Reusable per-thread scratch for forward/vjp so hot loops do not allocate.
struct AnnWorkspace {
  std::vector<Eigen::VectorXd> act;    // activations, act[0] = input
  std::vector<Eigen::VectorXd> delta;  // backward cotangents per layer
};

Eigen::VectorXd forward(const AnnWeights& weights, const Eigen::Ref<const Eigen::VectorXd>& input);

void forward(const AnnWeights& weights, const Eigen::Ref<const Eigen::VectorXd>& input,
             AnnWorkspace& ws, Eigen::VectorXd& output);

struct VjpResult {
  Eigen::VectorXd grad_input;
  Eigen::VectorXd grad_weights;
};

// cotangent^T times the Jacobians of the output with respect to the input and
// to the flattened weights, matrix-free.
VjpResult vjp(const AnnWeights& weights, const Eigen::Ref<const Eigen::VectorXd>& input,
              const Eigen::Ref<const Eigen::VectorXd>& cotangent);

// Workspace form used by the integrator sweeps. grad_input is overwritten.
// When grad_weights_accum is non-null it receives += weight_scale * vjp_w,
// which lets backprop-through-time accumulate dt-weighted contributions
// without a temporary per step.
void vjp(const AnnWeights& weights, const Eigen::Ref<const Eigen::VectorXd>& input,
         const Eigen::Ref<const Eigen::VectorXd>& cotangent, AnnWorkspace& ws,
         Eigen::VectorXd& grad_input, Eigen::VectorXd* grad_weights_accum = nullptr,
         double weight_scale = 1.0);

}  // namespace cardioemu
