#include "cardioemu/ann.hpp"

#include <cmath>

#include "cardioemu/errors.hpp"
#include "cardioemu/rng.hpp"

namespace cardioemu {

std::string activation_name(Activation a) {
  return a == Activation::kTanh ? "tanh" : "linear";
}

Activation activation_from_name(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "linear") return Activation::kLinear;
  throw ConfigError("unknown activation: " + name);
}

void AnnArchitecture::validate() const {
  if (input_dim < 1 || hidden_layers < 1 || neurons_per_layer < 1 || output_dim < 1) {
    throw ConfigError("architecture counts must all be >= 1");
  }
}

std::int64_t count_params(const AnnArchitecture& arch) {
  arch.validate();
  std::int64_t total = 0;
  for (int l = 0; l < arch.num_layers(); ++l) {
    total += static_cast<std::int64_t>(arch.layer_input(l) + 1) * arch.layer_output(l);
  }
  return total;
}

AnnWeights AnnWeights::zeros(const AnnArchitecture& arch) {
  arch.validate();
  AnnWeights out;
  out.arch = arch;
  for (int l = 0; l < arch.num_layers(); ++l) {
    out.w.push_back(Eigen::MatrixXd::Zero(arch.layer_output(l), arch.layer_input(l)));
    out.b.push_back(Eigen::VectorXd::Zero(arch.layer_output(l)));
  }
  return out;
}

Eigen::VectorXd AnnWeights::flatten() const {
  Eigen::VectorXd flat(count_params(arch));
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < w.size(); ++l) {
    for (Eigen::Index r = 0; r < w[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < w[l].cols(); ++c) {
        flat[pos++] = w[l](r, c);
      }
    }
    for (Eigen::Index r = 0; r < b[l].size(); ++r) {
      flat[pos++] = b[l][r];
    }
  }
  return flat;
}

void AnnWeights::set_flat(const Eigen::Ref<const Eigen::VectorXd>& flat) {
  if (flat.size() != count_params(arch)) {
    throw ShapeError("flat weight vector has wrong length");
  }
  Eigen::Index pos = 0;
  for (std::size_t l = 0; l < w.size(); ++l) {
    for (Eigen::Index r = 0; r < w[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < w[l].cols(); ++c) {
        w[l](r, c) = flat[pos++];
      }
    }
    for (Eigen::Index r = 0; r < b[l].size(); ++r) {
      b[l][r] = flat[pos++];
    }
  }
}

AnnWeights AnnWeights::from_flat(const AnnArchitecture& arch,
                                 const Eigen::Ref<const Eigen::VectorXd>& flat) {
  AnnWeights out = zeros(arch);
  out.set_flat(flat);
  return out;
}

double AnnWeights::squared_norm() const {
  double total = 0.0;
  for (std::size_t l = 0; l < w.size(); ++l) {
    total += w[l].squaredNorm() + b[l].squaredNorm();
  }
  return total;
}

AnnWeights init_glorot(const AnnArchitecture& arch, std::uint64_t seed) {
  AnnWeights out = AnnWeights::zeros(arch);
  Rng rng(seed);
  for (int l = 0; l < arch.num_layers(); ++l) {
    const double bound = std::sqrt(6.0 / (arch.layer_input(l) + arch.layer_output(l)));
    // Row-major fill so the draw order matches the flat layout.
    for (Eigen::Index r = 0; r < out.w[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < out.w[l].cols(); ++c) {
        out.w[l](r, c) = rng.uniform(-bound, bound);
      }
    }
  }
  return out;
}

namespace {

void ensure_workspace(const AnnArchitecture& arch, AnnWorkspace& ws) {
  const std::size_t layers = static_cast<std::size_t>(arch.num_layers());
  if (ws.act.size() != layers + 1) {
    ws.act.resize(layers + 1);
    ws.delta.resize(layers + 1);
  }
}

}  // namespace

void forward(const AnnWeights& weights, const Eigen::Ref<const Eigen::VectorXd>& input,
             AnnWorkspace& ws, Eigen::VectorXd& output) {
  const AnnArchitecture& arch = weights.arch;
  if (input.size() != arch.input_dim) {
    throw ShapeError("forward: input length != input_dim");
  }
  ensure_workspace(arch, ws);
  ws.act[0] = input;
  const int layers = arch.num_layers();
  for (int l = 0; l < layers; ++l) {
    ws.act[l + 1].noalias() = weights.w[l] * ws.act[l];
    ws.act[l + 1] += weights.b[l];
    const Activation act = (l == layers - 1) ? arch.output_activation : arch.hidden_activation;
    if (act == Activation::kTanh) {
      ws.act[l + 1] = ws.act[l + 1].array().tanh();
    }
  }
  output = ws.act[layers];
}

Eigen::VectorXd forward(const AnnWeights& weights, const Eigen::Ref<const Eigen::VectorXd>& input) {
  AnnWorkspace ws;
  Eigen::VectorXd out;
  forward(weights, input, ws, out);
  return out;
}

void vjp(const AnnWeights& weights, const Eigen::Ref<const Eigen::VectorXd>& input,
         const Eigen::Ref<const Eigen::VectorXd>& cotangent, AnnWorkspace& ws,
         Eigen::VectorXd& grad_input, Eigen::VectorXd* grad_weights_accum, double weight_scale) {
  const AnnArchitecture& arch = weights.arch;
  if (cotangent.size() != arch.output_dim) {
    throw ShapeError("vjp: cotangent length != output_dim");
  }
  Eigen::VectorXd out_unused;
  forward(weights, input, ws, out_unused);

  const int layers = arch.num_layers();
  if (grad_weights_accum != nullptr && grad_weights_accum->size() != count_params(arch)) {
    throw ShapeError("vjp: gradient accumulator has wrong length");
  }

  ws.delta[layers] = cotangent;
  std::int64_t offset_end = count_params(arch);
  for (int l = layers - 1; l >= 0; --l) {
    const Activation act = (l == layers - 1) ? arch.output_activation : arch.hidden_activation;
    if (act == Activation::kTanh) {
      // act[l+1] holds tanh(pre); d tanh = 1 - tanh^2.
      ws.delta[l + 1].array() *= 1.0 - ws.act[l + 1].array().square();
    }
    if (grad_weights_accum != nullptr) {
      const Eigen::Index rows = weights.w[l].rows();
      const Eigen::Index cols = weights.w[l].cols();
      const std::int64_t layer_base = offset_end - rows * (cols + 1);
      double* gw = grad_weights_accum->data() + layer_base;
      const Eigen::VectorXd& d = ws.delta[l + 1];
      const Eigen::VectorXd& a = ws.act[l];
      for (Eigen::Index r = 0; r < rows; ++r) {
        const double dr = weight_scale * d[r];
        double* row = gw + r * cols;
        for (Eigen::Index c = 0; c < cols; ++c) {
          row[c] += dr * a[c];
        }
      }
      double* gb = gw + rows * cols;
      for (Eigen::Index r = 0; r < rows; ++r) {
        gb[r] += weight_scale * d[r];
      }
      offset_end = layer_base;
    }
    ws.delta[l].noalias() = weights.w[l].transpose() * ws.delta[l + 1];
  }
  grad_input = ws.delta[0];
}

VjpResult vjp(const AnnWeights& weights, const Eigen::Ref<const Eigen::VectorXd>& input,
              const Eigen::Ref<const Eigen::VectorXd>& cotangent) {
  VjpResult res;
  res.grad_weights = Eigen::VectorXd::Zero(count_params(weights.arch));
  AnnWorkspace ws;
  vjp(weights, input, cotangent, ws, res.grad_input, &res.grad_weights, 1.0);
  return res;
}

}  // namespace cardioemu
