// Copyright 2026 The cmix Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cmix/fcn.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace cmix {
namespace {

constexpr int kCheckpointVersion = 1;

// Cached activations of a contiguous run of layers.
struct Trace {
  std::vector<Matrix> inputs;  // input to each layer
  std::vector<Matrix> pre;     // affine output of each layer
};

bool is_output_layer(const FcnModel& m, std::size_t l) { return l + 1 == m.layers.size(); }

Matrix activate(const FcnModel& m, const Matrix& z) {
  if (m.activation == Activation::kRelu) return z.cwiseMax(0.0);
  const double slope = m.leaky_slope;
  return z.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

Matrix activation_grad(const FcnModel& m, const Matrix& z) {
  const double neg = m.activation == Activation::kRelu ? 0.0 : m.leaky_slope;
  return z.unaryExpr([neg](double v) { return v > 0.0 ? 1.0 : neg; });
}

// Applies layers [from, to). Activations follow every layer except the output.
Matrix forward_layers(const FcnModel& m, Matrix a, std::size_t from, std::size_t to, Trace* trace) {
  for (std::size_t l = from; l < to; ++l) {
    const DenseLayer& layer = m.layers[l];
    if (a.cols() != layer.weight.cols()) {
      throw DimensionError("fcn: layer " + std::to_string(l) + " expects " + std::to_string(layer.weight.cols()) +
                           " inputs, got " + std::to_string(a.cols()));
    }
    Matrix z = a * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    if (trace) {
      trace->inputs.push_back(std::move(a));
      trace->pre.push_back(z);
    }
    a = is_output_layer(m, l) ? std::move(z) : activate(m, z);
  }
  return a;
}

// d_out is the gradient w.r.t. the output of layer to-1 (post-activation).
// Accumulates parameter gradients and returns the gradient w.r.t. the input
// of layer `from`.
Matrix backward_layers(const FcnModel& m, const Trace& trace, Matrix d_out, std::size_t from, std::size_t to,
                       FcnGradients& grads) {
  for (std::size_t l = to; l-- > from;) {
    const std::size_t t = l - from;
    Matrix dz = is_output_layer(m, l) ? std::move(d_out)
                                      : Matrix(d_out.cwiseProduct(activation_grad(m, trace.pre[t])));
    grads[l].weight.noalias() += dz.transpose() * trace.inputs[t];
    grads[l].bias.noalias() += dz.colwise().sum().transpose();
    d_out = dz * m.layers[l].weight;
  }
  return d_out;
}

double mse_and_grad(const Matrix& pred, const Matrix& target, Matrix& d_pred) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DimensionError("fcn: target shape does not match network output");
  }
  const double count = static_cast<double>(pred.size());
  const Matrix diff = pred - target;
  d_pred = (2.0 / count) * diff;
  return diff.squaredNorm() / count;
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::kRelu ? "relu" : "leaky-relu"; }

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "leaky-relu") return Activation::kLeakyRelu;
  throw std::invalid_argument("unknown activation: " + name);
}

FcnModel FcnModel::create(std::vector<Index> layer_sizes, Activation activation, Rng& rng) {
  if (layer_sizes.size() < 2) throw std::invalid_argument("fcn needs at least input and output sizes");
  for (Index s : layer_sizes) {
    if (s < 1) throw std::invalid_argument("fcn layer sizes must be positive");
  }
  FcnModel m;
  m.layer_sizes = std::move(layer_sizes);
  m.activation = activation;
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    const Index in = m.layer_sizes[l];
    const Index out = m.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> unif(-limit, limit);
    DenseLayer layer;
    layer.weight.resize(out, in);
    for (Index r = 0; r < out; ++r) {
      for (Index c = 0; c < in; ++c) layer.weight(r, c) = unif(rng);
    }
    layer.bias = Vector::Zero(out);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

Index FcnModel::parameter_count() const {
  Index n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

Vector FcnModel::flatten() const { return cmix::flatten(layers); }

void FcnModel::assign(const Vector& flat) {
  if (flat.size() != parameter_count()) throw DimensionError("fcn: flat parameter vector has wrong length");
  Index k = 0;
  for (auto& l : layers) {
    for (Index i = 0; i < l.weight.size(); ++i) l.weight.data()[i] = flat[k++];
    for (Index i = 0; i < l.bias.size(); ++i) l.bias[i] = flat[k++];
  }
}

bool FcnModel::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

FcnGradients zeros_like(const FcnModel& model) {
  FcnGradients g;
  for (const auto& l : model.layers) {
    g.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  }
  return g;
}

Vector flatten(const FcnGradients& grads) {
  Index n = 0;
  for (const auto& l : grads) n += l.weight.size() + l.bias.size();
  Vector flat(n);
  Index k = 0;
  for (const auto& l : grads) {
    for (Index i = 0; i < l.weight.size(); ++i) flat[k++] = l.weight.data()[i];
    for (Index i = 0; i < l.bias.size(); ++i) flat[k++] = l.bias[i];
  }
  return flat;
}

void add_scaled(FcnModel& model, const FcnGradients& grads, double scale) {
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    model.layers[l].weight += scale * grads[l].weight;
    model.layers[l].bias += scale * grads[l].bias;
  }
}

void add_scaled(FcnGradients& acc, const FcnGradients& grads, double scale) {
  for (std::size_t l = 0; l < acc.size(); ++l) {
    acc[l].weight += scale * grads[l].weight;
    acc[l].bias += scale * grads[l].bias;
  }
}

ForwardResult fcn_forward(const FcnModel& model, const Vector& x, bool capture_hidden) {
  if (x.size() != model.input_dim()) {
    throw DimensionError("fcn_forward: expected " + std::to_string(model.input_dim()) + " inputs, got " +
                         std::to_string(x.size()));
  }
  Matrix a = x.transpose();
  ForwardResult result;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    a = forward_layers(model, std::move(a), l, l + 1, nullptr);
    if (capture_hidden && !is_output_layer(model, l)) result.hidden.push_back(a.row(0).transpose());
  }
  result.prediction = a.row(0).transpose();
  return result;
}

Matrix fcn_predict(const FcnModel& model, const Matrix& X) {
  return forward_layers(model, X, 0, model.layers.size(), nullptr);
}

Matrix fcn_hidden(const FcnModel& model, const Matrix& X, int layer) {
  if (layer < 1 || layer > model.hidden_layers()) {
    throw std::out_of_range("fcn_hidden: no hidden layer " + std::to_string(layer));
  }
  return forward_layers(model, X, 0, static_cast<std::size_t>(layer), nullptr);
}

LossAndGradients fcn_backward(const FcnModel& model, const Matrix& X, const Matrix& Y) {
  if (X.rows() == 0) throw std::invalid_argument("fcn_backward: empty batch");
  Trace trace;
  const std::size_t n_layers = model.layers.size();
  const Matrix pred = forward_layers(model, X, 0, n_layers, &trace);
  LossAndGradients out;
  Matrix d_pred;
  out.loss = mse_and_grad(pred, Y, d_pred);
  out.gradients = zeros_like(model);
  backward_layers(model, trace, std::move(d_pred), 0, n_layers, out.gradients);
  return out;
}

LossAndGradients fcn_backward(const FcnModel& model, const MixedBatch& batch) {
  const Index rows = batch.anchor_x.rows();
  if (rows == 0) throw std::invalid_argument("fcn_backward: empty batch");
  if (batch.partner_x.rows() != rows || batch.lambda.size() != rows || batch.target.rows() != rows) {
    throw DimensionError("fcn_backward: mixed batch parts have different row counts");
  }
  const std::size_t n_layers = model.layers.size();
  if (batch.site_layer == 0) {
    const Matrix mixed = batch.lambda.asDiagonal() * batch.anchor_x +
                         (Vector::Ones(rows) - batch.lambda).asDiagonal() * batch.partner_x;
    return fcn_backward(model, mixed, batch.target);
  }
  if (batch.site_layer < 0 || batch.site_layer > model.hidden_layers()) {
    throw std::out_of_range("fcn_backward: mixing site " + std::to_string(batch.site_layer) +
                            " is not a hidden layer");
  }
  const auto site = static_cast<std::size_t>(batch.site_layer);
  Trace lower_a, lower_b, upper;
  const Matrix h_a = forward_layers(model, batch.anchor_x, 0, site, &lower_a);
  const Matrix h_b = forward_layers(model, batch.partner_x, 0, site, &lower_b);
  const Vector one_minus = Vector::Ones(rows) - batch.lambda;
  const Matrix h_mix = batch.lambda.asDiagonal() * h_a + one_minus.asDiagonal() * h_b;
  const Matrix pred = forward_layers(model, h_mix, site, n_layers, &upper);

  LossAndGradients out;
  Matrix d_pred;
  out.loss = mse_and_grad(pred, batch.target, d_pred);
  out.gradients = zeros_like(model);
  const Matrix d_mix = backward_layers(model, upper, std::move(d_pred), site, n_layers, out.gradients);
  backward_layers(model, lower_a, batch.lambda.asDiagonal() * d_mix, 0, site, out.gradients);
  backward_layers(model, lower_b, one_minus.asDiagonal() * d_mix, 0, site, out.gradients);
  return out;
}

AdamState AdamState::for_model(const FcnModel& model) {
  AdamState s;
  s.first_moment = zeros_like(model);
  s.second_moment = zeros_like(model);
  return s;
}

void adam_update(FcnModel& model, const FcnGradients& grads, AdamState& state, double lr) {
  state.step += 1;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.epsilon);
  };
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    update(model.layers[l].weight, grads[l].weight, state.first_moment[l].weight, state.second_moment[l].weight);
    update(model.layers[l].bias, grads[l].bias, state.first_moment[l].bias, state.second_moment[l].bias);
  }
}

double fcn_train_step(FcnModel& model, const MixedBatch& batch, AdamState& state, double lr) {
  LossAndGradients lg = fcn_backward(model, batch);
  if (!std::isfinite(lg.loss)) {
    throw DivergenceError("training diverged: loss is " + std::to_string(lg.loss) + " at step " +
                          std::to_string(state.step + 1));
  }
  adam_update(model, lg.gradients, state, lr);
  if (!model.all_finite()) {
    throw DivergenceError("training diverged: non-finite parameters after step " + std::to_string(state.step));
  }
  return lg.loss;
}

void save_checkpoint(const FcnModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "cmix-fcn";
  j["version"] = kCheckpointVersion;
  j["layer_sizes"] = model.layer_sizes;
  j["activation"] = to_string(model.activation);
  j["leaky_slope"] = model.leaky_slope;
  const Vector flat = model.flatten();
  j["parameters"] = std::vector<double>(flat.data(), flat.data() + flat.size());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  out << j.dump(1) << '\n';
}

FcnModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());
  const nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("format", "") != "cmix-fcn" || j.value("version", 0) != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint format in " + path.string());
  }
  Rng unused(0);
  FcnModel m = FcnModel::create(j.at("layer_sizes").get<std::vector<Index>>(),
                                parse_activation(j.at("activation").get<std::string>()), unused);
  m.leaky_slope = j.at("leaky_slope").get<double>();
  const auto params = j.at("parameters").get<std::vector<double>>();
  m.assign(Eigen::Map<const Vector>(params.data(), static_cast<Index>(params.size())));
  return m;
}

}  // namespace cmix
