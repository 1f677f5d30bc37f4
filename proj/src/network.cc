#include "fofe_ner/network.h"

#include <algorithm>
#include <cmath>

#include "fofe_ner/errors.h"

namespace fofe_ner {

void NetworkShape::validate() const {
  if (fragment_input == 0 || context_input == 0) {
    throw InvalidArgument("network input dimensions must be positive");
  }
  if (num_classes < 2) throw InvalidArgument("network needs at least two classes");
  for (const auto* stack : {&fragment_layers, &context_layers, &shared_layers}) {
    for (std::size_t n : *stack) {
      if (n == 0) throw InvalidArgument("layer sizes must be positive");
    }
  }
}

namespace {

DenseLayer make_layer(std::size_t in, std::size_t out, Activation act) {
  return {{in, out, act},
          Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)),
          Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))};
}

std::vector<DenseLayer> make_stack(std::size_t in, const std::vector<std::size_t>& sizes) {
  std::vector<DenseLayer> stack;
  for (std::size_t n : sizes) {
    stack.push_back(make_layer(in, n, Activation::kRelu));
    in = n;
  }
  return stack;
}

std::size_t stack_output(std::size_t in, const std::vector<std::size_t>& sizes) {
  return sizes.empty() ? in : sizes.back();
}

template <typename Net, typename Fn>
void for_each_layer(Net& net, Fn fn) {
  for (auto* stack : {&net.fragment_stack, &net.context_stack, &net.shared_stack}) {
    for (auto& layer : *stack) fn(layer);
  }
  fn(net.output);
}

}  // namespace

GroupedNetwork GroupedNetwork::zeros(const NetworkShape& shape) {
  shape.validate();
  GroupedNetwork net;
  net.shape = shape;
  net.fragment_stack = make_stack(shape.fragment_input, shape.fragment_layers);
  net.context_stack = make_stack(shape.context_input, shape.context_layers);
  std::size_t merged = stack_output(shape.fragment_input, shape.fragment_layers) +
                       stack_output(shape.context_input, shape.context_layers);
  net.shared_stack = make_stack(merged, shape.shared_layers);
  net.output = make_layer(stack_output(merged, shape.shared_layers), shape.num_classes,
                          Activation::kIdentity);
  return net;
}

GroupedNetwork GroupedNetwork::init(const NetworkShape& shape, std::uint64_t seed) {
  GroupedNetwork net = zeros(shape);
  std::mt19937_64 rng(seed);
  for_each_layer(net, [&rng](DenseLayer& layer) {
    double bound = std::sqrt(6.0 / static_cast<double>(layer.spec.input_dim +
                                                       layer.spec.output_dim));
    std::uniform_real_distribution<double> dist(-bound, bound);
    // Column-major storage; fill in storage order so the draw sequence is fixed.
    for (Eigen::Index i = 0; i < layer.weight.size(); ++i) {
      layer.weight.data()[i] = dist(rng);
    }
  });
  return net;
}

std::vector<std::span<double>> GroupedNetwork::parameters() {
  std::vector<std::span<double>> out;
  for_each_layer(*this, [&out](DenseLayer& layer) {
    out.emplace_back(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
    out.emplace_back(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
  });
  return out;
}

std::vector<std::span<const double>> GroupedNetwork::parameters() const {
  std::vector<std::span<const double>> out;
  for_each_layer(*this, [&out](const DenseLayer& layer) {
    out.emplace_back(layer.weight.data(), static_cast<std::size_t>(layer.weight.size()));
    out.emplace_back(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
  });
  return out;
}

std::size_t GroupedNetwork::parameter_count() const {
  std::size_t n = static_cast<std::size_t>(output.weight.size() + output.bias.size());
  for (const auto* stack : {&fragment_stack, &context_stack, &shared_stack}) {
    for (const auto& layer : *stack) {
      n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
    }
  }
  return n;
}

BatchInput make_batch(std::span<const FeatureBundle> bundles) {
  if (bundles.empty()) throw InvalidArgument("empty batch");
  const auto df = static_cast<Eigen::Index>(bundles.front().fragment_group.size());
  const auto dc = static_cast<Eigen::Index>(bundles.front().context_group.size());
  const auto n = static_cast<Eigen::Index>(bundles.size());
  BatchInput batch{Eigen::MatrixXd(df, n), Eigen::MatrixXd(dc, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& b = bundles[static_cast<std::size_t>(j)];
    if (static_cast<Eigen::Index>(b.fragment_group.size()) != df ||
        static_cast<Eigen::Index>(b.context_group.size()) != dc) {
      throw DimensionMismatch("bundles in a batch differ in size");
    }
    batch.fragment.col(j) = Eigen::Map<const Eigen::VectorXd>(b.fragment_group.data(), df);
    batch.context.col(j) = Eigen::Map<const Eigen::VectorXd>(b.context_group.data(), dc);
  }
  return batch;
}

namespace {

Eigen::MatrixXd apply_layer(const DenseLayer& layer, const Eigen::MatrixXd& input,
                            bool drop, double dropout, std::mt19937_64* rng,
                            LayerCache* cache) {
  Eigen::MatrixXd pre = layer.weight * input;
  pre.colwise() += layer.bias;
  Eigen::MatrixXd out =
      layer.spec.activation == Activation::kRelu ? Eigen::MatrixXd(pre.cwiseMax(0.0)) : pre;
  Eigen::MatrixXd mask;
  if (drop) {
    const double keep = 1.0 - dropout;
    std::bernoulli_distribution coin(keep);
    mask.resize(out.rows(), out.cols());
    for (Eigen::Index i = 0; i < mask.size(); ++i) {
      mask.data()[i] = coin(*rng) ? 1.0 / keep : 0.0;
    }
    out = out.cwiseProduct(mask);
  }
  if (cache) {
    cache->input = input;
    cache->pre = std::move(pre);
    cache->activation = out;
    cache->mask = std::move(mask);
  }
  return out;
}

Eigen::MatrixXd run_stack(const std::vector<DenseLayer>& stack, Eigen::MatrixXd x,
                          bool drop, double dropout, std::mt19937_64* rng,
                          std::vector<LayerCache>* caches) {
  if (caches) caches->assign(stack.size(), LayerCache{});
  for (std::size_t i = 0; i < stack.size(); ++i) {
    if (static_cast<std::size_t>(x.rows()) != stack[i].spec.input_dim) {
      throw DimensionMismatch("layer input has " + std::to_string(x.rows()) +
                              " rows, expected " + std::to_string(stack[i].spec.input_dim));
    }
    x = apply_layer(stack[i], x, drop, dropout, rng, caches ? &(*caches)[i] : nullptr);
  }
  return x;
}

}  // namespace

Eigen::MatrixXd forward(const GroupedNetwork& net, const BatchInput& input, Mode mode,
                        double dropout, std::mt19937_64* rng, ForwardCache* cache) {
  if (static_cast<std::size_t>(input.fragment.rows()) != net.shape.fragment_input ||
      static_cast<std::size_t>(input.context.rows()) != net.shape.context_input) {
    throw DimensionMismatch("batch feature dimensions differ from network inputs");
  }
  if (input.fragment.cols() != input.context.cols()) {
    throw DimensionMismatch("fragment and context batches differ in size");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw InvalidArgument("dropout must lie in [0, 1)");
  const bool drop = mode == Mode::kTrain && dropout > 0.0;
  if (drop && rng == nullptr) throw InvalidArgument("dropout requires a random generator");

  Eigen::MatrixXd f = run_stack(net.fragment_stack, input.fragment, drop, dropout, rng,
                                cache ? &cache->fragment : nullptr);
  Eigen::MatrixXd c = run_stack(net.context_stack, input.context, drop, dropout, rng,
                                cache ? &cache->context : nullptr);
  Eigen::MatrixXd merged(f.rows() + c.rows(), f.cols());
  merged << f, c;
  Eigen::MatrixXd h = run_stack(net.shared_stack, std::move(merged), drop, dropout, rng,
                                cache ? &cache->shared : nullptr);
  Eigen::MatrixXd logits =
      apply_layer(net.output, h, false, 0.0, nullptr, cache ? &cache->output : nullptr);

  Eigen::MatrixXd probs(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    Eigen::VectorXd e = (logits.col(j).array() - logits.col(j).maxCoeff()).exp();
    probs.col(j) = e / e.sum();
  }
  if (cache) {
    cache->probabilities = probs;
    cache->batch_size = static_cast<std::size_t>(probs.cols());
  }
  return probs;
}

namespace {

// Backpropagates `delta` (gradient w.r.t. the layer output) through one
// layer, accumulating parameter gradients; returns gradient w.r.t. input.
Eigen::MatrixXd layer_backward(const DenseLayer& layer, const LayerCache& cache,
                               Eigen::MatrixXd delta, DenseLayer& grad) {
  if (cache.mask.size() > 0) delta = delta.cwiseProduct(cache.mask);
  if (layer.spec.activation == Activation::kRelu) {
    delta = delta.cwiseProduct((cache.pre.array() > 0.0).cast<double>().matrix());
  }
  grad.weight.noalias() += delta * cache.input.transpose();
  grad.bias += delta.rowwise().sum();
  return layer.weight.transpose() * delta;
}

Eigen::MatrixXd stack_backward(const std::vector<DenseLayer>& stack,
                               const std::vector<LayerCache>& caches,
                               Eigen::MatrixXd delta, std::vector<DenseLayer>& grads) {
  for (std::size_t i = stack.size(); i-- > 0;) {
    delta = layer_backward(stack[i], caches[i], std::move(delta), grads[i]);
  }
  return delta;
}

}  // namespace

NetworkGradients backward(const GroupedNetwork& net, const ForwardCache& cache,
                          std::span<const std::size_t> gold) {
  if (cache.batch_size == 0 || gold.size() != cache.batch_size ||
      cache.fragment.size() != net.fragment_stack.size() ||
      cache.context.size() != net.context_stack.size() ||
      cache.shared.size() != net.shared_stack.size() ||
      static_cast<std::size_t>(cache.probabilities.rows()) != net.shape.num_classes) {
    throw StaleCache("forward cache does not match this batch or network");
  }
  const auto batch = static_cast<Eigen::Index>(cache.batch_size);
  NetworkGradients grads{GroupedNetwork::zeros(net.shape), {}, {}};

  // Softmax + cross-entropy: d(logits) = (p - onehot(gold)) / batch.
  Eigen::MatrixXd delta = cache.probabilities;
  for (Eigen::Index j = 0; j < batch; ++j) {
    const std::size_t y = gold[static_cast<std::size_t>(j)];
    if (y >= net.shape.num_classes) throw InvalidArgument("gold label out of range");
    delta(static_cast<Eigen::Index>(y), j) -= 1.0;
  }
  delta /= static_cast<double>(batch);

  delta = layer_backward(net.output, cache.output, std::move(delta), grads.params.output);
  delta = stack_backward(net.shared_stack, cache.shared, std::move(delta),
                         grads.params.shared_stack);

  const Eigen::Index f_rows = net.fragment_stack.empty()
                                  ? static_cast<Eigen::Index>(net.shape.fragment_input)
                                  : static_cast<Eigen::Index>(net.shape.fragment_layers.back());
  Eigen::MatrixXd d_f = delta.topRows(f_rows);
  Eigen::MatrixXd d_c = delta.bottomRows(delta.rows() - f_rows);
  grads.d_fragment = stack_backward(net.fragment_stack, cache.fragment, std::move(d_f),
                                    grads.params.fragment_stack);
  grads.d_context = stack_backward(net.context_stack, cache.context, std::move(d_c),
                                   grads.params.context_stack);
  return grads;
}

double loss(const Eigen::MatrixXd& probabilities, std::span<const std::size_t> gold) {
  if (static_cast<std::size_t>(probabilities.cols()) != gold.size()) {
    throw DimensionMismatch("prediction and gold batch sizes differ");
  }
  if (gold.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < gold.size(); ++j) {
    double p = probabilities(static_cast<Eigen::Index>(gold[j]), static_cast<Eigen::Index>(j));
    total -= std::log(std::max(p, kProbabilityFloor));
  }
  return total / static_cast<double>(gold.size());
}

}  // namespace fofe_ner
