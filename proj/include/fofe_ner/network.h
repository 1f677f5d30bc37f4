#ifndef FOFE_NER_NETWORK_H_
#define FOFE_NER_NETWORK_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fofe_ner/features.h"

namespace fofe_ner {

enum class Activation { kRelu, kIdentity };

struct LayerSpec {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  Activation activation = Activation::kRelu;
};

struct DenseLayer {
  LayerSpec spec;
  Eigen::MatrixXd weight;  // output_dim x input_dim
  Eigen::VectorXd bias;
};

// Layer sizes of the two dedicated stacks, the shared stack and the class
// count. Defaults follow the common two dedicated + one shared layout.
struct NetworkShape {
  std::size_t fragment_input = 0;
  std::size_t context_input = 0;
  std::vector<std::size_t> fragment_layers{412, 412};
  std::vector<std::size_t> context_layers{512, 512};
  std::vector<std::size_t> shared_layers{512};
  std::size_t num_classes = 0;

  void validate() const;
};

// Fragment group -> fragment stack, context group -> context stack, the two
// outputs concatenated -> shared stack -> linear output -> softmax.
struct GroupedNetwork {
  NetworkShape shape;
  std::vector<DenseLayer> fragment_stack;
  std::vector<DenseLayer> context_stack;
  std::vector<DenseLayer> shared_stack;
  DenseLayer output;

  // Glorot-uniform weights, zero biases, deterministic in `seed`.
  static GroupedNetwork init(const NetworkShape& shape, std::uint64_t seed);
  static GroupedNetwork zeros(const NetworkShape& shape);

  // Weight then bias of every layer: fragment, context, shared, output.
  std::vector<std::span<double>> parameters();
  std::vector<std::span<const double>> parameters() const;
  std::size_t parameter_count() const;
};

// Columns are examples.
struct BatchInput {
  Eigen::MatrixXd fragment;
  Eigen::MatrixXd context;

  std::size_t size() const { return static_cast<std::size_t>(fragment.cols()); }
};

BatchInput make_batch(std::span<const FeatureBundle> bundles);

enum class Mode { kTrain, kInfer };

struct LayerCache {
  Eigen::MatrixXd input;
  Eigen::MatrixXd pre;
  Eigen::MatrixXd activation;
  Eigen::MatrixXd mask;  // empty when dropout was not applied
};

struct ForwardCache {
  std::vector<LayerCache> fragment;
  std::vector<LayerCache> context;
  std::vector<LayerCache> shared;
  LayerCache output;
  Eigen::MatrixXd probabilities;
  std::size_t batch_size = 0;
};

// Returns a num_classes x batch matrix of class distributions. In train mode
// inverted dropout with drop probability `dropout` is applied to the output
// of every hidden layer; `rng` is required when dropout > 0.
Eigen::MatrixXd forward(const GroupedNetwork& net, const BatchInput& input, Mode mode,
                        double dropout = 0.0, std::mt19937_64* rng = nullptr,
                        ForwardCache* cache = nullptr);

struct NetworkGradients {
  GroupedNetwork params;
  Eigen::MatrixXd d_fragment;  // gradient w.r.t. the fragment group inputs
  Eigen::MatrixXd d_context;
};

// Gradient of the mean categorical cross-entropy over the batch.
// Throws StaleCache when `gold` does not match the cached batch.
NetworkGradients backward(const GroupedNetwork& net, const ForwardCache& cache,
                          std::span<const std::size_t> gold);

inline constexpr double kProbabilityFloor = 1e-12;

double loss(const Eigen::MatrixXd& probabilities, std::span<const std::size_t> gold);

}  // namespace fofe_ner

#endif  // FOFE_NER_NETWORK_H_
