#pragma once

// From-scratch multi-layer perceptron regressor with backpropagation,
// seeded mini-batch training (SGD momentum or adaptive moments), and
// JSON model persistence.

#include "dtwin/dataset.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace dtwin {

enum class Activation { tanh, relu };
enum class Optimizer { sgd_momentum, adaptive_moments };
enum class LrDecay { none, cosine };

[[nodiscard]] const char* activation_name(Activation a);
[[nodiscard]] Activation activation_from_name(const std::string& name);
[[nodiscard]] const char* optimizer_name(Optimizer o);
[[nodiscard]] Optimizer optimizer_from_name(const std::string& name);
[[nodiscard]] const char* lr_decay_name(LrDecay d);
[[nodiscard]] LrDecay lr_decay_from_name(const std::string& name);

// Network and training hyper-parameters. layer_sizes must start with 3
// (inputs V, I, displacement), end with 1 (single output neuron), and contain
// at least one hidden layer. The output activation is always identity.
struct MlpConfig {
    std::vector<int> layer_sizes{3, 32, 32, 1};
    Activation activation = Activation::tanh;
    double learning_rate = 1e-3;
    int batch_size = 64;
    int epochs = 200;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::adaptive_moments;
    LrDecay lr_decay = LrDecay::none;  // per-epoch learning-rate schedule
    double momentum = 0.9;             // sgd-momentum coefficient
};

void validate(const MlpConfig& cfg);

// Weights, biases, and training metadata. weights[l] has shape
// (layer_sizes[l] x layer_sizes[l+1]); biases[l] has layer_sizes[l+1] rows.
struct MlpModel {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    Activation activation = Activation::tanh;

    int epochs_run = 0;
    double final_train_loss = 0.0;
    std::uint64_t seed = 0;

    [[nodiscard]] std::vector<int> layer_sizes() const;
};

// Gradients of the mean-squared-error loss w.r.t. every weight and bias,
// averaged over a batch; shapes mirror MlpModel.
struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

struct TrainResult {
    MlpModel model;
    std::vector<double> loss_history;  // mean train MSE per epoch
};

// Seeded initialization: weights uniform on (-1/sqrt(fan_in), 1/sqrt(fan_in)),
// biases zero.
[[nodiscard]] MlpModel init_model(const MlpConfig& cfg);

// Single-example and batch forward passes (rows of x are examples).
[[nodiscard]] double forward(const MlpModel& model, const Eigen::Vector3d& x);
[[nodiscard]] Eigen::VectorXd forward(const MlpModel& model, const Eigen::MatrixXd& x);

// Batch-averaged MSE gradients via backpropagation.
[[nodiscard]] Gradients backward(const MlpModel& model, const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd& y);

// Batch MSE loss (training objective).
[[nodiscard]] double mse_loss(const MlpModel& model, const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y);

// Trains a fresh copy of model for cfg.epochs epochs of seeded-shuffled
// mini-batches; deterministic per seed. Throws if the loss turns non-finite,
// naming the epoch.
[[nodiscard]] TrainResult train(const MlpModel& model, const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& y, const MlpConfig& cfg);
[[nodiscard]] TrainResult train(const MlpModel& model, const PreparedDataset& data,
                                const MlpConfig& cfg);

// JSON persistence; a round-trip reproduces forward outputs exactly.
void save_model(const MlpModel& model, const std::filesystem::path& path);
[[nodiscard]] MlpModel load_model(const std::filesystem::path& path);

}  // namespace dtwin
