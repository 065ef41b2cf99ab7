#include "dtwin/mlp.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

namespace dtwin {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Offset decouples the shuffle stream from the weight-init stream.
constexpr std::uint64_t kShuffleSeedOffset = 0x9E3779B97F4A7C15ull;

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation a) {
    if (a == Activation::tanh) {
        return z.array().tanh().matrix();
    }
    return z.cwiseMax(0.0);
}

// Derivative expressed through the activation output.
Eigen::MatrixXd activate_grad(const Eigen::MatrixXd& a_out, Activation a) {
    if (a == Activation::tanh) {
        return (1.0 - a_out.array().square()).matrix();
    }
    return (a_out.array() > 0.0).cast<double>().matrix();
}

// Forward pass keeping every layer activation; acts[0] is the input batch.
std::vector<Eigen::MatrixXd> forward_activations(const MlpModel& model,
                                                 const Eigen::MatrixXd& x) {
    const std::size_t n_layers = model.weights.size();
    std::vector<Eigen::MatrixXd> acts(n_layers + 1);
    acts[0] = x;
    for (std::size_t l = 0; l < n_layers; ++l) {
        Eigen::MatrixXd z =
            (acts[l] * model.weights[l]).rowwise() + model.biases[l].transpose();
        acts[l + 1] = l + 1 < n_layers ? activate(z, model.activation) : std::move(z);
    }
    return acts;
}

// Backprop from stored activations; returns batch-averaged MSE gradients.
Gradients backward_from_activations(const MlpModel& model,
                                    const std::vector<Eigen::MatrixXd>& acts,
                                    const Eigen::VectorXd& y) {
    const std::size_t n_layers = model.weights.size();
    const auto batch = static_cast<double>(y.size());

    Gradients grads;
    grads.weights.resize(n_layers);
    grads.biases.resize(n_layers);

    Eigen::MatrixXd delta = (2.0 / batch) * (acts[n_layers].col(0) - y);
    for (std::size_t l = n_layers; l-- > 0;) {
        grads.weights[l] = acts[l].transpose() * delta;
        grads.biases[l] = delta.colwise().sum().transpose();
        if (l > 0) {
            delta = (delta * model.weights[l].transpose())
                        .cwiseProduct(activate_grad(acts[l], model.activation));
        }
    }
    return grads;
}

void check_shapes(const MlpModel& model) {
    if (model.weights.empty() || model.weights.size() != model.biases.size()) {
        throw validation_error("model has inconsistent layer counts");
    }
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        if (model.biases[l].size() != model.weights[l].cols()) {
            throw validation_error("bias/weight shape mismatch at layer " + std::to_string(l));
        }
        if (l > 0 && model.weights[l].rows() != model.weights[l - 1].cols()) {
            throw validation_error("weight shapes do not chain at layer " + std::to_string(l));
        }
    }
    if (model.weights.back().cols() != 1) {
        throw validation_error("output layer must have exactly one neuron");
    }
}

}  // namespace

const char* activation_name(Activation a) {
    return a == Activation::tanh ? "tanh" : "relu";
}

Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "relu") return Activation::relu;
    throw validation_error("unknown activation: '" + name + "'");
}

const char* optimizer_name(Optimizer o) {
    return o == Optimizer::sgd_momentum ? "sgd-momentum" : "adaptive-moments";
}

Optimizer optimizer_from_name(const std::string& name) {
    if (name == "sgd-momentum") return Optimizer::sgd_momentum;
    if (name == "adaptive-moments") return Optimizer::adaptive_moments;
    throw validation_error("unknown optimizer: '" + name + "'");
}

const char* lr_decay_name(LrDecay d) { return d == LrDecay::none ? "none" : "cosine"; }

LrDecay lr_decay_from_name(const std::string& name) {
    if (name == "none") return LrDecay::none;
    if (name == "cosine") return LrDecay::cosine;
    throw validation_error("unknown lr decay: '" + name + "'");
}

void validate(const MlpConfig& cfg) {
    if (cfg.layer_sizes.size() < 3) {
        throw validation_error("layer_sizes needs at least one hidden layer");
    }
    if (cfg.layer_sizes.front() != 3) {
        throw validation_error("first layer size must be 3 (inputs V, I, displacement)");
    }
    if (cfg.layer_sizes.back() != 1) {
        throw validation_error("last layer size must be 1 (single output neuron)");
    }
    for (int s : cfg.layer_sizes) {
        if (s < 1) throw validation_error("layer sizes must be positive");
    }
    if (cfg.learning_rate < 0.0) {
        throw validation_error("learning rate must be non-negative");
    }
    if (cfg.batch_size < 1) {
        throw validation_error("batch size must be positive");
    }
    if (cfg.epochs < 0) {
        throw validation_error("epoch count must be non-negative");
    }
    if (cfg.momentum < 0.0 || cfg.momentum >= 1.0) {
        throw validation_error("momentum must lie in [0, 1)");
    }
}

std::vector<int> MlpModel::layer_sizes() const {
    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(weights.front().rows()));
    for (const Eigen::MatrixXd& w : weights) {
        sizes.push_back(static_cast<int>(w.cols()));
    }
    return sizes;
}

MlpModel init_model(const MlpConfig& cfg) {
    validate(cfg);
    MlpModel model;
    model.activation = cfg.activation;
    model.seed = cfg.seed;

    std::mt19937_64 rng(cfg.seed);
    for (std::size_t l = 0; l + 1 < cfg.layer_sizes.size(); ++l) {
        const int fan_in = cfg.layer_sizes[l];
        const int fan_out = cfg.layer_sizes[l + 1];
        const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> uniform(-limit, limit);

        Eigen::MatrixXd w(fan_in, fan_out);
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                w(i, j) = uniform(rng);
            }
        }
        model.weights.push_back(std::move(w));
        model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return model;
}

double forward(const MlpModel& model, const Eigen::Vector3d& x) {
    if (!x.allFinite()) {
        throw validation_error("non-finite input to forward pass");
    }
    Eigen::MatrixXd batch = x.transpose();
    return forward_activations(model, batch).back()(0, 0);
}

Eigen::VectorXd forward(const MlpModel& model, const Eigen::MatrixXd& x) {
    if (!x.allFinite()) {
        throw validation_error("non-finite input to forward pass");
    }
    return forward_activations(model, x).back().col(0);
}

Gradients backward(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() == 0) {
        throw validation_error("backward pass needs a non-empty batch");
    }
    if (x.rows() != y.size()) {
        throw validation_error("batch x and y sizes differ");
    }
    const auto acts = forward_activations(model, x);
    if (!acts.back().allFinite()) {
        throw std::runtime_error("non-finite activations in backward pass");
    }
    return backward_from_activations(model, acts, y);
}

double mse_loss(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Eigen::VectorXd pred = forward(model, x);
    return (pred - y).squaredNorm() / static_cast<double>(y.size());
}

TrainResult train(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                  const MlpConfig& cfg) {
    validate(cfg);
    check_shapes(model);
    if (x.rows() == 0 || x.rows() != y.size()) {
        throw validation_error("training data is empty or misaligned");
    }

    TrainResult result;
    result.model = model;
    MlpModel& m = result.model;
    const std::size_t n_layers = m.weights.size();
    const auto n = x.rows();

    // Optimizer state: momentum / first-moment in v1, second moment in v2.
    std::vector<Eigen::MatrixXd> w_v1(n_layers), w_v2(n_layers);
    std::vector<Eigen::VectorXd> b_v1(n_layers), b_v2(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        w_v1[l] = Eigen::MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols());
        w_v2[l] = w_v1[l];
        b_v1[l] = Eigen::VectorXd::Zero(m.biases[l].size());
        b_v2[l] = b_v1[l];
    }

    std::mt19937_64 shuffle_rng(cfg.seed + kShuffleSeedOffset);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    long step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr =
            cfg.lr_decay == LrDecay::cosine
                ? 0.5 * cfg.learning_rate * (1.0 + std::cos(kPi * epoch / cfg.epochs))
                : cfg.learning_rate;

        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double epoch_loss = 0.0;
        for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
            const Eigen::Index count = std::min<Eigen::Index>(cfg.batch_size, n - start);
            Eigen::MatrixXd xb(count, x.cols());
            Eigen::VectorXd yb(count);
            for (Eigen::Index i = 0; i < count; ++i) {
                const Eigen::Index src = order[static_cast<std::size_t>(start + i)];
                xb.row(i) = x.row(src);
                yb[i] = y[src];
            }

            const auto acts = forward_activations(m, xb);
            const double batch_loss =
                (acts.back().col(0) - yb).squaredNorm() / static_cast<double>(count);
            if (!std::isfinite(batch_loss)) {
                throw std::runtime_error("training diverged (non-finite loss) at epoch " +
                                         std::to_string(epoch));
            }
            epoch_loss += batch_loss * static_cast<double>(count);
            const Gradients grads = backward_from_activations(m, acts, yb);

            ++step;
            if (cfg.optimizer == Optimizer::adaptive_moments) {
                const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
                const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
                for (std::size_t l = 0; l < n_layers; ++l) {
                    w_v1[l] = kAdamBeta1 * w_v1[l] + (1.0 - kAdamBeta1) * grads.weights[l];
                    w_v2[l].array() = kAdamBeta2 * w_v2[l].array() +
                                      (1.0 - kAdamBeta2) * grads.weights[l].array().square();
                    m.weights[l].array() -=
                        lr * (w_v1[l].array() / c1) / ((w_v2[l].array() / c2).sqrt() + kAdamEps);

                    b_v1[l] = kAdamBeta1 * b_v1[l] + (1.0 - kAdamBeta1) * grads.biases[l];
                    b_v2[l].array() = kAdamBeta2 * b_v2[l].array() +
                                      (1.0 - kAdamBeta2) * grads.biases[l].array().square();
                    m.biases[l].array() -=
                        lr * (b_v1[l].array() / c1) / ((b_v2[l].array() / c2).sqrt() + kAdamEps);
                }
            } else {
                for (std::size_t l = 0; l < n_layers; ++l) {
                    w_v1[l] = cfg.momentum * w_v1[l] + grads.weights[l];
                    m.weights[l] -= lr * w_v1[l];
                    b_v1[l] = cfg.momentum * b_v1[l] + grads.biases[l];
                    m.biases[l] -= lr * b_v1[l];
                }
            }
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(n));
    }

    m.epochs_run = cfg.epochs;
    m.final_train_loss = result.loss_history.empty() ? 0.0 : result.loss_history.back();
    m.seed = cfg.seed;
    return result;
}

TrainResult train(const MlpModel& model, const PreparedDataset& data, const MlpConfig& cfg) {
    return train(model, data.x, data.y, cfg);
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
    check_shapes(model);
    nlohmann::ordered_json doc;
    doc["layer_sizes"] = model.layer_sizes();
    doc["activation"] = activation_name(model.activation);

    auto& weights = doc["weights"] = nlohmann::ordered_json::array();
    for (const Eigen::MatrixXd& w : model.weights) {
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(w.size()));
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                flat.push_back(w(i, j));  // row-major
            }
        }
        weights.push_back(flat);
    }
    auto& biases = doc["biases"] = nlohmann::ordered_json::array();
    for (const Eigen::VectorXd& b : model.biases) {
        biases.push_back(std::vector<double>(b.data(), b.data() + b.size()));
    }
    doc["metadata"] = {{"epochs_run", model.epochs_run},
                       {"final_train_loss", model.final_train_loss},
                       {"seed", model.seed}};

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw io_error("cannot open file for writing: " + path.string());
    }
    out << doc.dump(2) << '\n';
    if (!out) {
        throw io_error("write failed: " + path.string());
    }
}

MlpModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open file: " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(path.string() + ": " + e.what());
    }

    MlpModel model;
    try {
        const auto sizes = doc.at("layer_sizes").get<std::vector<int>>();
        if (sizes.size() < 2) {
            throw validation_error("layer_sizes must list at least two layers");
        }
        model.activation = activation_from_name(doc.at("activation").get<std::string>());

        const auto& weights = doc.at("weights");
        const auto& biases = doc.at("biases");
        if (weights.size() + 1 != sizes.size() || biases.size() + 1 != sizes.size()) {
            throw validation_error("layer count mismatch between sizes and parameters");
        }
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            const auto rows = static_cast<Eigen::Index>(sizes[l]);
            const auto cols = static_cast<Eigen::Index>(sizes[l + 1]);
            const auto flat = weights[l].get<std::vector<double>>();
            if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
                throw validation_error("weight shape mismatch at layer " + std::to_string(l));
            }
            Eigen::MatrixXd w(rows, cols);
            for (Eigen::Index i = 0; i < rows; ++i) {
                for (Eigen::Index j = 0; j < cols; ++j) {
                    w(i, j) = flat[static_cast<std::size_t>(i * cols + j)];
                }
            }
            const auto b = biases[l].get<std::vector<double>>();
            if (static_cast<Eigen::Index>(b.size()) != cols) {
                throw validation_error("bias shape mismatch at layer " + std::to_string(l));
            }
            model.weights.push_back(std::move(w));
            model.biases.push_back(
                Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
        }
        if (doc.contains("metadata")) {
            const auto& meta = doc["metadata"];
            model.epochs_run = meta.value("epochs_run", 0);
            model.final_train_loss = meta.value("final_train_loss", 0.0);
            model.seed = meta.value("seed", std::uint64_t{0});
        }
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(path.string() + ": " + e.what());
    }
    check_shapes(model);
    return model;
}

}  // namespace dtwin
