#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "ez/rng.hpp"
#include "ez/sampling.hpp"

namespace ez {

/// Fully connected regressor settings. Layer/unit grids and batch/patience are the published
/// ones; max_epochs and the Adam constants are the usual defaults.
struct MlpHyper {
    int hidden_layers = 2;
    int units = 32;
    int batch_size = 16;
    int patience = 10;
    int max_epochs = 500;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    friend bool operator==(const MlpHyper&, const MlpHyper&) = default;
};

inline constexpr std::array<int, 3> kMlpLayerGrid = {2, 5, 10};
inline constexpr std::array<int, 3> kMlpUnitGrid = {32, 64, 128};

/// 3 -> [units] x layers -> 1 network with ReLU hidden layers and a linear output.
/// Templated on the scalar so gradient checks can run in extended precision.
template <typename Scalar>
struct MlpNet {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    std::vector<Matrix> weights; // layer l maps (in) -> (out): out x in
    std::vector<Vector> biases;

    /// Uniform fan-in initialization, U(-sqrt(6/fan_in), sqrt(6/fan_in)); zero biases.
    static MlpNet init(int inputs, int hidden_layers, int units, std::uint64_t seed) {
        MlpNet net;
        Rng rng(seed);
        int fan_in = inputs;
        for (int l = 0; l <= hidden_layers; ++l) {
            const int fan_out = l == hidden_layers ? 1 : units;
            const double limit = std::sqrt(6.0 / fan_in);
            Matrix w(fan_out, fan_in);
            for (Eigen::Index j = 0; j < w.cols(); ++j)
                for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = Scalar(rng.uniform(-limit, limit));
            net.weights.push_back(std::move(w));
            net.biases.push_back(Vector::Zero(fan_out));
            fan_in = fan_out;
        }
        return net;
    }

    std::size_t layer_count() const { return weights.size(); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < weights.size(); ++l)
            n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
        return n;
    }

    /// x: inputs x batch. Returns 1 x batch.
    Matrix forward(const Matrix& x) const {
        Matrix a = x;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            Matrix z = (weights[l] * a).colwise() + biases[l];
            if (l + 1 < weights.size()) z = z.cwiseMax(Scalar(0));
            a = std::move(z);
        }
        return a;
    }

    /// Mean squared error over the batch.
    Scalar loss(const Matrix& x, const Matrix& y) const {
        const Matrix diff = forward(x) - y;
        return diff.squaredNorm() / Scalar(x.cols());
    }

    /// Mean squared error and its gradient by backpropagation.
    Scalar loss_and_gradient(const Matrix& x, const Matrix& y, std::vector<Matrix>& grad_w,
                             std::vector<Vector>& grad_b) const {
        const std::size_t layers = weights.size();
        std::vector<Matrix> acts(layers + 1);
        acts[0] = x;
        for (std::size_t l = 0; l < layers; ++l) {
            Matrix z = (weights[l] * acts[l]).colwise() + biases[l];
            if (l + 1 < layers) z = z.cwiseMax(Scalar(0));
            acts[l + 1] = std::move(z);
        }
        const Scalar batch = Scalar(x.cols());
        const Matrix diff = acts[layers] - y;
        const Scalar value = diff.squaredNorm() / batch;

        grad_w.resize(layers);
        grad_b.resize(layers);
        Matrix delta = (Scalar(2) / batch) * diff;
        for (std::size_t l = layers; l-- > 0;) {
            grad_w[l].noalias() = delta * acts[l].transpose();
            grad_b[l] = delta.rowwise().sum();
            if (l > 0) {
                Matrix back = weights[l].transpose() * delta;
                // ReLU derivative from the post-activation: active where output > 0.
                delta = back.cwiseProduct((acts[l].array() > Scalar(0)).template cast<Scalar>().matrix());
            }
        }
        return value;
    }

    template <typename Other>
    MlpNet<Other> cast() const {
        MlpNet<Other> out;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            out.weights.push_back(weights[l].template cast<Other>());
            out.biases.push_back(biases[l].template cast<Other>());
        }
        return out;
    }
};

/// Trained network on z-scored inputs with a standardized target.
struct MlpModel {
    MlpHyper hyper;
    MlpNet<double> net;
    double target_mean = 0;
    double target_std = 1;
    int epochs_run = 0;
    int best_epoch = 0;
    double best_val_loss = 0;

    double eval(const Point3& scaled) const;
    /// Batched evaluation over scaled points.
    std::vector<double> eval_batch(std::span<const Point3> scaled) const;
};

/// Adam on shuffled mini-batches with patience-based early stopping on validation loss;
/// best-epoch weights are restored. Throws DivergenceError on a non-finite loss.
MlpModel train_mlp_scaled(std::span<const Point3> train_x, std::span<const double> train_y,
                          std::span<const Point3> val_x, std::span<const double> val_y, const MlpHyper& hyper,
                          std::uint64_t seed);

} // namespace ez
