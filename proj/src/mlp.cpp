#include "ez/mlp.hpp"

#include <cmath>
#include <sstream>

#include "ez/error.hpp"

namespace ez {

namespace {

using Net = MlpNet<double>;
using Matrix = Net::Matrix;
using Vector = Net::Vector;

Matrix to_matrix(std::span<const Point3> x) {
    Matrix m(3, static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t d = 0; d < 3; ++d) m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) = x[i][d];
    return m;
}

struct Adam {
    const MlpHyper& hyper;
    std::vector<Matrix> mw, vw;
    std::vector<Vector> mb, vb;
    long step = 0;

    Adam(const MlpHyper& h, const Net& net) : hyper(h) {
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
            mw.push_back(Matrix::Zero(net.weights[l].rows(), net.weights[l].cols()));
            vw.push_back(mw.back());
            mb.push_back(Vector::Zero(net.biases[l].size()));
            vb.push_back(mb.back());
        }
    }

    void apply(Net& net, const std::vector<Matrix>& gw, const std::vector<Vector>& gb) {
        ++step;
        const double b1 = hyper.beta1;
        const double b2 = hyper.beta2;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
        const double lr = hyper.learning_rate;
        const double eps = hyper.epsilon;
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
            mw[l] = b1 * mw[l] + (1.0 - b1) * gw[l];
            vw[l] = b2 * vw[l] + (1.0 - b2) * gw[l].cwiseProduct(gw[l]);
            net.weights[l].array() -=
                lr * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + eps);
            mb[l] = b1 * mb[l] + (1.0 - b1) * gb[l];
            vb[l] = b2 * vb[l] + (1.0 - b2) * gb[l].cwiseProduct(gb[l]);
            net.biases[l].array() -= lr * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
        }
    }
};

} // namespace

double MlpModel::eval(const Point3& scaled) const {
    Matrix x(3, 1);
    x << scaled[0], scaled[1], scaled[2];
    return net.forward(x)(0, 0) * target_std + target_mean;
}

std::vector<double> MlpModel::eval_batch(std::span<const Point3> scaled) const {
    std::vector<double> out(scaled.size());
    constexpr std::size_t kChunk = 256;
    for (std::size_t start = 0; start < scaled.size(); start += kChunk) {
        const std::size_t len = std::min(kChunk, scaled.size() - start);
        const Matrix y = net.forward(to_matrix(scaled.subspan(start, len)));
        for (std::size_t i = 0; i < len; ++i) out[start + i] = y(0, static_cast<Eigen::Index>(i)) * target_std + target_mean;
    }
    return out;
}

MlpModel train_mlp_scaled(std::span<const Point3> train_x, std::span<const double> train_y,
                          std::span<const Point3> val_x, std::span<const double> val_y, const MlpHyper& hyper,
                          std::uint64_t seed) {
    if (train_x.empty() || val_x.empty()) throw ValidationError("fit_mlp: train and validation sets must be non-empty");
    if (train_x.size() != train_y.size() || val_x.size() != val_y.size())
        throw ValidationError("fit_mlp: x/y length mismatch");
    if (hyper.hidden_layers < 1 || hyper.units < 1 || hyper.batch_size < 1 || hyper.max_epochs < 1)
        throw ValidationError("fit_mlp: invalid hyperparameters");

    MlpModel model;
    model.hyper = hyper;
    double mean = 0;
    for (double v : train_y) mean += v;
    mean /= static_cast<double>(train_y.size());
    double var = 0;
    for (double v : train_y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(train_y.size());
    model.target_mean = mean;
    model.target_std = var > 0 ? std::sqrt(var) : 1.0;

    const Matrix x_all = to_matrix(train_x);
    Matrix y_all(1, static_cast<Eigen::Index>(train_y.size()));
    for (std::size_t i = 0; i < train_y.size(); ++i)
        y_all(0, static_cast<Eigen::Index>(i)) = (train_y[i] - model.target_mean) / model.target_std;
    const Matrix x_val = to_matrix(val_x);
    Matrix y_val(1, static_cast<Eigen::Index>(val_y.size()));
    for (std::size_t i = 0; i < val_y.size(); ++i)
        y_val(0, static_cast<Eigen::Index>(i)) = (val_y[i] - model.target_mean) / model.target_std;

    Net net = Net::init(3, hyper.hidden_layers, hyper.units, derive_seed(seed, {0x1417ULL}));
    Rng shuffle_rng(derive_seed(seed, {0x5348ULL}));
    Adam adam(hyper, net);
    std::vector<Matrix> gw;
    std::vector<Vector> gb;

    Net best = net;
    double best_loss = net.loss(x_val, y_val);
    int best_epoch = 0;
    int since_best = 0;
    std::vector<std::size_t> order = iota_indices(train_x.size());
    const auto batch = static_cast<std::size_t>(hyper.batch_size);
    Matrix xb;
    Matrix yb;
    int epoch = 0;
    for (epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t len = std::min(batch, order.size() - start);
            xb.resize(3, static_cast<Eigen::Index>(len));
            yb.resize(1, static_cast<Eigen::Index>(len));
            for (std::size_t i = 0; i < len; ++i) {
                const auto col = static_cast<Eigen::Index>(order[start + i]);
                xb.col(static_cast<Eigen::Index>(i)) = x_all.col(col);
                yb(0, static_cast<Eigen::Index>(i)) = y_all(0, col);
            }
            const double loss = net.loss_and_gradient(xb, yb, gw, gb);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "fit_mlp: training diverged (non-finite loss) at epoch " << epoch;
                throw DivergenceError(msg.str());
            }
            adam.apply(net, gw, gb);
        }
        const double val_loss = net.loss(x_val, y_val);
        if (!std::isfinite(val_loss)) {
            std::ostringstream msg;
            msg << "fit_mlp: training diverged (non-finite validation loss) at epoch " << epoch;
            throw DivergenceError(msg.str());
        }
        if (val_loss < best_loss) {
            best_loss = val_loss;
            best = net;
            best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= hyper.patience) {
            break;
        }
    }
    model.net = std::move(best);
    model.best_epoch = best_epoch;
    model.epochs_run = std::min(epoch, hyper.max_epochs);
    model.best_val_loss = best_loss;
    return model;
}

} // namespace ez
