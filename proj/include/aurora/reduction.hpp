#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "aurora/core.hpp"

namespace aurora {

enum class Activation : std::uint8_t { Linear = 0, Tanh = 1 };

template <class Scalar>
struct DenseLayer {
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Matrix weights;  // out x in
    Vector bias;
    Activation activation = Activation::Linear;

    std::size_t in() const { return static_cast<std::size_t>(weights.cols()); }
    std::size_t out() const { return static_cast<std::size_t>(weights.rows()); }
};

/// A stack of dense layers split into an encoder half and a decoder half.
/// The same type holds gradients and optimiser moments, shaped like the model.
template <class Scalar>
struct Network {
    using Layer = DenseLayer<Scalar>;
    using Matrix = typename Layer::Matrix;
    using Vector = typename Layer::Vector;

    std::vector<Layer> layers;
    std::size_t encoder_depth = 0;

    Network zeros_like() const {
        Network z;
        z.encoder_depth = encoder_depth;
        for (const auto& l : layers) {
            z.layers.push_back({Matrix::Zero(l.weights.rows(), l.weights.cols()), Vector::Zero(l.bias.size()),
                                l.activation});
        }
        return z;
    }

    template <class F>
    void for_each_block(F&& f) {
        for (auto& l : layers) {
            f(l.weights.data(), static_cast<std::size_t>(l.weights.size()));
            f(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
        }
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
        return n;
    }
};

struct TrainConfig {
    std::size_t epochs = 25;
    std::size_t minibatch = 64;
    Real learning_rate = 1e-3;
    Real clip_norm = 10.0;
    std::size_t max_samples = 10000;

    void validate() const {
        if (minibatch == 0) throw std::invalid_argument("minibatch must be positive");
        if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
        if (!(clip_norm > 0.0)) throw std::invalid_argument("clip_norm must be positive");
        if (max_samples == 0) throw std::invalid_argument("max_samples must be positive");
    }
};

template <class Scalar>
struct AdamState {
    Network<Scalar> first_moment;
    Network<Scalar> second_moment;
    std::uint64_t step = 0;
    Real learning_rate = 1e-3;
    Real beta1 = 0.9;
    Real beta2 = 0.999;
    Real eps_hat = 1e-8;
};

struct TrainReport {
    Real loss_before = 0.0;
    Real loss_after = 0.0;
    std::size_t samples = 0;
    std::size_t steps = 0;
};

/// Fully-connected autoencoder: input -> hidden... -> latent -> ...hidden -> input.
template <class Scalar>
class Autoencoder {
public:
    using Layer = DenseLayer<Scalar>;
    using Matrix = typename Layer::Matrix;
    using Vector = typename Layer::Vector;

    Autoencoder() = default;
    explicit Autoencoder(Network<Scalar> net) : net_(std::move(net)) { check_shape(); }

    /// Zero-initialised model. Hidden layers use tanh; the latent and output
    /// layers are linear. The decoder mirrors the encoder.
    static Autoencoder zeros(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t latent_dim) {
        if (input_dim == 0 || latent_dim == 0) throw std::invalid_argument("autoencoder dims must be positive");
        std::vector<std::size_t> sizes{input_dim};
        sizes.insert(sizes.end(), hidden.begin(), hidden.end());
        sizes.push_back(latent_dim);
        sizes.insert(sizes.end(), hidden.rbegin(), hidden.rend());
        sizes.push_back(input_dim);
        Network<Scalar> net;
        net.encoder_depth = hidden.size() + 1;
        for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
            const bool linear = (i + 1 == net.encoder_depth) || (i + 2 == sizes.size());
            net.layers.push_back({Matrix::Zero(static_cast<Eigen::Index>(sizes[i + 1]), static_cast<Eigen::Index>(sizes[i])),
                                  Vector::Zero(static_cast<Eigen::Index>(sizes[i + 1])),
                                  linear ? Activation::Linear : Activation::Tanh});
        }
        return Autoencoder(std::move(net));
    }

    /// Glorot-uniform weights, zero biases.
    static Autoencoder random(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t latent_dim,
                              Rng& rng) {
        Autoencoder ae = zeros(input_dim, hidden, latent_dim);
        for (auto& l : ae.net_.layers) {
            const Real limit = std::sqrt(6.0 / static_cast<Real>(l.in() + l.out()));
            // Column-major fill order is part of the reproducibility contract.
            for (Eigen::Index j = 0; j < l.weights.cols(); ++j) {
                for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
                    l.weights(i, j) = static_cast<Scalar>(rng.uniform(-limit, limit));
                }
            }
        }
        return ae;
    }

    const Network<Scalar>& network() const { return net_; }
    Network<Scalar>& network() { return net_; }

    std::size_t input_dim() const { return net_.layers.front().in(); }
    std::size_t latent_dim() const { return net_.layers[net_.encoder_depth - 1].out(); }

    /// Columns of the result are samples.
    Matrix to_matrix(std::span<const SensoryData* const> batch) const {
        Matrix x(static_cast<Eigen::Index>(input_dim()), static_cast<Eigen::Index>(batch.size()));
        for (std::size_t j = 0; j < batch.size(); ++j) {
            if (batch[j]->dim() != input_dim()) throw std::invalid_argument("sensory dimension does not match encoder input");
            for (std::size_t i = 0; i < input_dim(); ++i) {
                x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<Scalar>(batch[j]->values[i]);
            }
        }
        return x;
    }

    Matrix encode_batch(const Matrix& x) const { return run(x, 0, net_.encoder_depth); }
    Matrix decode_batch(const Matrix& z) const { return run(z, net_.encoder_depth, net_.layers.size()); }
    Matrix reconstruct_batch(const Matrix& x) const { return run(x, 0, net_.layers.size()); }

    Descriptor encode(const SensoryData& sd) const {
        const SensoryData* p = &sd;
        return encode(std::span<const SensoryData* const>(&p, 1)).front();
    }

    std::vector<Descriptor> encode(std::span<const SensoryData* const> batch) const {
        std::vector<Descriptor> out;
        out.reserve(batch.size());
        for_chunks(batch, [&](const Matrix& x) {
            const Matrix z = encode_batch(x);
            for (Eigen::Index j = 0; j < z.cols(); ++j) {
                Descriptor d;
                d.values.resize(static_cast<std::size_t>(z.rows()));
                for (Eigen::Index i = 0; i < z.rows(); ++i) d.values[static_cast<std::size_t>(i)] = static_cast<Real>(z(i, j));
                out.push_back(std::move(d));
            }
        });
        return out;
    }

    Real reconstruction_error(const SensoryData& sd) const {
        const SensoryData* p = &sd;
        return reconstruction_errors(std::span<const SensoryData* const>(&p, 1)).front();
    }

    /// Per-sample mean squared reconstruction error.
    std::vector<Real> reconstruction_errors(std::span<const SensoryData* const> batch) const {
        std::vector<Real> out;
        out.reserve(batch.size());
        for_chunks(batch, [&](const Matrix& x) {
            const Matrix r = reconstruct_batch(x) - x;
            for (Eigen::Index j = 0; j < r.cols(); ++j) {
                out.push_back(static_cast<Real>(r.col(j).squaredNorm()) / static_cast<Real>(r.rows()));
            }
        });
        return out;
    }

    /// Mean squared reconstruction error over a batch of columns.
    Real loss(const Matrix& x) const {
        const Matrix r = reconstruct_batch(x) - x;
        return static_cast<Real>(r.squaredNorm()) / static_cast<Real>(r.size());
    }

    /// Analytic gradient of loss(x) with respect to every parameter.
    Network<Scalar> gradient(const Matrix& x, Real* loss_out = nullptr) const {
        if (x.cols() == 0) throw std::invalid_argument("gradient needs a non-empty minibatch");
        const std::size_t depth = net_.layers.size();
        std::vector<Matrix> acts;
        acts.reserve(depth + 1);
        acts.push_back(x);
        for (const auto& l : net_.layers) acts.push_back(apply(l, acts.back()));

        const Matrix residual = acts.back() - x;
        const Scalar scale = static_cast<Scalar>(2.0 / static_cast<Real>(residual.size()));
        if (loss_out) *loss_out = static_cast<Real>(residual.squaredNorm()) / static_cast<Real>(residual.size());

        Network<Scalar> grad = net_.zeros_like();
        Matrix delta = scale * residual;
        for (std::size_t li = depth; li-- > 0;) {
            const auto& l = net_.layers[li];
            if (l.activation == Activation::Tanh) {
                delta.array() *= (Scalar(1) - acts[li + 1].array().square());
            }
            grad.layers[li].weights.noalias() = delta * acts[li].transpose();
            grad.layers[li].bias = delta.rowwise().sum();
            if (li > 0) {
                Matrix prev = l.weights.transpose() * delta;
                delta = std::move(prev);
            }
        }
        return grad;
    }

private:
    static Matrix apply(const Layer& l, const Matrix& a) {
        Matrix z = l.weights * a;
        z.colwise() += l.bias;
        if (l.activation == Activation::Tanh) z = z.array().tanh().matrix();
        return z;
    }

    Matrix run(const Matrix& x, std::size_t from, std::size_t to) const {
        Matrix a = x;
        for (std::size_t i = from; i < to; ++i) a = apply(net_.layers[i], a);
        return a;
    }

    template <class F>
    void for_chunks(std::span<const SensoryData* const> batch, F&& f) const {
        constexpr std::size_t kChunk = 256;
        for (std::size_t start = 0; start < batch.size(); start += kChunk) {
            const std::size_t n = std::min(kChunk, batch.size() - start);
            f(to_matrix(batch.subspan(start, n)));
        }
    }

    void check_shape() const {
        if (net_.layers.empty() || net_.encoder_depth == 0 || net_.encoder_depth >= net_.layers.size()) {
            throw std::invalid_argument("autoencoder needs non-empty encoder and decoder halves");
        }
        for (std::size_t i = 0; i < net_.layers.size(); ++i) {
            const auto& l = net_.layers[i];
            if (l.bias.size() != l.weights.rows()) throw std::invalid_argument("bias size does not match layer output");
            if (i > 0 && l.in() != net_.layers[i - 1].out()) throw std::invalid_argument("layer sizes do not chain");
        }
        if (net_.layers.back().out() != input_dim()) throw std::invalid_argument("decoder output must match input dim");
    }

    Network<Scalar> net_;
};

template <class Scalar>
AdamState<Scalar> make_adam(const Autoencoder<Scalar>& model, Real learning_rate) {
    AdamState<Scalar> s;
    s.first_moment = model.network().zeros_like();
    s.second_moment = model.network().zeros_like();
    s.learning_rate = learning_rate;
    return s;
}

template <class Scalar>
Real global_norm(Network<Scalar>& g) {
    Real acc = 0.0;
    g.for_each_block([&](Scalar* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) acc += static_cast<Real>(p[i]) * static_cast<Real>(p[i]);
    });
    return std::sqrt(acc);
}

template <class Scalar>
void adam_step(Network<Scalar>& params, Network<Scalar>& grad, AdamState<Scalar>& s) {
    ++s.step;
    const Real c1 = 1.0 - std::pow(s.beta1, static_cast<Real>(s.step));
    const Real c2 = 1.0 - std::pow(s.beta2, static_cast<Real>(s.step));
    const auto b1 = static_cast<Scalar>(s.beta1);
    const auto b2 = static_cast<Scalar>(s.beta2);
    const auto lr = static_cast<Scalar>(s.learning_rate);
    const auto eps = static_cast<Scalar>(s.eps_hat);
    const auto inv_c1 = static_cast<Scalar>(1.0 / c1);
    const auto inv_c2 = static_cast<Scalar>(1.0 / c2);
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
            m = b1 * m + (Scalar(1) - b1) * g;
            v.array() = b2 * v.array() + (Scalar(1) - b2) * g.array().square();
            p.array() -= lr * (m.array() * inv_c1) / ((v.array() * inv_c2).sqrt() + eps);
        };
        update(params.layers[li].weights, grad.layers[li].weights, s.first_moment.layers[li].weights,
               s.second_moment.layers[li].weights);
        update(params.layers[li].bias, grad.layers[li].bias, s.first_moment.layers[li].bias,
               s.second_moment.layers[li].bias);
    }
}

/// Minibatch Adam on the mean squared reconstruction error. Continues from
/// the model's current parameters.
template <class Scalar>
TrainReport train(Autoencoder<Scalar>& model, std::span<const SensoryData* const> dataset, const TrainConfig& cfg,
                  AdamState<Scalar>& adam, Rng& rng) {
    cfg.validate();
    TrainReport report;
    if (dataset.empty()) {
        spdlog::warn("encoder training skipped: empty dataset");
        return report;
    }
    std::vector<const SensoryData*> samples(dataset.begin(), dataset.end());
    if (samples.size() > cfg.max_samples) {
        rng.shuffle(samples);
        samples.resize(cfg.max_samples);
    }
    using Matrix = typename Autoencoder<Scalar>::Matrix;
    const Matrix data = model.to_matrix(samples);
    report.samples = samples.size();
    report.loss_before = model.loss(data);
    if (cfg.epochs == 0) {
        report.loss_after = report.loss_before;
        return report;
    }
    if (adam.first_moment.layers.empty()) {
        adam.first_moment = model.network().zeros_like();
        adam.second_moment = model.network().zeros_like();
    }
    adam.learning_rate = cfg.learning_rate;

    std::vector<Eigen::Index> order(samples.size());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Matrix batch;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += cfg.minibatch) {
            const std::size_t n = std::min(cfg.minibatch, order.size() - start);
            batch.resize(data.rows(), static_cast<Eigen::Index>(n));
            for (std::size_t j = 0; j < n; ++j) batch.col(static_cast<Eigen::Index>(j)) = data.col(order[start + j]);
            Network<Scalar> grad = model.gradient(batch);
            const Real norm = global_norm(grad);
            if (norm > cfg.clip_norm) {
                const auto factor = static_cast<Scalar>(cfg.clip_norm / norm);
                grad.for_each_block([&](Scalar* p, std::size_t m) {
                    for (std::size_t i = 0; i < m; ++i) p[i] *= factor;
                });
            }
            adam_step(model.network(), grad, adam);
            ++report.steps;
        }
    }
    report.loss_after = model.loss(data);
    return report;
}

/// Linear encoder onto the top-n principal components of `dataset`.
/// Encoding is the centred projection; decoding maps back and re-adds the mean.
template <class Scalar = Real>
Autoencoder<Scalar> pca_fit(std::span<const SensoryData* const> dataset, std::size_t n) {
    if (n == 0) throw std::invalid_argument("pca needs n >= 1");
    if (dataset.size() < n) throw std::invalid_argument("pca dataset smaller than the requested dimension");
    const std::size_t d = dataset.front()->dim();
    if (n > d) throw std::invalid_argument("pca dimension exceeds the input dimension");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(dataset.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset[i]->dim() != d) throw std::invalid_argument("pca dataset has inconsistent dimensions");
        for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dataset[i]->values[j];
    }
    const Eigen::VectorXd mean = x.colwise().mean().transpose();
    x.rowwise() -= mean.transpose();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
    Eigen::MatrixXd v = svd.matrixV();
    if (static_cast<std::size_t>(v.cols()) < n) {
        // Fewer samples than dimensions: complete the basis.
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
        Eigen::MatrixXd q = qr.householderQ();
        q.leftCols(v.cols()) = v;
        v = q;
    }
    Eigen::MatrixXd comps = v.leftCols(static_cast<Eigen::Index>(n));
    for (Eigen::Index c = 0; c < comps.cols(); ++c) {
        Eigen::Index arg = 0;
        comps.col(c).cwiseAbs().maxCoeff(&arg);
        if (comps(arg, c) < 0) comps.col(c) *= -1.0;
    }
    Network<Scalar> net;
    net.encoder_depth = 1;
    using M = typename Network<Scalar>::Matrix;
    using V = typename Network<Scalar>::Vector;
    const Eigen::MatrixXd enc_w = comps.transpose();
    const Eigen::VectorXd enc_b = -(enc_w * mean);
    net.layers.push_back({enc_w.cast<Scalar>(), enc_b.cast<Scalar>(), Activation::Linear});
    net.layers.push_back({M(comps.cast<Scalar>()), V(mean.cast<Scalar>()), Activation::Linear});
    return Autoencoder<Scalar>(std::move(net));
}

/// First encoder update at iteration 10; the gap grows by 10 each time.
constexpr std::uint64_t encoder_update_iteration(std::uint64_t k) { return 5 * k * (k + 1); }

constexpr bool is_encoder_update_iteration(std::uint64_t iter) {
    for (std::uint64_t k = 1;; ++k) {
        const auto it = encoder_update_iteration(k);
        if (it == iter) return true;
        if (it > iter) return false;
    }
}

// --- checkpoint ---------------------------------------------------------

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'A', 'U', 'R', 'O', 'R', 'A', 'E', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw std::runtime_error("truncated encoder checkpoint");
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace detail

/// Binary checkpoint: magic, version, dims, per-layer shape and activation,
/// then row-major weights and biases as little-endian doubles.
template <class Scalar>
void save_checkpoint(const Autoencoder<Scalar>& model, std::ostream& os) {
    const auto& net = model.network();
    os.write(detail::kCheckpointMagic, sizeof(detail::kCheckpointMagic));
    detail::put<std::uint32_t>(os, detail::kCheckpointVersion);
    detail::put<std::uint64_t>(os, model.input_dim());
    detail::put<std::uint64_t>(os, model.latent_dim());
    detail::put<std::uint64_t>(os, net.layers.size());
    detail::put<std::uint64_t>(os, net.encoder_depth);
    for (const auto& l : net.layers) {
        detail::put<std::uint64_t>(os, l.in());
        detail::put<std::uint64_t>(os, l.out());
        detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(l.activation));
    }
    for (const auto& l : net.layers) {
        for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
            for (Eigen::Index j = 0; j < l.weights.cols(); ++j) detail::put<double>(os, static_cast<double>(l.weights(i, j)));
        }
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) detail::put<double>(os, static_cast<double>(l.bias(i)));
    }
    if (!os) throw std::runtime_error("failed to write encoder checkpoint");
}

template <class Scalar>
Autoencoder<Scalar> load_checkpoint(std::istream& is) {
    char magic[sizeof(detail::kCheckpointMagic)];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, detail::kCheckpointMagic, sizeof(magic)) != 0) {
        throw std::runtime_error("not an encoder checkpoint");
    }
    const auto version = detail::get<std::uint32_t>(is);
    if (version != detail::kCheckpointVersion) {
        throw std::runtime_error("unsupported encoder checkpoint version " + std::to_string(version));
    }
    const auto input_dim = detail::get<std::uint64_t>(is);
    const auto latent_dim = detail::get<std::uint64_t>(is);
    const auto count = detail::get<std::uint64_t>(is);
    Network<Scalar> net;
    net.encoder_depth = detail::get<std::uint64_t>(is);
    if (count == 0 || count > 1024) throw std::runtime_error("bad layer count in encoder checkpoint");
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto in = detail::get<std::uint64_t>(is);
        const auto out = detail::get<std::uint64_t>(is);
        const auto tag = detail::get<std::uint8_t>(is);
        if (tag > 1) throw std::runtime_error("unknown activation tag in encoder checkpoint");
        using Mat = typename Network<Scalar>::Matrix;
        using Vec = typename Network<Scalar>::Vector;
        net.layers.push_back({Mat::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)),
                              Vec::Zero(static_cast<Eigen::Index>(out)), static_cast<Activation>(tag)});
    }
    for (auto& l : net.layers) {
        for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
            for (Eigen::Index j = 0; j < l.weights.cols(); ++j) l.weights(i, j) = static_cast<Scalar>(detail::get<double>(is));
        }
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = static_cast<Scalar>(detail::get<double>(is));
    }
    Autoencoder<Scalar> model(std::move(net));
    if (model.input_dim() != input_dim || model.latent_dim() != latent_dim) {
        throw std::runtime_error("encoder checkpoint header does not match its layers");
    }
    return model;
}

// --- descriptor models used by the search loops ------------------------

/// Online-trained autoencoder, never reset between updates.
template <class Scalar = float>
class AutoencoderModel {
public:
    AutoencoderModel(std::size_t input_dim, std::vector<std::size_t> hidden, std::size_t latent_dim, TrainConfig cfg,
                     Rng init_rng)
        : model_(Autoencoder<Scalar>::random(input_dim, hidden, latent_dim, init_rng)),
          adam_(make_adam(model_, cfg.learning_rate)),
          cfg_(cfg) {}

    std::size_t latent_dim() const { return model_.latent_dim(); }
    std::vector<Descriptor> encode(std::span<const SensoryData* const> batch) const { return model_.encode(batch); }
    std::vector<Real> surprise(std::span<const SensoryData* const> batch) const {
        return model_.reconstruction_errors(batch);
    }
    TrainReport fit(std::span<const SensoryData* const> dataset, Rng& rng) {
        return train(model_, dataset, cfg_, adam_, rng);
    }

    const Autoencoder<Scalar>& model() const { return model_; }
    void save(std::ostream& os) const { save_checkpoint(model_, os); }

private:
    Autoencoder<Scalar> model_;
    AdamState<Scalar> adam_;
    TrainConfig cfg_;
};

/// PCA refitted from scratch at every update. Encodes to zeros before the
/// first fit.
class PcaModel {
public:
    PcaModel(std::size_t input_dim, std::size_t latent_dim)
        : model_(Autoencoder<Real>::zeros(input_dim, {}, latent_dim)) {}

    std::size_t latent_dim() const { return model_.latent_dim(); }
    std::vector<Descriptor> encode(std::span<const SensoryData* const> batch) const { return model_.encode(batch); }
    std::vector<Real> surprise(std::span<const SensoryData* const> batch) const {
        return model_.reconstruction_errors(batch);
    }
    TrainReport fit(std::span<const SensoryData* const> dataset, Rng&) {
        TrainReport r;
        if (dataset.size() < model_.latent_dim()) {
            spdlog::warn("pca refit skipped: {} samples for {} components", dataset.size(), model_.latent_dim());
            return r;
        }
        const auto x = model_.to_matrix(dataset);
        r.samples = dataset.size();
        r.loss_before = model_.loss(x);
        model_ = pca_fit<Real>(dataset, model_.latent_dim());
        r.loss_after = model_.loss(x);
        return r;
    }

    const Autoencoder<Real>& model() const { return model_; }
    void save(std::ostream& os) const { save_checkpoint(model_, os); }

private:
    Autoencoder<Real> model_;
};

}  // namespace aurora
