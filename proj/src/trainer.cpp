#include "bsnn/trainer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "bsnn/errors.hpp"
#include "bsnn/rng.hpp"

namespace bsnn {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

double arctan_surrogate(double x, double slope) {
    return std::atan(M_PI * slope * x / 2.0) / M_PI + 0.5;
}

double arctan_surrogate_grad(double x, double slope) {
    const double u = M_PI * slope * x / 2.0;
    return (slope / 2.0) / (1.0 + u * u);
}

void TrainConfig::validate() const {
    if (digits.empty()) throw ConfigError("no digits selected");
    for (const int d : digits)
        if (d < 0 || d > 9) throw ConfigError("digits must lie in 0..9");
    if (hidden_count < 1) throw ConfigError("hidden_count must be positive");
    if (t_end < 1) throw ConfigError("t_end must be at least 1");
    if (encoding == SpikeEncoding::Thresholded && t_end != 1)
        throw ConfigError("thresholded encoding forces t_end = 1");
    if (epochs < 1 || batch_size < 1 || restarts < 1) throw ConfigError("bad training schedule");
    if (!(learning_rate > 0)) throw ConfigError("learning rate must be positive");
}

NetworkArchitecture quantize_proxy(const ProxyWeights& proxy, int input_count, int hidden_count,
                                   int output_count, WeightScale scale) {
    NetworkArchitecture arch(input_count, hidden_count, output_count, scale);
    const auto quant = scale == WeightScale::Binary ? quantize_binary : quantize_ternary;
    for (int h = 0; h < hidden_count; ++h)
        for (int i = 0; i < input_count; ++i)
            arch.set_weight({Layer::Hidden, h}, {Layer::Input, i},
                            quant(proxy.hidden_weights[static_cast<std::size_t>(h) * input_count + i]));
    for (int z = 0; z < output_count; ++z)
        for (int h = 0; h < hidden_count; ++h)
            arch.set_weight({Layer::Output, z}, {Layer::Hidden, h},
                            quant(proxy.output_weights[static_cast<std::size_t>(z) * hidden_count + h]));
    for (int h = 0; h < hidden_count; ++h)
        arch.set_threshold({Layer::Hidden, h},
                           static_cast<int>(std::lround(proxy.hidden_thresholds[h])));
    for (int z = 0; z < output_count; ++z)
        arch.set_threshold({Layer::Output, z},
                           static_cast<int>(std::lround(proxy.output_thresholds[z])));
    return arch;
}

namespace {

struct Batch {
    MatrixXd images; // batch x pixels, raw intensities
    std::vector<int> labels;
};

// spike inputs for each time step, deterministic in (seed, epoch, batch)
std::vector<MatrixXd> encode_batch(const MatrixXd& images, const TrainConfig& cfg, int epoch,
                                   int batch_index) {
    const int t_end = cfg.encoding == SpikeEncoding::Thresholded ? 1 : cfg.t_end;
    std::vector<MatrixXd> steps(t_end);
    if (cfg.encoding == SpikeEncoding::Thresholded) {
        steps[0] = (images.array() > 0.5).cast<double>();
        return steps;
    }
    const std::uint64_t stream =
        (static_cast<std::uint64_t>(epoch) << 20) ^ static_cast<std::uint64_t>(batch_index);
    CounterRng rng(cfg.seed, stream);
    for (int t = 0; t < t_end; ++t) {
        steps[t].resize(images.rows(), images.cols());
        for (Eigen::Index r = 0; r < images.rows(); ++r)
            for (Eigen::Index c = 0; c < images.cols(); ++c) {
                const std::uint64_t counter =
                    (static_cast<std::uint64_t>(r) * images.cols() + c) * (t_end + 1) + t;
                steps[t](r, c) = rng.double_at(counter) < images(r, c) ? 1.0 : 0.0;
            }
    }
    return steps;
}

MatrixXd quantize_matrix(const MatrixXd& w, WeightScale scale) {
    if (scale == WeightScale::Binary) return (w.array() > 0.0).cast<double>();
    return w.array().sign();
}

struct ForwardRecord {
    std::vector<MatrixXd> a1, s1, a2, s2;
    MatrixXd counts;
};

ForwardRecord forward(const std::vector<MatrixXd>& steps, const MatrixXd& w1q, const MatrixXd& w2q,
                      const RowVectorXd& tau1, const RowVectorXd& tau2) {
    const Eigen::Index batch = steps[0].rows();
    const Eigen::Index k = w1q.cols();
    const Eigen::Index classes = w2q.cols();
    ForwardRecord rec;
    MatrixXd a1 = MatrixXd::Zero(batch, k), s1p = MatrixXd::Zero(batch, k);
    MatrixXd a2 = MatrixXd::Zero(batch, classes), s2p = MatrixXd::Zero(batch, classes);
    rec.counts = MatrixXd::Zero(batch, classes);
    for (const MatrixXd& x : steps) {
        a1 = (a1.array() * (1.0 - s1p.array())).matrix() + x * w1q;
        MatrixXd s1 = (a1.array() >= tau1.replicate(batch, 1).array()).cast<double>();
        a2 = (a2.array() * (1.0 - s2p.array())).matrix() + s1 * w2q;
        MatrixXd s2 = (a2.array() >= tau2.replicate(batch, 1).array()).cast<double>();
        rec.a1.push_back(a1);
        rec.s1.push_back(s1);
        rec.a2.push_back(a2);
        rec.s2.push_back(s2);
        s1p = std::move(s1);
        s2p = std::move(s2);
        rec.counts += rec.s2.back();
    }
    return rec;
}

MatrixXd surrogate_grad_matrix(const MatrixXd& a, const RowVectorXd& tau, double sigma) {
    MatrixXd g(a.rows(), a.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            g(r, c) = arctan_surrogate_grad((a(r, c) - tau(c)) / sigma) / sigma;
    return g;
}

struct TrainerState {
    MatrixXd w1, w2;
    RowVectorXd tau1, tau2;
    MatrixXd m_w1, m_w2;
    RowVectorXd m_tau1, m_tau2;
};

int predict_row(const MatrixXd& counts, Eigen::Index row) {
    int best = 0;
    for (Eigen::Index c = 1; c < counts.cols(); ++c)
        if (counts(row, c) > counts(row, best)) best = static_cast<int>(c);
    return best;
}

double batch_accuracy(const TrainerState& st, const TrainConfig& cfg, const MatrixXd& images,
                      const std::vector<int>& labels) {
    const MatrixXd w1q = quantize_matrix(st.w1, cfg.scale);
    const MatrixXd w2q = quantize_matrix(st.w2, cfg.scale);
    const RowVectorXd t1 = st.tau1.array().round();
    const RowVectorXd t2 = st.tau2.array().round();
    int good = 0;
    const Eigen::Index chunk = 1024;
    for (Eigen::Index at = 0; at < images.rows(); at += chunk) {
        const Eigen::Index rows = std::min(chunk, images.rows() - at);
        const MatrixXd part = images.middleRows(at, rows);
        const auto steps = encode_batch(part, cfg, 1 << 16, static_cast<int>(at));
        const ForwardRecord rec = forward(steps, w1q, w2q, t1, t2);
        for (Eigen::Index r = 0; r < rows; ++r)
            good += predict_row(rec.counts, r) == labels[at + r];
    }
    return images.rows() == 0 ? 0.0 : static_cast<double>(good) / images.rows();
}

} // namespace

TrainResult train(const TrainConfig& cfg, const LabeledDataset& train_set,
                  const LabeledDataset& val_set) {
    cfg.validate();
    if (train_set.size() == 0) throw DataError("empty training set");
    const auto start_time = std::chrono::steady_clock::now();

    const int classes = static_cast<int>(cfg.digits.size());
    for (const int label : train_set.labels)
        if (label < 0 || label >= classes) throw DataError("label outside the configured classes");

    const int pixels = train_set.images[0].pixel_count();
    const int take = std::min<int>(static_cast<int>(train_set.size()), cfg.max_train_images);
    MatrixXd train_images(take, pixels);
    std::vector<int> train_labels(train_set.labels.begin(), train_set.labels.begin() + take);
    for (int r = 0; r < take; ++r)
        for (int c = 0; c < pixels; ++c) train_images(r, c) = train_set.images[r].intensities[c];

    MatrixXd val_images(val_set.size(), pixels);
    for (std::size_t r = 0; r < val_set.size(); ++r)
        for (int c = 0; c < pixels; ++c) val_images(r, c) = val_set.images[r].intensities[c];

    const int t_end = cfg.encoding == SpikeEncoding::Thresholded ? 1 : cfg.t_end;
    const double sigma1 = std::max(1.0, std::sqrt(static_cast<double>(pixels)) / 4.0);
    const double sigma2 = std::max(1.0, std::sqrt(static_cast<double>(cfg.hidden_count)) / 2.0);

    TrainResult best;
    double best_val = -1.0;

    for (int restart = 0; restart < cfg.restarts; ++restart) {
        const std::uint64_t rseed = cfg.seed + 0x9e37 * static_cast<std::uint64_t>(restart);
        CounterRng rng(rseed, 0x1417);

        TrainerState st;
        st.w1.resize(pixels, cfg.hidden_count);
        for (Eigen::Index i = 0; i < st.w1.size(); ++i) {
            const double mag = rng.next_double() * 0.1;
            st.w1.data()[i] = cfg.scale == WeightScale::Binary
                                  ? (rng.next_double() < cfg.positive_fraction ? mag : mag - 0.1)
                                  : mag * 2.0 - 0.1;
        }
        st.w2.resize(cfg.hidden_count, classes);
        for (Eigen::Index i = 0; i < st.w2.size(); ++i) st.w2.data()[i] = rng.next_double() * 0.2 - 0.1;

        // threshold calibration on a probe batch: start at the median
        // pre-activation so roughly half the units fire
        {
            const Eigen::Index probe = std::min<Eigen::Index>(512, train_images.rows());
            const auto steps = encode_batch(train_images.topRows(probe), cfg, 0, 1 << 18);
            const MatrixXd i1 = steps[0] * quantize_matrix(st.w1, cfg.scale);
            st.tau1.resize(cfg.hidden_count);
            for (int h = 0; h < cfg.hidden_count; ++h) {
                VectorXd col = i1.col(h);
                std::nth_element(col.data(), col.data() + col.size() / 2, col.data() + col.size());
                st.tau1(h) = col(col.size() / 2) + 1.0;
            }
            const MatrixXd s1 = (i1.array() >= st.tau1.replicate(i1.rows(), 1).array()).cast<double>();
            const MatrixXd i2 = s1 * quantize_matrix(st.w2, cfg.scale);
            st.tau2.resize(classes);
            for (int z = 0; z < classes; ++z) {
                VectorXd col = i2.col(z);
                std::nth_element(col.data(), col.data() + col.size() / 2, col.data() + col.size());
                st.tau2(z) = std::max(col(col.size() / 2), cfg.threshold_floor);
            }
        }
        st.m_w1 = MatrixXd::Zero(pixels, cfg.hidden_count);
        st.m_w2 = MatrixXd::Zero(cfg.hidden_count, classes);
        st.m_tau1 = RowVectorXd::Zero(cfg.hidden_count);
        st.m_tau2 = RowVectorXd::Zero(classes);

        double lr = cfg.learning_rate;
        double lr_t1 = lr * sigma1;
        double lr_t2 = lr * sigma2;

        TrainerState best_state = st;
        double restart_best_val = -1.0;
        int best_epoch = 0;
        std::vector<double> losses;

        std::vector<int> order(take);
        std::iota(order.begin(), order.end(), 0);

        const int batches = std::max(1, take / cfg.batch_size);
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            shuffle(order, rseed, 0xe90c + static_cast<std::uint64_t>(epoch));
            double epoch_loss = 0.0;
            for (int b = 0; b < batches; ++b) {
                const int lo = b * cfg.batch_size;
                const int hi = std::min(take, lo + cfg.batch_size);
                const int rows = hi - lo;
                MatrixXd xb(rows, pixels);
                std::vector<int> yb(rows);
                for (int r = 0; r < rows; ++r) {
                    xb.row(r) = train_images.row(order[lo + r]);
                    yb[r] = train_labels[order[lo + r]];
                }

                const MatrixXd w1q = quantize_matrix(st.w1, cfg.scale);
                const MatrixXd w2q = quantize_matrix(st.w2, cfg.scale);
                const RowVectorXd t1 = st.tau1.array().round();
                const RowVectorXd t2 = st.tau2.array().round();

                const auto steps = encode_batch(xb, cfg, epoch, b);
                const ForwardRecord rec = forward(steps, w1q, w2q, t1, t2);

                // softmax cross-entropy over mean firing rates
                MatrixXd logits = rec.counts * (cfg.softmax_temperature / t_end);
                MatrixXd probs(rows, classes);
                for (int r = 0; r < rows; ++r) {
                    const double mx = logits.row(r).maxCoeff();
                    probs.row(r) = (logits.row(r).array() - mx).exp();
                    probs.row(r) /= probs.row(r).sum();
                    epoch_loss += -std::log(probs(r, yb[r]) + 1e-12);
                }
                if (!std::isfinite(epoch_loss)) throw DataError("training loss diverged");

                MatrixXd gcount = probs;
                for (int r = 0; r < rows; ++r) gcount(r, yb[r]) -= 1.0;
                gcount *= cfg.softmax_temperature / t_end / rows;

                MatrixXd g_w1 = MatrixXd::Zero(pixels, cfg.hidden_count);
                MatrixXd g_w2 = MatrixXd::Zero(cfg.hidden_count, classes);
                RowVectorXd g_t1 = RowVectorXd::Zero(cfg.hidden_count);
                RowVectorXd g_t2 = RowVectorXd::Zero(classes);
                MatrixXd ga1_next = MatrixXd::Zero(rows, cfg.hidden_count);
                MatrixXd ga2_next = MatrixXd::Zero(rows, classes);

                for (int t = static_cast<int>(steps.size()) - 1; t >= 0; --t) {
                    const MatrixXd d2 = surrogate_grad_matrix(rec.a2[t], t2, sigma2);
                    const MatrixXd gs2 = gcount; // every step's spike feeds the count
                    const MatrixXd ga2 =
                        (gs2.array() * d2.array()).matrix() +
                        (ga2_next.array() * (1.0 - rec.s2[t].array())).matrix();
                    g_t2 -= (gs2.array() * d2.array()).colwise().sum().matrix();
                    g_w2 += rec.s1[t].transpose() * ga2;
                    const MatrixXd gs1 = ga2 * w2q.transpose();
                    const MatrixXd d1 = surrogate_grad_matrix(rec.a1[t], t1, sigma1);
                    const MatrixXd ga1 =
                        (gs1.array() * d1.array()).matrix() +
                        (ga1_next.array() * (1.0 - rec.s1[t].array())).matrix();
                    g_t1 -= (gs1.array() * d1.array()).colwise().sum().matrix();
                    g_w1 += steps[t].transpose() * ga1;
                    ga1_next = ga1;
                    ga2_next = ga2;
                }

                st.m_w1 = cfg.momentum * st.m_w1 + g_w1;
                st.m_w2 = cfg.momentum * st.m_w2 + g_w2;
                st.w1 -= lr * st.m_w1;
                st.w2 -= lr * st.m_w2;
                st.m_tau1 = cfg.momentum * st.m_tau1 + g_t1;
                st.m_tau2 = cfg.momentum * st.m_tau2 + g_t2;
                st.tau1 -= lr_t1 * st.m_tau1;
                st.tau2 -= lr_t2 * st.m_tau2;

                if (cfg.weight_clip > 0) {
                    st.w1 = st.w1.cwiseMax(-cfg.weight_clip).cwiseMin(cfg.weight_clip);
                    st.w2 = st.w2.cwiseMax(-cfg.weight_clip).cwiseMin(cfg.weight_clip);
                }
                st.tau1 = st.tau1.cwiseMax(cfg.threshold_floor);
                st.tau2 = st.tau2.cwiseMax(cfg.threshold_floor);
            }
            losses.push_back(epoch_loss / (static_cast<double>(batches) * cfg.batch_size));

            if (epoch == cfg.epochs / 2 || epoch == (3 * cfg.epochs) / 4) {
                lr *= 0.3;
                lr_t1 *= 0.3;
                lr_t2 *= 0.3;
            }

            const double val_acc = val_images.rows() > 0
                                       ? batch_accuracy(st, cfg, val_images, val_set.labels)
                                       : batch_accuracy(st, cfg, train_images, train_labels);
            if (val_acc > restart_best_val) {
                restart_best_val = val_acc;
                best_state = st;
                best_epoch = epoch;
            }
        }

        if (restart_best_val > best_val) {
            best_val = restart_best_val;
            ProxyWeights proxy;
            proxy.hidden_weights.resize(static_cast<std::size_t>(cfg.hidden_count) * pixels);
            for (int h = 0; h < cfg.hidden_count; ++h)
                for (int i = 0; i < pixels; ++i)
                    proxy.hidden_weights[static_cast<std::size_t>(h) * pixels + i] =
                        best_state.w1(i, h);
            proxy.output_weights.resize(static_cast<std::size_t>(classes) * cfg.hidden_count);
            for (int z = 0; z < classes; ++z)
                for (int h = 0; h < cfg.hidden_count; ++h)
                    proxy.output_weights[static_cast<std::size_t>(z) * cfg.hidden_count + h] =
                        best_state.w2(h, z);
            proxy.hidden_thresholds.assign(best_state.tau1.data(),
                                           best_state.tau1.data() + cfg.hidden_count);
            proxy.output_thresholds.assign(best_state.tau2.data(),
                                           best_state.tau2.data() + classes);

            // inputs never active in the training data carry no signal;
            // zero their proxy columns so the deployed weights are zero too
            for (int i = 0; i < pixels; ++i) {
                bool active = false;
                for (int r = 0; r < take && !active; ++r) {
                    const double intensity = train_images(r, i);
                    active = cfg.encoding == SpikeEncoding::Thresholded ? intensity > 0.5
                                                                        : intensity > 0.0;
                }
                if (!active)
                    for (int h = 0; h < cfg.hidden_count; ++h)
                        proxy.hidden_weights[static_cast<std::size_t>(h) * pixels + i] = 0.0;
            }

            best.proxy = std::move(proxy);
            best.metrics.val_accuracy = restart_best_val;
            best.metrics.epochs = cfg.epochs;
            best.metrics.seed = cfg.seed;
            best.metrics.epoch_losses = losses;
            best.metrics.best_epoch = best_epoch;
            best.metrics.best_restart = restart;
        }
    }

    best.arch = quantize_proxy(best.proxy, pixels, cfg.hidden_count, classes, cfg.scale);
    best.metrics.wall_time_ms = std::chrono::duration<double, std::milli>(
                                    std::chrono::steady_clock::now() - start_time)
                                    .count();
    return best;
}

double evaluate(const NetworkArchitecture& arch, const LabeledDataset& dataset,
                SpikeEncoding encoding, int t_end, std::uint64_t seed) {
    if (dataset.size() == 0) return 0.0;
    int good = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const InputSequence seq =
            encoding == SpikeEncoding::Thresholded
                ? threshold_encode(dataset.images[i])
                : poisson_encode(dataset.images[i], t_end, CounterRng::hash(seed, 0xe7a1, i));
        const DynamicsTrace trace = simulate(arch, seq);
        good += classify(arch, trace) == dataset.labels[i];
    }
    return static_cast<double>(good) / dataset.size();
}

std::string metrics_to_json(const TrainMetrics& metrics) {
    nlohmann::json j;
    j["val_accuracy"] = metrics.val_accuracy;
    j["test_accuracy"] = metrics.test_accuracy;
    j["epochs"] = metrics.epochs;
    j["seed"] = metrics.seed;
    j["epoch_losses"] = metrics.epoch_losses;
    j["best_epoch"] = metrics.best_epoch;
    j["best_restart"] = metrics.best_restart;
    j["wall_time_ms"] = metrics.wall_time_ms;
    return j.dump(1);
}

} // namespace bsnn
