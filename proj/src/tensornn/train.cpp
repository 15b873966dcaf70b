#include "tcnas/tensornn/train.hpp"

#include <algorithm>
#include <cmath>

#include "tcnas/common/error.hpp"

namespace tcnas::tensornn {

namespace {
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-7;
} // namespace

template <class T>
AdamState<T> AdamState<T>::init(NetT<T>& net) {
    AdamState<T> st;
    net.visit_trainable([&st](std::vector<T>& w) {
        st.m.emplace_back(w.size(), T(0));
        st.v.emplace_back(w.size(), T(0));
    });
    return st;
}

template <class T>
void AdamState<T>::step(NetT<T>& net, const Gradients<T>& grads, double lr) {
    ++t;
    const T b1 = static_cast<T>(kAdamBeta1), b2 = static_cast<T>(kAdamBeta2);
    const T c1 = static_cast<T>(1.0 - std::pow(kAdamBeta1, static_cast<double>(t)));
    const T c2 = static_cast<T>(1.0 - std::pow(kAdamBeta2, static_cast<double>(t)));
    const T eps = static_cast<T>(kAdamEps);
    const T step_lr = static_cast<T>(lr);
    size_t ti = 0;
    net.visit_trainable([&](std::vector<T>& w) {
        auto& mt = m[ti];
        auto& vt = v[ti];
        const auto& g = grads.tensors[ti];
        for (size_t i = 0; i < w.size(); ++i) {
            mt[i] = b1 * mt[i] + (T(1) - b1) * g[i];
            vt[i] = b2 * vt[i] + (T(1) - b2) * g[i] * g[i];
            const T mhat = mt[i] / c1;
            const T vhat = vt[i] / c2;
            w[i] -= step_lr * mhat / (std::sqrt(vhat) + eps);
        }
        ++ti;
    });
}

template <class T>
void fill_batch(const flowio::Dataset& ds, std::span<const size_t> indices, TensorT<T>& data,
                TensorT<T>* mask, std::vector<int>* labels) {
    const int B = static_cast<int>(indices.size());
    const int L = static_cast<int>(ds.dim0);
    const int C = static_cast<int>(ds.dim1);
    data = TensorT<T>(B, L, C);
    if (mask) *mask = TensorT<T>(B, L, C);
    if (labels) labels->resize(indices.size());
    constexpr T kInv255 = T(1) / T(255);
    const size_t elems = ds.elems();
    for (int b = 0; b < B; ++b) {
        const auto& s = ds.samples[indices[b]];
        T* dst = data.row(b, 0);
        for (size_t j = 0; j < elems; ++j) dst[j] = static_cast<T>(s.bytes[j]) * kInv255;
        if (mask) {
            T* mdst = mask->row(b, 0);
            for (size_t j = 0; j < elems; ++j) mdst[j] = static_cast<T>(s.mask[j]);
        }
        if (labels) (*labels)[b] = s.label;
    }
}

double evaluate_indices(const Net& model, const flowio::Dataset& ds,
                        std::span<const size_t> indices) {
    if (indices.empty()) fail("EmptySplit", "evaluate on zero samples");
    constexpr size_t kEvalBatch = 256;
    size_t correct = 0;
    Tensor batch;
    std::vector<int> labels;
    for (size_t start = 0; start < indices.size(); start += kEvalBatch) {
        const size_t n = std::min(kEvalBatch, indices.size() - start);
        fill_batch<float>(ds, indices.subspan(start, n), batch, nullptr, &labels);
        const Tensor probs = forward(model, batch, Mode::eval);
        for (size_t b = 0; b < n; ++b) {
            const float* p = probs.row(static_cast<int>(b), 0);
            int arg = 0;
            for (int k = 1; k < probs.channels; ++k)
                if (p[k] > p[arg]) arg = k;
            if (arg == labels[b]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(indices.size());
}

double evaluate(const Net& model, const flowio::Dataset& ds, flowio::Split split) {
    const auto idx = ds.indices_of(split);
    if (idx.empty()) fail("EmptySplit", "split has no samples");
    return evaluate_indices(model, ds, idx);
}

std::pair<Net, History> train(Net model, const flowio::Dataset& ds, const TrainConfig& cfg) {
    if (!(cfg.plateau.decay > 0.0 && cfg.plateau.decay < 1.0))
        fail("InvalidArgument", "plateau decay must lie in (0, 1)");
    const auto train_idx = ds.indices_of(flowio::Split::train);
    const auto val_idx = ds.indices_of(flowio::Split::val);
    if (train_idx.empty() || val_idx.empty())
        fail("EmptySplit", "training requires non-empty train and val splits");

    Rng rng(mix_seed(cfg.seed, 0x7247));
    auto adam = AdamState<float>::init(model);
    History hist;
    double lr = cfg.lr0;
    double best_acc = -1.0;
    Net best = model;
    int stagnant = 0, plateau_wait = 0;

    std::vector<size_t> order(train_idx);
    Tensor batch;
    std::vector<int> labels;
    ForwardTrace<float> trace;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        Rng epoch_rng = rng.fork(static_cast<uint64_t>(epoch));
        epoch_rng.shuffle(order);
        double loss_sum = 0.0;
        size_t seen = 0;
        int step = 0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size, ++step) {
            const size_t n = std::min<size_t>(cfg.batch_size, order.size() - start);
            fill_batch<float>(ds, std::span<const size_t>(order).subspan(start, n), batch,
                              nullptr, &labels);
            Rng step_rng = epoch_rng.fork(0x57e0 + static_cast<uint64_t>(step));
            auto lg = loss_and_grads(model, batch, labels, &step_rng, &trace);
            update_bn_moving_stats(model, trace);
            adam.step(model, lg.grads, lr);
            loss_sum += static_cast<double>(lg.loss) * static_cast<double>(n);
            seen += n;
        }

        const double val_acc = evaluate_indices(model, ds, val_idx);
        hist.train_loss.push_back(loss_sum / static_cast<double>(seen));
        hist.val_accuracy.push_back(val_acc);
        hist.lr.push_back(lr);

        if (val_acc > best_acc) {
            best_acc = val_acc;
            best = model;
            hist.best_epoch = epoch;
            stagnant = 0;
            plateau_wait = 0;
        } else {
            ++stagnant;
            ++plateau_wait;
            if (plateau_wait >= cfg.plateau.patience) {
                lr *= cfg.plateau.decay;
                plateau_wait = 0;
            }
            if (stagnant >= cfg.early_stop_patience) break;
        }
    }
    return {std::move(best), std::move(hist)};
}

nlohmann::json History::to_json() const {
    return {{"train_loss", train_loss},
            {"val_accuracy", val_accuracy},
            {"lr", lr},
            {"best_epoch", best_epoch}};
}

template struct AdamState<float>;
template struct AdamState<double>;
template void fill_batch<float>(const flowio::Dataset&, std::span<const size_t>, TensorT<float>&,
                                TensorT<float>*, std::vector<int>*);
template void fill_batch<double>(const flowio::Dataset&, std::span<const size_t>, TensorT<double>&,
                                 TensorT<double>*, std::vector<int>*);

} // namespace tcnas::tensornn
