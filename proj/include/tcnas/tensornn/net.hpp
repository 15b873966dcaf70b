#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tcnas/common/rng.hpp"
#include "tcnas/tensornn/arch.hpp"

namespace tcnas::tensornn {

// Batch-major activation buffer: index (b, l, c) -> v[(b*length + l)*channels + c].
template <class T>
struct TensorT {
    int batch = 0, length = 0, channels = 0;
    std::vector<T> v;

    TensorT() = default;
    TensorT(int b, int l, int c)
        : batch(b), length(l), channels(c),
          v(static_cast<size_t>(b) * static_cast<size_t>(l) * static_cast<size_t>(c)) {}

    size_t size() const { return v.size(); }
    T* row(int b, int l) { return v.data() + (static_cast<size_t>(b) * length + l) * channels; }
    const T* row(int b, int l) const {
        return v.data() + (static_cast<size_t>(b) * length + l) * channels;
    }
    T& at(int b, int l, int c) { return row(b, l)[c]; }
    T at(int b, int l, int c) const { return row(b, l)[c]; }
};

using Tensor = TensorT<float>;

enum class Mode { train, eval };

template <class T>
struct ConvParams {
    int kernel = 0, stride = 0, cin = 0, cout = 0;
    Padding padding = Padding::valid;
    std::vector<T> w;    // [kernel][cin][cout]
    std::vector<T> bias; // [cout]
    const T* wk(int k) const { return w.data() + static_cast<size_t>(k) * cin * cout; }
};

template <class T>
struct BnParams {
    int ch = 0;
    std::vector<T> gamma, beta, moving_mean, moving_var;
};

template <class T>
struct DenseParams {
    int cin = 0, classes = 0;
    std::vector<T> w; // [cin][classes]
    std::vector<T> b; // [classes]
};

template <class T>
struct BlockParams {
    ConvParams<T> conv;
    BnParams<T> bn;
};

// Instantiated network. Weights are the only mutable state; forward passes are
// const so an immutable model can be shared across threads.
template <class T>
struct NetT {
    ArchSpec spec;
    std::vector<BlockParams<T>> blocks;
    DenseParams<T> dense;

    // Trainable tensors in a fixed order: per block conv.w, conv.bias, bn.gamma,
    // bn.beta; then dense.w, dense.b. Adam state and checkpoints share it.
    void visit_trainable(const std::function<void(std::vector<T>&)>& fn);
    // Trainable + BN moving statistics (checkpoint/parameter-count order).
    void visit_all(const std::function<void(std::vector<T>&)>& fn);
    void visit_all_const(const std::function<void(const std::vector<T>&)>& fn) const;
    size_t scalar_count() const;
};

using Net = NetT<float>;

struct BnEps {
    static constexpr double value = 1e-3;
    static constexpr double momentum = 0.99;
};

template <class T>
struct BlockTrace {
    TensorT<T> xhat;                  // normalized conv output, train mode only
    std::vector<T> mean, var, inv_std; // batch statistics (train mode)
    TensorT<T> relu_out;              // pool input / relu mask source
    std::vector<int32_t> pool_argmax; // max pool only, absolute input index per output elem
    TensorT<T> out;                   // block output (after pool/dropout)
    std::vector<uint8_t> drop_keep;   // train mode with dropout only
};

template <class T>
struct ForwardTrace {
    std::vector<BlockTrace<T>> blocks;
    TensorT<T> gap_out;
    TensorT<T> logits; // length 1
    TensorT<T> probs;
    Mode mode = Mode::eval;
};

// Gradients of the mean cross-entropy w.r.t. every trainable tensor,
// in visit_trainable order.
template <class T>
struct Gradients {
    std::vector<std::vector<T>> tensors;
};

template <class T>
NetT<T> build(const ArchSpec& spec, uint64_t seed);

// Softmax probabilities (B x classes). In train mode BN uses batch statistics
// and dropout is sampled from dropout_rng (required if any block has rate > 0);
// eval mode uses moving statistics and skips dropout. Never mutates the net.
template <class T>
TensorT<T> forward(const NetT<T>& net, const TensorT<T>& batch, Mode mode,
                   ForwardTrace<T>* trace = nullptr, Rng* dropout_rng = nullptr);

template <class T>
T mean_cross_entropy(const TensorT<T>& probs, const std::vector<int>& labels);

// Train-mode forward + exact backprop to all trainable tensors. Moving BN
// statistics are not touched; callers apply update_bn_moving_stats per step.
template <class T>
struct LossGrads {
    T loss{};
    Gradients<T> grads;
};

template <class T>
LossGrads<T> loss_and_grads(const NetT<T>& net, const TensorT<T>& batch,
                            const std::vector<int>& labels, Rng* dropout_rng = nullptr,
                            ForwardTrace<T>* trace_out = nullptr);

// Exact gradient of the mean cross-entropy w.r.t. the input, in eval mode.
template <class T>
TensorT<T> input_gradient(const NetT<T>& net, const TensorT<T>& batch,
                          const std::vector<int>& labels);

// moving <- momentum * moving + (1 - momentum) * batch_stat, from a train trace.
template <class T>
void update_bn_moving_stats(NetT<T>& net, const ForwardTrace<T>& trace,
                            double momentum = BnEps::momentum);

} // namespace tcnas::tensornn
