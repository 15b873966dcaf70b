#include "tcnas/tensornn/net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tcnas/common/error.hpp"
#include "tcnas/hwcost/cost.hpp"

namespace tcnas::tensornn {

namespace {

struct ConvGeom {
    int lin = 0, lout = 0, pad_left = 0;
};

// valid: floor((L-k)/s)+1, no padding. same: ceil(L/s), symmetric zero padding
// with the extra element on the right.
template <class T>
ConvGeom conv_geometry(int lin, const ConvParams<T>& p) {
    ConvGeom g;
    g.lin = lin;
    if (p.padding == Padding::valid) {
        g.lout = (lin - p.kernel) / p.stride + 1;
        g.pad_left = 0;
    } else {
        g.lout = (lin + p.stride - 1) / p.stride;
        const int pad_total = std::max(0, (g.lout - 1) * p.stride + p.kernel - lin);
        g.pad_left = pad_total / 2;
    }
    return g;
}

template <class T>
void conv_forward(const TensorT<T>& in, const ConvParams<T>& p, const ConvGeom& g,
                  TensorT<T>& out) {
    const int B = in.batch, Ci = p.cin, Co = p.cout;
    out = TensorT<T>(B, g.lout, Co);
    for (int b = 0; b < B; ++b) {
        for (int o = 0; o < g.lout; ++o) {
            T* y = out.row(b, o);
            for (int f = 0; f < Co; ++f) y[f] = p.bias[f];
            const int base = o * p.stride - g.pad_left;
            for (int k = 0; k < p.kernel; ++k) {
                const int i = base + k;
                if (i < 0 || i >= g.lin) continue;
                const T* x = in.row(b, i);
                const T* wk = p.wk(k);
                for (int c = 0; c < Ci; ++c) {
                    const T xv = x[c];
                    if (xv == T(0)) continue; // padded/zero inputs are common
                    const T* wrow = wk + static_cast<size_t>(c) * Co;
                    for (int f = 0; f < Co; ++f) y[f] += xv * wrow[f];
                }
            }
        }
    }
}

// Accumulates dW/db (when requested) and dIn in one pass over the output grid.
template <class T>
void conv_backward(const TensorT<T>& in, const ConvParams<T>& p, const ConvGeom& g,
                   const TensorT<T>& dout, std::vector<T>* dw, std::vector<T>* db,
                   TensorT<T>* din) {
    const int B = in.batch, Ci = p.cin, Co = p.cout;
    if (din) *din = TensorT<T>(B, g.lin, Ci);
    for (int b = 0; b < B; ++b) {
        for (int o = 0; o < g.lout; ++o) {
            const T* dy = dout.row(b, o);
            if (db)
                for (int f = 0; f < Co; ++f) (*db)[f] += dy[f];
            const int base = o * p.stride - g.pad_left;
            for (int k = 0; k < p.kernel; ++k) {
                const int i = base + k;
                if (i < 0 || i >= g.lin) continue;
                const T* x = in.row(b, i);
                const T* wk = p.wk(k);
                if (dw) {
                    T* dwk = dw->data() + static_cast<size_t>(k) * Ci * Co;
                    T* dx = din ? din->row(b, i) : nullptr;
                    for (int c = 0; c < Ci; ++c) {
                        const T xv = x[c];
                        T* dwrow = dwk + static_cast<size_t>(c) * Co;
                        const T* wrow = wk + static_cast<size_t>(c) * Co;
                        T acc = 0;
                        for (int f = 0; f < Co; ++f) {
                            dwrow[f] += xv * dy[f];
                            acc += wrow[f] * dy[f];
                        }
                        if (dx) dx[c] += acc;
                    }
                } else {
                    T* dx = din->row(b, i);
                    for (int c = 0; c < Ci; ++c) {
                        const T* wrow = wk + static_cast<size_t>(c) * Co;
                        T acc = 0;
                        for (int f = 0; f < Co; ++f) acc += wrow[f] * dy[f];
                        dx[c] += acc;
                    }
                }
            }
        }
    }
}

template <class T>
void bn_forward_train(const TensorT<T>& in, const BnParams<T>& p, BlockTrace<T>& tr,
                      TensorT<T>& out) {
    const int B = in.batch, L = in.length, C = p.ch;
    const T n = static_cast<T>(B) * static_cast<T>(L);
    tr.mean.assign(C, T(0));
    tr.var.assign(C, T(0));
    tr.inv_std.assign(C, T(0));
    for (int b = 0; b < B; ++b)
        for (int l = 0; l < L; ++l) {
            const T* x = in.row(b, l);
            for (int c = 0; c < C; ++c) tr.mean[c] += x[c];
        }
    for (int c = 0; c < C; ++c) tr.mean[c] /= n;
    for (int b = 0; b < B; ++b)
        for (int l = 0; l < L; ++l) {
            const T* x = in.row(b, l);
            for (int c = 0; c < C; ++c) {
                const T d = x[c] - tr.mean[c];
                tr.var[c] += d * d;
            }
        }
    for (int c = 0; c < C; ++c) {
        tr.var[c] /= n; // biased variance, also used for the moving average
        tr.inv_std[c] = T(1) / std::sqrt(tr.var[c] + static_cast<T>(BnEps::value));
    }
    tr.xhat = TensorT<T>(B, L, C);
    out = TensorT<T>(B, L, C);
    for (int b = 0; b < B; ++b)
        for (int l = 0; l < L; ++l) {
            const T* x = in.row(b, l);
            T* xh = tr.xhat.row(b, l);
            T* y = out.row(b, l);
            for (int c = 0; c < C; ++c) {
                xh[c] = (x[c] - tr.mean[c]) * tr.inv_std[c];
                y[c] = p.gamma[c] * xh[c] + p.beta[c];
            }
        }
}

template <class T>
void bn_forward_eval(const TensorT<T>& in, const BnParams<T>& p, TensorT<T>& out) {
    const int B = in.batch, L = in.length, C = p.ch;
    std::vector<T> scale(C), shift(C);
    for (int c = 0; c < C; ++c) {
        const T inv = T(1) / std::sqrt(p.moving_var[c] + static_cast<T>(BnEps::value));
        scale[c] = p.gamma[c] * inv;
        shift[c] = p.beta[c] - p.moving_mean[c] * scale[c];
    }
    out = TensorT<T>(B, L, C);
    for (int b = 0; b < B; ++b)
        for (int l = 0; l < L; ++l) {
            const T* x = in.row(b, l);
            T* y = out.row(b, l);
            for (int c = 0; c < C; ++c) y[c] = x[c] * scale[c] + shift[c];
        }
}

// Train-mode BN backward through the batch statistics:
// dx = gamma*inv_std/N * (N*dy - sum(dy) - xhat * sum(dy*xhat))
template <class T>
void bn_backward_train(const BnParams<T>& p, const BlockTrace<T>& tr, const TensorT<T>& dout,
                       std::vector<T>& dgamma, std::vector<T>& dbeta, TensorT<T>& din) {
    const int B = dout.batch, L = dout.length, C = p.ch;
    const T n = static_cast<T>(B) * static_cast<T>(L);
    std::vector<T> sum_dy(C, T(0)), sum_dy_xhat(C, T(0));
    for (int b = 0; b < B; ++b)
        for (int l = 0; l < L; ++l) {
            const T* dy = dout.row(b, l);
            const T* xh = tr.xhat.row(b, l);
            for (int c = 0; c < C; ++c) {
                sum_dy[c] += dy[c];
                sum_dy_xhat[c] += dy[c] * xh[c];
            }
        }
    for (int c = 0; c < C; ++c) {
        dgamma[c] += sum_dy_xhat[c];
        dbeta[c] += sum_dy[c];
    }
    din = TensorT<T>(B, L, C);
    std::vector<T> k(C);
    for (int c = 0; c < C; ++c) k[c] = p.gamma[c] * tr.inv_std[c] / n;
    for (int b = 0; b < B; ++b)
        for (int l = 0; l < L; ++l) {
            const T* dy = dout.row(b, l);
            const T* xh = tr.xhat.row(b, l);
            T* dx = din.row(b, l);
            for (int c = 0; c < C; ++c)
                dx[c] = k[c] * (n * dy[c] - sum_dy[c] - xh[c] * sum_dy_xhat[c]);
        }
}

// Eval-mode BN is a per-channel affine map.
template <class T>
void bn_backward_eval(const BnParams<T>& p, const TensorT<T>& dout, TensorT<T>& din) {
    const int B = dout.batch, L = dout.length, C = p.ch;
    std::vector<T> scale(C);
    for (int c = 0; c < C; ++c)
        scale[c] = p.gamma[c] / std::sqrt(p.moving_var[c] + static_cast<T>(BnEps::value));
    din = TensorT<T>(B, L, C);
    for (int b = 0; b < B; ++b)
        for (int l = 0; l < L; ++l) {
            const T* dy = dout.row(b, l);
            T* dx = din.row(b, l);
            for (int c = 0; c < C; ++c) dx[c] = dy[c] * scale[c];
        }
}

template <class T>
void relu_forward(TensorT<T>& x) {
    for (auto& v : x.v) v = v > T(0) ? v : T(0);
}

template <class T>
void relu_backward(const TensorT<T>& relu_out, TensorT<T>& d) {
    for (size_t i = 0; i < d.v.size(); ++i)
        if (!(relu_out.v[i] > T(0))) d.v[i] = T(0);
}

// Non-overlapping windows with ceil-mode output length; the last window may be
// partial. Average pooling divides by the actual window size.
template <class T>
void pool_forward(const TensorT<T>& in, const PoolSpec& p, BlockTrace<T>& tr, bool keep_argmax,
                  TensorT<T>& out) {
    const int B = in.batch, L = in.length, C = in.channels;
    const int Lo = (L + p.size - 1) / p.size;
    out = TensorT<T>(B, Lo, C);
    if (p.kind == PoolKind::max && keep_argmax)
        tr.pool_argmax.assign(static_cast<size_t>(B) * Lo * C, 0);
    for (int b = 0; b < B; ++b) {
        for (int o = 0; o < Lo; ++o) {
            const int start = o * p.size;
            const int end = std::min(start + p.size, L);
            T* y = out.row(b, o);
            if (p.kind == PoolKind::avg) {
                const T inv = T(1) / static_cast<T>(end - start);
                for (int c = 0; c < C; ++c) y[c] = T(0);
                for (int l = start; l < end; ++l) {
                    const T* x = in.row(b, l);
                    for (int c = 0; c < C; ++c) y[c] += x[c];
                }
                for (int c = 0; c < C; ++c) y[c] *= inv;
            } else {
                int32_t* arg = keep_argmax
                                   ? tr.pool_argmax.data() + (static_cast<size_t>(b) * Lo + o) * C
                                   : nullptr;
                const T* x0 = in.row(b, start);
                for (int c = 0; c < C; ++c) {
                    y[c] = x0[c];
                    if (arg) arg[c] = start;
                }
                for (int l = start + 1; l < end; ++l) {
                    const T* x = in.row(b, l);
                    for (int c = 0; c < C; ++c)
                        if (x[c] > y[c]) {
                            y[c] = x[c];
                            if (arg) arg[c] = l;
                        }
                }
            }
        }
    }
}

template <class T>
void pool_backward(const PoolSpec& p, const BlockTrace<T>& tr, const TensorT<T>& dout, int lin,
                   TensorT<T>& din) {
    const int B = dout.batch, Lo = dout.length, C = dout.channels;
    din = TensorT<T>(B, lin, C);
    for (int b = 0; b < B; ++b) {
        for (int o = 0; o < Lo; ++o) {
            const T* dy = dout.row(b, o);
            if (p.kind == PoolKind::avg) {
                const int start = o * p.size;
                const int end = std::min(start + p.size, lin);
                const T inv = T(1) / static_cast<T>(end - start);
                for (int l = start; l < end; ++l) {
                    T* dx = din.row(b, l);
                    for (int c = 0; c < C; ++c) dx[c] += dy[c] * inv;
                }
            } else {
                const int32_t* arg = tr.pool_argmax.data() + (static_cast<size_t>(b) * Lo + o) * C;
                for (int c = 0; c < C; ++c) din.at(b, arg[c], c) += dy[c];
            }
        }
    }
}

// Inverted dropout: scale kept activations by 1/(1-rate) at train time.
template <class T>
void dropout_forward_train(TensorT<T>& x, float rate, Rng& rng, std::vector<uint8_t>& keep) {
    const T scale = T(1) / static_cast<T>(1.0 - rate);
    keep.resize(x.v.size());
    for (size_t i = 0; i < x.v.size(); ++i) {
        const bool k = rng.unit() >= rate;
        keep[i] = k;
        x.v[i] = k ? x.v[i] * scale : T(0);
    }
}

template <class T>
void dropout_backward(const std::vector<uint8_t>& keep, float rate, TensorT<T>& d) {
    const T scale = T(1) / static_cast<T>(1.0 - rate);
    for (size_t i = 0; i < d.v.size(); ++i) d.v[i] = keep[i] ? d.v[i] * scale : T(0);
}

template <class T>
void gap_forward(const TensorT<T>& in, TensorT<T>& out) {
    const int B = in.batch, L = in.length, C = in.channels;
    out = TensorT<T>(B, 1, C);
    const T inv = T(1) / static_cast<T>(L);
    for (int b = 0; b < B; ++b) {
        T* y = out.row(b, 0);
        for (int l = 0; l < L; ++l) {
            const T* x = in.row(b, l);
            for (int c = 0; c < C; ++c) y[c] += x[c];
        }
        for (int c = 0; c < C; ++c) y[c] *= inv;
    }
}

template <class T>
void gap_backward(const TensorT<T>& dout, int lin, TensorT<T>& din) {
    const int B = dout.batch, C = dout.channels;
    din = TensorT<T>(B, lin, C);
    const T inv = T(1) / static_cast<T>(lin);
    for (int b = 0; b < B; ++b) {
        const T* dy = dout.row(b, 0);
        for (int l = 0; l < lin; ++l) {
            T* dx = din.row(b, l);
            for (int c = 0; c < C; ++c) dx[c] = dy[c] * inv;
        }
    }
}

template <class T>
void dense_forward(const TensorT<T>& in, const DenseParams<T>& p, TensorT<T>& out) {
    const int B = in.batch, C = p.cin, K = p.classes;
    out = TensorT<T>(B, 1, K);
    for (int b = 0; b < B; ++b) {
        const T* x = in.row(b, 0);
        T* y = out.row(b, 0);
        for (int k = 0; k < K; ++k) y[k] = p.b[k];
        for (int c = 0; c < C; ++c) {
            const T xv = x[c];
            const T* wrow = p.w.data() + static_cast<size_t>(c) * K;
            for (int k = 0; k < K; ++k) y[k] += xv * wrow[k];
        }
    }
}

template <class T>
void dense_backward(const TensorT<T>& in, const DenseParams<T>& p, const TensorT<T>& dout,
                    std::vector<T>& dw, std::vector<T>& db, TensorT<T>& din) {
    const int B = in.batch, C = p.cin, K = p.classes;
    din = TensorT<T>(B, 1, C);
    for (int b = 0; b < B; ++b) {
        const T* x = in.row(b, 0);
        const T* dy = dout.row(b, 0);
        T* dx = din.row(b, 0);
        for (int k = 0; k < K; ++k) db[k] += dy[k];
        for (int c = 0; c < C; ++c) {
            const T xv = x[c];
            T* dwrow = dw.data() + static_cast<size_t>(c) * K;
            const T* wrow = p.w.data() + static_cast<size_t>(c) * K;
            T acc = 0;
            for (int k = 0; k < K; ++k) {
                dwrow[k] += xv * dy[k];
                acc += wrow[k] * dy[k];
            }
            dx[c] = acc;
        }
    }
}

template <class T>
void softmax_rows(const TensorT<T>& logits, TensorT<T>& probs) {
    const int B = logits.batch, K = logits.channels;
    probs = TensorT<T>(B, 1, K);
    for (int b = 0; b < B; ++b) {
        const T* z = logits.row(b, 0);
        T* p = probs.row(b, 0);
        T m = z[0];
        for (int k = 1; k < K; ++k) m = std::max(m, z[k]);
        T sum = 0;
        for (int k = 0; k < K; ++k) {
            p[k] = std::exp(z[k] - m);
            sum += p[k];
        }
        const T inv = T(1) / sum;
        for (int k = 0; k < K; ++k) p[k] *= inv;
    }
}

inline bool has_dropout(const ArchSpec& spec) {
    for (const auto& b : spec.blocks)
        if (b.dropout > 0.0f) return true;
    return false;
}

} // namespace

template <class T>
NetT<T> build(const ArchSpec& spec, uint64_t seed) {
    hwcost::shape_plan(spec); // throws InvalidSpec on a broken genome

    NetT<T> net;
    net.spec = spec;
    Rng rng(mix_seed(seed, 0x1b07));
    int cin = spec.input.channels;
    for (const auto& b : spec.blocks) {
        BlockParams<T> blk;
        auto& cv = blk.conv;
        cv.kernel = b.kernel;
        cv.stride = b.stride;
        cv.padding = b.padding;
        cv.cin = cin;
        cv.cout = b.filters;
        cv.w.resize(static_cast<size_t>(b.kernel) * cin * b.filters);
        cv.bias.assign(b.filters, T(0));
        const double limit = std::sqrt(6.0 / (static_cast<double>(b.kernel) * cin));
        for (auto& w : cv.w) w = static_cast<T>(rng.uniform_real(-limit, limit));

        blk.bn.ch = b.filters;
        blk.bn.gamma.assign(b.filters, T(1));
        blk.bn.beta.assign(b.filters, T(0));
        blk.bn.moving_mean.assign(b.filters, T(0));
        blk.bn.moving_var.assign(b.filters, T(1));
        net.blocks.push_back(std::move(blk));
        cin = b.filters;
    }
    net.dense.cin = cin;
    net.dense.classes = spec.num_classes;
    net.dense.w.resize(static_cast<size_t>(cin) * spec.num_classes);
    net.dense.b.assign(spec.num_classes, T(0));
    const double limit = std::sqrt(6.0 / static_cast<double>(cin));
    for (auto& w : net.dense.w) w = static_cast<T>(rng.uniform_real(-limit, limit));
    return net;
}

template <class T>
TensorT<T> forward(const NetT<T>& net, const TensorT<T>& batch, Mode mode,
                   ForwardTrace<T>* trace, Rng* dropout_rng) {
    if (batch.length != net.spec.input.length || batch.channels != net.spec.input.channels)
        fail("ShapeMismatch", "batch is " + std::to_string(batch.length) + "x" +
                                  std::to_string(batch.channels) + ", model expects " +
                                  std::to_string(net.spec.input.length) + "x" +
                                  std::to_string(net.spec.input.channels));
    if (mode == Mode::train && has_dropout(net.spec) && dropout_rng == nullptr)
        fail("InvalidArgument", "train-mode forward with dropout requires an rng");

    ForwardTrace<T> local;
    ForwardTrace<T>& tr = trace ? *trace : local;
    tr.mode = mode;
    tr.blocks.assign(net.blocks.size(), {});

    const TensorT<T>* cur = &batch;
    for (size_t i = 0; i < net.blocks.size(); ++i) {
        const auto& blk = net.blocks[i];
        auto& btr = tr.blocks[i];
        const ConvGeom g = conv_geometry(cur->length, blk.conv);

        TensorT<T> conv_out;
        conv_forward(*cur, blk.conv, g, conv_out);
        TensorT<T> bn_out;
        if (mode == Mode::train)
            bn_forward_train(conv_out, blk.bn, btr, bn_out);
        else
            bn_forward_eval(conv_out, blk.bn, bn_out);
        relu_forward(bn_out);
        btr.relu_out = std::move(bn_out);

        const auto& bspec = net.spec.blocks[i];
        TensorT<T> out;
        if (bspec.pool)
            pool_forward(btr.relu_out, *bspec.pool, btr, /*keep_argmax=*/true, out);
        else
            out = btr.relu_out;
        if (mode == Mode::train && bspec.dropout > 0.0f)
            dropout_forward_train(out, bspec.dropout, *dropout_rng, btr.drop_keep);
        btr.out = std::move(out);
        cur = &btr.out;
    }

    gap_forward(*cur, tr.gap_out);
    dense_forward(tr.gap_out, net.dense, tr.logits);
    softmax_rows(tr.logits, tr.probs);
    return tr.probs;
}

template <class T>
T mean_cross_entropy(const TensorT<T>& probs, const std::vector<int>& labels) {
    const int B = probs.batch;
    if (static_cast<int>(labels.size()) != B)
        fail("ShapeMismatch", "labels/batch size mismatch");
    T loss = 0;
    for (int b = 0; b < B; ++b) {
        const T p = std::max(probs.at(b, 0, labels[b]), std::numeric_limits<T>::min());
        loss -= std::log(p);
    }
    return loss / static_cast<T>(B);
}

namespace {

// Shared backward walk. grads == nullptr skips weight gradients (attack path);
// din == nullptr skips the input gradient (training path stops at block 0).
template <class T>
void backward(const NetT<T>& net, const TensorT<T>& batch, const std::vector<int>& labels,
              const ForwardTrace<T>& tr, Gradients<T>* grads, TensorT<T>* din) {
    const int B = batch.batch;
    const int K = net.dense.classes;
    const size_t nb = net.blocks.size();

    // d(mean CE)/d(logits) = (softmax - onehot) / B
    TensorT<T> dlogits(B, 1, K);
    const T invb = T(1) / static_cast<T>(B);
    for (int b = 0; b < B; ++b) {
        const T* p = tr.probs.row(b, 0);
        T* d = dlogits.row(b, 0);
        for (int k = 0; k < K; ++k) d[k] = p[k] * invb;
        d[labels[b]] -= invb;
    }

    std::vector<T> dw_scratch, db_scratch;
    std::vector<T>* dense_dw = grads ? &grads->tensors[4 * nb] : &dw_scratch;
    std::vector<T>* dense_db = grads ? &grads->tensors[4 * nb + 1] : &db_scratch;
    if (!grads) {
        dw_scratch.assign(net.dense.w.size(), T(0));
        db_scratch.assign(net.dense.b.size(), T(0));
    }
    TensorT<T> d; // gradient flowing backwards
    dense_backward(tr.gap_out, net.dense, dlogits, *dense_dw, *dense_db, d);

    const TensorT<T>& gap_in = nb > 0 ? tr.blocks[nb - 1].out : batch;
    TensorT<T> dcur;
    gap_backward(d, gap_in.length, dcur);

    for (size_t ri = nb; ri-- > 0;) {
        const auto& blk = net.blocks[ri];
        const auto& bspec = net.spec.blocks[ri];
        const auto& btr = tr.blocks[ri];
        const TensorT<T>& conv_in = ri > 0 ? tr.blocks[ri - 1].out : batch;

        if (tr.mode == Mode::train && bspec.dropout > 0.0f)
            dropout_backward(btr.drop_keep, bspec.dropout, dcur);
        if (bspec.pool) {
            TensorT<T> dpool;
            pool_backward(*bspec.pool, btr, dcur, btr.relu_out.length, dpool);
            dcur = std::move(dpool);
        }
        relu_backward(btr.relu_out, dcur);

        TensorT<T> dconv_out;
        if (tr.mode == Mode::train) {
            std::vector<T> g_scratch, b_scratch;
            std::vector<T>* dgamma = grads ? &grads->tensors[4 * ri + 2] : &g_scratch;
            std::vector<T>* dbeta = grads ? &grads->tensors[4 * ri + 3] : &b_scratch;
            if (!grads) {
                g_scratch.assign(blk.bn.ch, T(0));
                b_scratch.assign(blk.bn.ch, T(0));
            }
            bn_backward_train(blk.bn, btr, dcur, *dgamma, *dbeta, dconv_out);
        } else {
            bn_backward_eval(blk.bn, dcur, dconv_out);
        }

        const ConvGeom g = conv_geometry(conv_in.length, blk.conv);
        const bool need_dx = ri > 0 || din != nullptr;
        TensorT<T> dprev;
        conv_backward(conv_in, blk.conv, g, dconv_out, grads ? &grads->tensors[4 * ri] : nullptr,
                      grads ? &grads->tensors[4 * ri + 1] : nullptr, need_dx ? &dprev : nullptr);
        dcur = std::move(dprev);
    }
    if (din) *din = std::move(dcur);
}

template <class T>
Gradients<T> zero_grads(const NetT<T>& net) {
    Gradients<T> g;
    g.tensors.reserve(4 * net.blocks.size() + 2);
    for (const auto& blk : net.blocks) {
        g.tensors.emplace_back(blk.conv.w.size(), T(0));
        g.tensors.emplace_back(blk.conv.bias.size(), T(0));
        g.tensors.emplace_back(blk.bn.gamma.size(), T(0));
        g.tensors.emplace_back(blk.bn.beta.size(), T(0));
    }
    g.tensors.emplace_back(net.dense.w.size(), T(0));
    g.tensors.emplace_back(net.dense.b.size(), T(0));
    return g;
}

} // namespace

template <class T>
LossGrads<T> loss_and_grads(const NetT<T>& net, const TensorT<T>& batch,
                            const std::vector<int>& labels, Rng* dropout_rng,
                            ForwardTrace<T>* trace_out) {
    if (static_cast<int>(labels.size()) != batch.batch)
        fail("ShapeMismatch", "labels/batch size mismatch");
    for (int y : labels)
        if (y < 0 || y >= net.spec.num_classes) fail("ShapeMismatch", "label out of range");

    ForwardTrace<T> local;
    ForwardTrace<T>& tr = trace_out ? *trace_out : local;
    forward(net, batch, Mode::train, &tr, dropout_rng);

    LossGrads<T> result;
    result.loss = mean_cross_entropy(tr.probs, labels);
    result.grads = zero_grads(net);
    backward(net, batch, labels, tr, &result.grads, static_cast<TensorT<T>*>(nullptr));
    return result;
}

template <class T>
TensorT<T> input_gradient(const NetT<T>& net, const TensorT<T>& batch,
                          const std::vector<int>& labels) {
    if (static_cast<int>(labels.size()) != batch.batch)
        fail("ShapeMismatch", "labels/batch size mismatch");
    ForwardTrace<T> tr;
    forward(net, batch, Mode::eval, &tr);
    TensorT<T> din;
    backward(net, batch, labels, tr, static_cast<Gradients<T>*>(nullptr), &din);
    return din;
}

template <class T>
void update_bn_moving_stats(NetT<T>& net, const ForwardTrace<T>& tr, double momentum) {
    const T m = static_cast<T>(momentum);
    for (size_t i = 0; i < net.blocks.size(); ++i) {
        auto& bn = net.blocks[i].bn;
        const auto& btr = tr.blocks[i];
        if (btr.mean.empty()) continue;
        for (int c = 0; c < bn.ch; ++c) {
            bn.moving_mean[c] = m * bn.moving_mean[c] + (T(1) - m) * btr.mean[c];
            bn.moving_var[c] = m * bn.moving_var[c] + (T(1) - m) * btr.var[c];
        }
    }
}

template <class T>
void NetT<T>::visit_trainable(const std::function<void(std::vector<T>&)>& fn) {
    for (auto& blk : blocks) {
        fn(blk.conv.w);
        fn(blk.conv.bias);
        fn(blk.bn.gamma);
        fn(blk.bn.beta);
    }
    fn(dense.w);
    fn(dense.b);
}

template <class T>
void NetT<T>::visit_all(const std::function<void(std::vector<T>&)>& fn) {
    for (auto& blk : blocks) {
        fn(blk.conv.w);
        fn(blk.conv.bias);
        fn(blk.bn.gamma);
        fn(blk.bn.beta);
        fn(blk.bn.moving_mean);
        fn(blk.bn.moving_var);
    }
    fn(dense.w);
    fn(dense.b);
}

template <class T>
void NetT<T>::visit_all_const(const std::function<void(const std::vector<T>&)>& fn) const {
    for (const auto& blk : blocks) {
        fn(blk.conv.w);
        fn(blk.conv.bias);
        fn(blk.bn.gamma);
        fn(blk.bn.beta);
        fn(blk.bn.moving_mean);
        fn(blk.bn.moving_var);
    }
    fn(dense.w);
    fn(dense.b);
}

template <class T>
size_t NetT<T>::scalar_count() const {
    size_t n = 0;
    visit_all_const([&n](const std::vector<T>& v) { n += v.size(); });
    return n;
}

template struct TensorT<float>;
template struct TensorT<double>;
template struct NetT<float>;
template struct NetT<double>;

template NetT<float> build<float>(const ArchSpec&, uint64_t);
template NetT<double> build<double>(const ArchSpec&, uint64_t);
template TensorT<float> forward<float>(const NetT<float>&, const TensorT<float>&, Mode,
                                       ForwardTrace<float>*, Rng*);
template TensorT<double> forward<double>(const NetT<double>&, const TensorT<double>&, Mode,
                                         ForwardTrace<double>*, Rng*);
template float mean_cross_entropy<float>(const TensorT<float>&, const std::vector<int>&);
template double mean_cross_entropy<double>(const TensorT<double>&, const std::vector<int>&);
template LossGrads<float> loss_and_grads<float>(const NetT<float>&, const TensorT<float>&,
                                                const std::vector<int>&, Rng*,
                                                ForwardTrace<float>*);
template LossGrads<double> loss_and_grads<double>(const NetT<double>&, const TensorT<double>&,
                                                  const std::vector<int>&, Rng*,
                                                  ForwardTrace<double>*);
template TensorT<float> input_gradient<float>(const NetT<float>&, const TensorT<float>&,
                                              const std::vector<int>&);
template TensorT<double> input_gradient<double>(const NetT<double>&, const TensorT<double>&,
                                                const std::vector<int>&);
template void update_bn_moving_stats<float>(NetT<float>&, const ForwardTrace<float>&, double);
template void update_bn_moving_stats<double>(NetT<double>&, const ForwardTrace<double>&, double);

} // namespace tcnas::tensornn
