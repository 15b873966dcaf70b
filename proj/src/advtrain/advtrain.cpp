#include "tcnas/advtrain/advtrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tcnas/common/error.hpp"

namespace tcnas::advtrain {

using attacks::fgsm;
using flowio::Split;
using tensornn::AdamState;
using tensornn::fill_batch;
using tensornn::ForwardTrace;
using tensornn::History;
using tensornn::loss_and_grads;
using tensornn::Mode;

std::vector<size_t> mixed_batch(const Net& net, Tensor& batch, const Tensor& mask,
                                const std::vector<int>& labels, const AdvTrainConfig& cfg,
                                Rng& step_rng) {
    const size_t B = static_cast<size_t>(batch.batch);
    const auto k = static_cast<size_t>(
        std::llround(cfg.adv_fraction * static_cast<double>(B)));
    std::vector<size_t> chosen;
    if (k == 0) return chosen;

    // partial Fisher-Yates: first k entries of a seeded permutation
    std::vector<size_t> perm(B);
    for (size_t i = 0; i < B; ++i) perm[i] = i;
    for (size_t i = 0; i < k; ++i) {
        const size_t j =
            i + static_cast<size_t>(step_rng.uniform_int(0, static_cast<int64_t>(B - i - 1)));
        std::swap(perm[i], perm[j]);
    }
    chosen.assign(perm.begin(), perm.begin() + static_cast<long>(k));
    std::sort(chosen.begin(), chosen.end());

    const int L = batch.length, C = batch.channels;
    Tensor sub(static_cast<int>(k), L, C), sub_mask(static_cast<int>(k), L, C);
    std::vector<int> sub_labels(k);
    const size_t row = static_cast<size_t>(L) * C;
    for (size_t i = 0; i < k; ++i) {
        std::copy_n(batch.row(static_cast<int>(chosen[i]), 0), row, sub.row(static_cast<int>(i), 0));
        std::copy_n(mask.row(static_cast<int>(chosen[i]), 0), row,
                    sub_mask.row(static_cast<int>(i), 0));
        sub_labels[i] = labels[chosen[i]];
    }
    const Tensor adv = fgsm(net, sub, sub_labels, cfg.fgsm_eps, sub_mask);
    for (size_t i = 0; i < k; ++i)
        std::copy_n(adv.row(static_cast<int>(i), 0), row,
                    batch.row(static_cast<int>(chosen[i]), 0));
    return chosen;
}

namespace {

// Accuracy on FGSM-perturbed samples of one split, batched.
double adv_accuracy(const Net& net, const flowio::Dataset& ds, std::span<const size_t> idx,
                    float eps) {
    constexpr size_t kBatch = 256;
    size_t correct = 0;
    Tensor batch, mask;
    std::vector<int> labels;
    for (size_t start = 0; start < idx.size(); start += kBatch) {
        const size_t n = std::min(kBatch, idx.size() - start);
        fill_batch<float>(ds, idx.subspan(start, n), batch, &mask, &labels);
        const Tensor adv = fgsm(net, batch, labels, eps, mask);
        const Tensor probs = tensornn::forward(net, adv, Mode::eval);
        for (size_t b = 0; b < n; ++b) {
            const float* p = probs.row(static_cast<int>(b), 0);
            int arg = 0;
            for (int c = 1; c < probs.channels; ++c)
                if (p[c] > p[arg]) arg = c;
            if (arg == labels[b]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(idx.size());
}

} // namespace

std::pair<Net, History> finetune(Net model, const flowio::Dataset& ds, const AdvTrainConfig& cfg) {
    if (!(cfg.adv_fraction > 0.0 && cfg.adv_fraction < 1.0))
        fail("InvalidArgument", "adv_fraction must lie in (0, 1)");
    const auto train_idx = ds.indices_of(Split::train);
    const auto val_idx = ds.indices_of(Split::val);
    if (train_idx.empty() || val_idx.empty())
        fail("EmptySplit", "fine-tuning requires non-empty train and val splits");

    Rng rng(mix_seed(cfg.base.seed, 0xadf7));
    auto adam = AdamState<float>::init(model);
    History hist;
    double lr = cfg.base.lr0;
    double best_metric = -1.0;
    Net best = model;
    int stagnant = 0, plateau_wait = 0;

    std::vector<size_t> order(train_idx);
    Tensor batch, mask;
    std::vector<int> labels;
    ForwardTrace<float> trace;
    for (int epoch = 0; epoch < cfg.base.max_epochs; ++epoch) {
        Rng epoch_rng = rng.fork(static_cast<uint64_t>(epoch));
        epoch_rng.shuffle(order);
        double loss_sum = 0.0;
        size_t seen = 0;
        int step = 0;
        for (size_t start = 0; start < order.size(); start += cfg.base.batch_size, ++step) {
            const size_t n = std::min<size_t>(cfg.base.batch_size, order.size() - start);
            fill_batch<float>(ds, std::span<const size_t>(order).subspan(start, n), batch, &mask,
                              &labels);
            Rng step_rng = epoch_rng.fork(0x57e0 + static_cast<uint64_t>(step));
            mixed_batch(model, batch, mask, labels, cfg, step_rng);
            auto lg = loss_and_grads(model, batch, labels, &step_rng, &trace);
            tensornn::update_bn_moving_stats(model, trace);
            adam.step(model, lg.grads, lr);
            loss_sum += static_cast<double>(lg.loss) * static_cast<double>(n);
            seen += n;
        }

        const double clean_acc = tensornn::evaluate_indices(model, ds, val_idx);
        const double robust_acc = adv_accuracy(model, ds, val_idx, cfg.fgsm_eps);
        const double metric = 0.5 * (clean_acc + robust_acc);
        hist.train_loss.push_back(loss_sum / static_cast<double>(seen));
        hist.val_accuracy.push_back(metric);
        hist.lr.push_back(lr);

        if (metric > best_metric) {
            best_metric = metric;
            best = model;
            hist.best_epoch = epoch;
            stagnant = 0;
            plateau_wait = 0;
        } else {
            ++stagnant;
            ++plateau_wait;
            if (plateau_wait >= cfg.base.plateau.patience) {
                lr *= cfg.base.plateau.decay;
                plateau_wait = 0;
            }
            if (stagnant >= cfg.base.early_stop_patience) break;
        }
    }
    return {std::move(best), std::move(hist)};
}

DeltaTable compare(const RobustnessReport& before, const RobustnessReport& after) {
    if (before.eps_grid != after.eps_grid)
        fail("GridMismatch", "reports use different eps grids");
    if (before.rows.size() != after.rows.size())
        fail("GridMismatch", "reports list different attack sets");

    DeltaTable out;
    out.eps_grid = before.eps_grid;
    out.clean_delta = after.clean_accuracy - before.clean_accuracy;
    for (const auto& brow : before.rows) {
        const auto it =
            std::find_if(after.rows.begin(), after.rows.end(),
                         [&](const RobustnessReport::Row& r) { return r.attack == brow.attack; });
        if (it == after.rows.end())
            fail("GridMismatch", "attack " + brow.attack + " missing from the after report");
        if (it->accuracy.size() != brow.accuracy.size())
            fail("GridMismatch", "attack " + brow.attack + " row length mismatch");
        DeltaTable::Row row{brow.attack, {}};
        for (size_t i = 0; i < brow.accuracy.size(); ++i)
            row.delta.push_back(it->accuracy[i] - brow.accuracy[i]);
        out.rows.push_back(std::move(row));
    }
    return out;
}

nlohmann::json DeltaTable::to_json() const {
    nlohmann::json rows_j = nlohmann::json::array();
    for (const auto& row : rows)
        rows_j.push_back({{"attack", row.attack}, {"delta", row.delta}});
    return {{"eps_grid", eps_grid}, {"rows", std::move(rows_j)}, {"clean_delta", clean_delta}};
}

std::string DeltaTable::to_csv(const std::string& model_name) const {
    std::string out = "attack,model";
    char buf[32];
    for (double e : eps_grid) {
        std::snprintf(buf, sizeof(buf), ",%g", e);
        out += buf;
    }
    out += "\n";
    for (const auto& row : rows) {
        out += row.attack + "," + model_name;
        for (double d : row.delta) {
            std::snprintf(buf, sizeof(buf), ",%+.2f", d * 100.0);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

} // namespace tcnas::advtrain
