#include "tcnas/attacks/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tcnas/common/error.hpp"
#include "tcnas/common/hash.hpp"
#include "tcnas/tensornn/checkpoint.hpp"
#include "tcnas/tensornn/train.hpp"

namespace tcnas::attacks {

using tensornn::fill_batch;
using tensornn::input_gradient;

namespace {

void check_mask(const Tensor& batch, const Tensor& mask) {
    if (mask.batch != batch.batch || mask.length != batch.length ||
        mask.channels != batch.channels)
        fail("ShapeMismatch", "mask shape does not match the batch");
}

inline float sign_of(float v) { return v > 0.0f ? 1.0f : (v < 0.0f ? -1.0f : 0.0f); }

// One signed step + box clip + ball projection; shared by FGSM and PGD so the
// single-step paths are bit-identical.
void signed_step(const Tensor& grad, const Tensor& origin, float step, float eps, Tensor& x) {
    for (size_t i = 0; i < x.v.size(); ++i) {
        float v = x.v[i] + step * sign_of(grad.v[i]);
        v = std::min(std::max(v, 0.0f), 1.0f);
        const float lo = origin.v[i] - eps;
        const float hi = origin.v[i] + eps;
        x.v[i] = std::min(std::max(v, lo), hi);
    }
}

} // namespace

Tensor masked_gradient(const Net& net, const Tensor& batch, const std::vector<int>& labels,
                       const Tensor& mask) {
    check_mask(batch, mask);
    Tensor g = input_gradient(net, batch, labels);
    for (size_t i = 0; i < g.v.size(); ++i) g.v[i] *= mask.v[i];
    return g;
}

Tensor fgsm(const Net& net, const Tensor& batch, const std::vector<int>& labels, float eps,
            const Tensor& mask) {
    if (eps < 0.0f) fail("InvalidArgument", "eps must be >= 0");
    const Tensor g = masked_gradient(net, batch, labels, mask);
    Tensor adv = batch;
    signed_step(g, batch, eps, eps, adv);
    return adv;
}

Tensor pgd(const Net& net, const Tensor& batch, const std::vector<int>& labels,
           const AttackConfig& cfg, const Tensor& mask) {
    if (cfg.eps < 0.0f || cfg.alpha <= 0.0f || cfg.iters < 1)
        fail("InvalidArgument", "PGD needs eps >= 0, alpha > 0, iters >= 1");
    check_mask(batch, mask);
    Tensor x = batch;
    for (int t = 0; t < cfg.iters; ++t) {
        const Tensor g = masked_gradient(net, x, labels, mask);
        signed_step(g, batch, cfg.alpha, cfg.eps, x);
    }
    // the gradient mask already pins masked positions; re-assert on the delta
    for (size_t i = 0; i < x.v.size(); ++i)
        if (mask.v[i] == 0.0f) x.v[i] = batch.v[i];
    return x;
}

RobustnessReport sweep(const Net& net, const flowio::Dataset& ds, std::vector<double> grid,
                       int pgd_iters, uint64_t seed) {
    const auto test_idx = ds.indices_of(flowio::Split::test);
    if (test_idx.empty()) fail("EmptySplit", "test split has no samples");
    std::sort(grid.begin(), grid.end());

    RobustnessReport rep;
    rep.eps_grid = grid;
    rep.pgd_iters = pgd_iters;
    rep.model_hash = tensornn::model_hash(net);
    rep.dataset_hash = flowio::dataset_hash(ds);
    rep.seed = seed;
    rep.clean_accuracy = tensornn::evaluate_indices(net, ds, test_idx);
    rep.rows = {{"FGSM", {}}, {"PGD", {}}};

    constexpr size_t kBatch = 256;
    for (double eps_d : grid) {
        const float eps = static_cast<float>(eps_d);
        size_t correct_fgsm = 0, correct_pgd = 0;
        Tensor batch, mask;
        std::vector<int> labels;
        for (size_t start = 0; start < test_idx.size(); start += kBatch) {
            const size_t n = std::min(kBatch, test_idx.size() - start);
            fill_batch<float>(ds, std::span<const size_t>(test_idx).subspan(start, n), batch,
                              &mask, &labels);
            const Tensor adv_f = fgsm(net, batch, labels, eps, mask);
            const Tensor adv_p =
                pgd(net, batch, labels, AttackConfig::pgd_default(eps, pgd_iters), mask);
            for (const Tensor* adv : {&adv_f, &adv_p}) {
                const Tensor probs = tensornn::forward(net, *adv, tensornn::Mode::eval);
                size_t& correct = adv == &adv_f ? correct_fgsm : correct_pgd;
                for (size_t b = 0; b < n; ++b) {
                    const float* p = probs.row(static_cast<int>(b), 0);
                    int arg = 0;
                    for (int k = 1; k < probs.channels; ++k)
                        if (p[k] > p[arg]) arg = k;
                    if (arg == labels[b]) ++correct;
                }
            }
        }
        rep.rows[0].accuracy.push_back(static_cast<double>(correct_fgsm) / test_idx.size());
        rep.rows[1].accuracy.push_back(static_cast<double>(correct_pgd) / test_idx.size());
    }
    return rep;
}

nlohmann::json RobustnessReport::to_json() const {
    nlohmann::json rows_j = nlohmann::json::array();
    for (const auto& row : rows)
        rows_j.push_back({{"attack", row.attack}, {"accuracy", row.accuracy}});
    return {{"eps_grid", eps_grid},
            {"rows", std::move(rows_j)},
            {"clean_accuracy", clean_accuracy},
            {"pgd_iters", pgd_iters},
            {"model_hash", hex64(model_hash)},
            {"dataset_hash", hex64(dataset_hash)},
            {"seed", seed}};
}

RobustnessReport RobustnessReport::from_json(const nlohmann::json& j) {
    try {
        RobustnessReport rep;
        rep.eps_grid = j.at("eps_grid").get<std::vector<double>>();
        for (const auto& row : j.at("rows"))
            rep.rows.push_back(
                {row.at("attack").get<std::string>(), row.at("accuracy").get<std::vector<double>>()});
        rep.clean_accuracy = j.at("clean_accuracy").get<double>();
        rep.pgd_iters = j.value("pgd_iters", 10);
        rep.model_hash = std::stoull(j.value("model_hash", "0"), nullptr, 16);
        rep.dataset_hash = std::stoull(j.value("dataset_hash", "0"), nullptr, 16);
        rep.seed = j.value("seed", uint64_t(0));
        return rep;
    } catch (const nlohmann::json::exception& e) {
        fail("ShapeMismatch", std::string("malformed robustness report: ") + e.what());
    }
}

std::string RobustnessReport::to_csv(const std::string& model_name) const {
    std::string out = "attack,model";
    char buf[32];
    for (double e : eps_grid) {
        std::snprintf(buf, sizeof(buf), ",%g", e);
        out += buf;
    }
    out += "\n";
    for (const auto& row : rows) {
        out += row.attack + "," + model_name;
        for (double a : row.accuracy) {
            std::snprintf(buf, sizeof(buf), ",%.2f", a * 100.0);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

} // namespace tcnas::attacks
