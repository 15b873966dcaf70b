#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcnas/flowio/dataset.hpp"
#include "tcnas/tensornn/net.hpp"

namespace tcnas::attacks {

using tensornn::Net;
using tensornn::Tensor;

enum class AttackKind : uint8_t { fgsm, pgd };

struct AttackConfig {
    AttackKind kind = AttackKind::fgsm;
    float eps = 0.1f;   // l-inf budget in normalized [0,1] units
    float alpha = 0.0f; // PGD step size
    int iters = 1;      // PGD iterations
    bool respect_mask = true;

    static AttackConfig pgd_default(float eps, int iters = 10) {
        return {AttackKind::pgd, eps, eps / static_cast<float>(iters), iters, true};
    }
};

// d(mean CE)/d(input) with the mask applied before any sign is taken.
Tensor masked_gradient(const Net& net, const Tensor& batch, const std::vector<int>& labels,
                       const Tensor& mask);

// adv = clip_[0,1](x + eps * sign(masked grad)); sign(0) = 0, masked positions
// bit-identical to the input.
Tensor fgsm(const Net& net, const Tensor& batch, const std::vector<int>& labels, float eps,
            const Tensor& mask);

// Iterated signed steps from the clean input (no random start), each followed
// by the [0,1] box clip and projection onto the eps l-inf ball around x.
Tensor pgd(const Net& net, const Tensor& batch, const std::vector<int>& labels,
           const AttackConfig& cfg, const Tensor& mask);

struct RobustnessReport {
    std::vector<double> eps_grid;
    struct Row {
        std::string attack; // "FGSM" | "PGD"
        std::vector<double> accuracy;
    };
    std::vector<Row> rows;
    double clean_accuracy = 0.0;
    int pgd_iters = 10;
    uint64_t model_hash = 0;
    uint64_t dataset_hash = 0;
    uint64_t seed = 0;

    nlohmann::json to_json() const;
    static RobustnessReport from_json(const nlohmann::json& j);
    // Table layout: header = eps grid ascending, cells = percent, 2 decimals.
    std::string to_csv(const std::string& model_name) const;
};

inline std::vector<double> default_eps_grid() {
    return {0.01, 0.03, 0.05, 0.07, 0.10, 0.15, 0.20};
}

// FGSM and PGD accuracy over the eps grid on the test split, plus clean
// accuracy. PGD uses iters steps of size eps/iters.
RobustnessReport sweep(const Net& net, const flowio::Dataset& ds, std::vector<double> grid,
                       int pgd_iters, uint64_t seed);

} // namespace tcnas::attacks
