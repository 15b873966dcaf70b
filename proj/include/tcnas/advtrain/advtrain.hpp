#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tcnas/attacks/attacks.hpp"
#include "tcnas/tensornn/train.hpp"

namespace tcnas::advtrain {

using attacks::RobustnessReport;
using tensornn::Net;
using tensornn::Tensor;

struct AdvTrainConfig {
    tensornn::TrainConfig base; // lr defaults to 0.1x the clean-training lr
    float fgsm_eps = 0.1f;
    double adv_fraction = 0.5; // fraction of each mini-batch perturbed

    AdvTrainConfig() {
        base.max_epochs = 100;
        base.lr0 = 0.0004;
    }
};

// Replace round(adv_fraction*B) samples (chosen via step_rng) with their FGSM
// versions under the current weights and per-sample masks; labels unchanged.
// Returns the indices that were perturbed.
std::vector<size_t> mixed_batch(const Net& net, Tensor& batch, const Tensor& mask,
                                const std::vector<int>& labels, const AdvTrainConfig& cfg,
                                Rng& step_rng);

// Same loop as tensornn::train, but every step optimizes the mean loss over a
// mixed clean/adversarial batch regenerated from the current weights. The
// monitored val metric is the mean of clean and FGSM(eps) val accuracy, i.e.
// accuracy on the 50/50 mixture the loss optimizes.
std::pair<Net, tensornn::History> finetune(Net model, const flowio::Dataset& ds,
                                           const AdvTrainConfig& cfg);

struct DeltaTable {
    std::vector<double> eps_grid;
    struct Row {
        std::string attack;
        std::vector<double> delta; // after - before, accuracy fractions
    };
    std::vector<Row> rows;
    double clean_delta = 0.0;

    nlohmann::json to_json() const;
    std::string to_csv(const std::string& model_name) const;
};

// Per-cell (after - before) differences. Throws GridMismatch when the grids or
// attack rows differ.
DeltaTable compare(const RobustnessReport& before, const RobustnessReport& after);

} // namespace tcnas::advtrain
