#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tcnas/flowio/dataset.hpp"
#include "tcnas/tensornn/net.hpp"

namespace tcnas::tensornn {

struct PlateauConfig {
    int patience = 3;   // stagnant epochs before the lr decays
    double decay = 0.5; // lr multiplier, in (0, 1)
};

struct TrainConfig {
    int max_epochs = 30;
    double lr0 = 0.004;
    int batch_size = 1024;
    PlateauConfig plateau;
    int early_stop_patience = 6;
    uint64_t seed = 0;
};

struct History {
    std::vector<double> train_loss;
    std::vector<double> val_accuracy; // the monitored metric, one entry per epoch
    std::vector<double> lr;
    int best_epoch = -1;

    nlohmann::json to_json() const;
};

// Adam with beta1=0.9, beta2=0.999, eps=1e-7, bias correction. State tensors
// follow NetT::visit_trainable order.
template <class T>
struct AdamState {
    std::vector<std::vector<T>> m, v;
    int64_t t = 0;

    static AdamState init(NetT<T>& net);
    void step(NetT<T>& net, const Gradients<T>& grads, double lr);
};

// Normalize samples (byte/255) into a batch tensor; optionally gather the
// perturbation mask and labels.
template <class T>
void fill_batch(const flowio::Dataset& ds, std::span<const size_t> indices, TensorT<T>& data,
                TensorT<T>* mask = nullptr, std::vector<int>* labels = nullptr);

// Epoch loop with shuffled streaming mini-batches, val-accuracy plateau lr
// decay, early stopping, and best-epoch weight restore.
std::pair<Net, History> train(Net model, const flowio::Dataset& ds, const TrainConfig& cfg);

// Fraction of argmax-correct predictions on a split, eval mode.
double evaluate(const Net& model, const flowio::Dataset& ds, flowio::Split split);
double evaluate_indices(const Net& model, const flowio::Dataset& ds,
                        std::span<const size_t> indices);

} // namespace tcnas::tensornn
