#pragma once

#include <cstdint>
#include <vector>

#include "tcnas/flowio/dataset.hpp"

namespace tcnas::flowio {

// Deterministic synthetic benchmark. Each class is separable through two kinds
// of payload evidence: a class-specific byte motif at a class-specific offset
// (large byte margins, survives bounded perturbation) and a faint class-wide
// shift of the payload noise distribution (easily learned, easily attacked).
// Headers are a fixed 40 bytes per packet, class-independent, mask 0.
std::vector<RawFlow> synth_flows(int n_classes, int flows_per_class, uint64_t seed);

Dataset synth_dataset(int n_classes, int flows_per_class, SampleFormat format, uint64_t seed);

} // namespace tcnas::flowio
