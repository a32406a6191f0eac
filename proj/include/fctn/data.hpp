#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fctn/tensor.hpp"

namespace fctn {

/// A multi-feature time series: one dense base block per time step. Values
/// are stored block-major, each block flattened with the first base mode
/// varying fastest.
struct SeriesPanel {
    Shape base_shape;                    // order N-1 block shape
    std::vector<std::int64_t> timestamps; // strictly increasing, length T
    std::vector<double> values;           // T * block_size entries

    Index num_steps() const { return static_cast<Index>(timestamps.size()); }
    Index block_size() const { return shape_size(base_shape); }
    double value(Index t, Index base_linear) const {
        return values[static_cast<std::size_t>(t * block_size() + base_linear)];
    }
    double& value(Index t, Index base_linear) {
        return values[static_cast<std::size_t>(t * block_size() + base_linear)];
    }
};

/// Temporal train/test partition of the embedded windows.
struct DatasetSplit {
    std::vector<TensorD> train;
    std::vector<TensorD> test;
    std::vector<Index> train_indices;   // 1-based window start positions
    std::vector<Index> test_indices;
    std::vector<Index> dropped_indices; // boundary windows discarded
};

/// Rolling-window embedding through the temporal direction: each output
/// tensor stacks `window` consecutive base blocks along a new last mode.
/// Windows start at t = 1, 1+stride, ...; count = floor((T-window)/stride)+1.
std::vector<TensorD> delay_embed(const SeriesPanel& panel, int window, int stride = 1);

/// First floor(fraction*count) windows train; with non_overlapping the
/// boundary windows sharing time steps with the training span are dropped;
/// the remainder test.
DatasetSplit split(const std::vector<TensorD>& tensors, double fraction, int window,
                   bool non_overlapping, int stride = 1);

/// Read a comma-delimited panel: header row `timestamp,<coord columns>,value`
/// (canonically timestamp,type,asset,feature,interval,value), coordinates
/// 1-based, timestamps strictly increasing, every (t, coords) cell present
/// exactly once.
SeriesPanel load_panel(const std::string& path);

/// Inverse of load_panel (exact round trip for integer-representable data).
void save_panel(const SeriesPanel& panel, const std::string& path,
                const std::vector<std::string>& coord_columns = {"type", "asset", "feature",
                                                                 "interval"});

enum class SynthStructure { low_rank, noise, mixed };

/// Deterministic synthetic panel. `low_rank` data is a separable (all-ranks-1
/// FCTN) signal exactly representable at the all-ones rank assignment;
/// `mixed` adds scaled noise; `noise` is pure noise.
SeriesPanel synth_panel(const Shape& base_shape, Index num_steps, std::uint64_t seed,
                        SynthStructure structure);

/// Z-score every base channel in place, with mean/std taken over time steps
/// [0, train_step_count) only. Near-constant channels are left unscaled.
void standardize_panel(SeriesPanel& panel, Index train_step_count);

} // namespace fctn
