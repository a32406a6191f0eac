#include "fctn/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace fctn {

std::vector<TensorD> delay_embed(const SeriesPanel& panel, int window, int stride) {
    if (window < 1 || stride < 1) throw InvalidAxes("delay_embed: window and stride must be >= 1");
    const Index T = panel.num_steps();
    if (T < window)
        throw SeriesTooShort("delay_embed: series length " + std::to_string(T) +
                             " shorter than window " + std::to_string(window));
    const Index block = panel.block_size();
    Shape shape = panel.base_shape;
    shape.push_back(window);

    const Index count = (T - window) / stride + 1;
    std::vector<TensorD> out;
    out.reserve(static_cast<std::size_t>(count));
    for (Index w = 0; w < count; ++w) {
        const Index start = w * stride;
        TensorD t(shape);
        for (Index s = 0; s < window; ++s)
            for (Index lin = 0; lin < block; ++lin)
                t[s * block + lin] = panel.value(start + s, lin);
        out.push_back(std::move(t));
    }
    return out;
}

DatasetSplit split(const std::vector<TensorD>& tensors, double fraction, int window,
                   bool non_overlapping, int stride) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw DegenerateSplit("split: fraction must be in (0, 1)");
    const Index count = static_cast<Index>(tensors.size());
    const Index n_train = static_cast<Index>(std::floor(fraction * static_cast<double>(count)));
    if (n_train < 1) throw DegenerateSplit("split: empty training set");

    DatasetSplit out;
    auto start_of = [&](Index idx) { return 1 + idx * stride; };
    const Index last_train_covered = start_of(n_train - 1) + window - 1;
    for (Index idx = 0; idx < count; ++idx) {
        if (idx < n_train) {
            out.train.push_back(tensors[static_cast<std::size_t>(idx)]);
            out.train_indices.push_back(start_of(idx));
        } else if (non_overlapping && start_of(idx) <= last_train_covered) {
            out.dropped_indices.push_back(start_of(idx));
        } else {
            out.test.push_back(tensors[static_cast<std::size_t>(idx)]);
            out.test_indices.push_back(start_of(idx));
        }
    }
    if (out.test.empty()) throw DegenerateSplit("split: empty test set after dropping");
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

SeriesPanel load_panel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UnknownColumn("load_panel: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw UnknownColumn("load_panel: empty file " + path);
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 3 || header.front() != "timestamp" || header.back() != "value")
        throw UnknownColumn(
            "load_panel: header must be timestamp,<coordinate columns>,value; got: " + line);
    const std::size_t n_coords = header.size() - 2;

    struct Row {
        std::int64_t t;
        std::vector<Index> coords;
        double value;
    };
    std::vector<Row> rows;
    Shape base_shape(n_coords, 0);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw UnknownColumn("load_panel: wrong field count at line " +
                                std::to_string(line_no));
        Row row;
        try {
            row.t = std::stoll(fields.front());
            for (std::size_t c = 0; c < n_coords; ++c) {
                const Index v = static_cast<Index>(std::stoll(fields[c + 1]));
                if (v < 1) throw std::invalid_argument("coordinate < 1");
                row.coords.push_back(v);
                base_shape[c] = std::max(base_shape[c], v);
            }
            row.value = std::stod(fields.back());
        } catch (const std::exception& e) {
            throw UnknownColumn("load_panel: unparseable field at line " +
                                std::to_string(line_no) + ": " + e.what());
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw MissingCell("load_panel: no data rows in " + path);

    std::vector<std::int64_t> timestamps;
    for (const Row& r : rows) {
        if (timestamps.empty() || r.t > timestamps.back())
            timestamps.push_back(r.t);
        else if (r.t < timestamps.back())
            throw UnknownColumn("load_panel: rows must be grouped by strictly increasing timestamp");
    }

    SeriesPanel panel;
    panel.base_shape = base_shape;
    panel.timestamps = timestamps;
    const Index block = panel.block_size();
    panel.values.assign(static_cast<std::size_t>(block * panel.num_steps()),
                        std::numeric_limits<double>::quiet_NaN());
    const Shape strides = shape_strides(base_shape);

    auto step_of = [&](std::int64_t t) {
        const auto it = std::lower_bound(timestamps.begin(), timestamps.end(), t);
        if (it == timestamps.end() || *it != t)
            throw UnknownColumn("load_panel: timestamps must be strictly increasing");
        return static_cast<Index>(it - timestamps.begin());
    };
    for (const Row& r : rows) {
        Index lin = 0;
        for (std::size_t c = 0; c < n_coords; ++c) lin += (r.coords[c] - 1) * strides[c];
        double& slot = panel.value(step_of(r.t), lin);
        if (!std::isnan(slot)) {
            std::string coords;
            for (Index v : r.coords) coords += " " + std::to_string(v);
            throw DuplicateCell("load_panel: duplicate cell at t=" + std::to_string(r.t) +
                                " coords" + coords);
        }
        slot = r.value;
    }
    for (Index t = 0; t < panel.num_steps(); ++t)
        for (Index lin = 0; lin < block; ++lin)
            if (std::isnan(panel.value(t, lin))) {
                Shape idx(n_coords);
                Index rest = lin;
                std::string coords;
                for (std::size_t c = 0; c < n_coords; ++c) {
                    idx[c] = rest % base_shape[c] + 1;
                    rest /= base_shape[c];
                    coords += " " + std::to_string(idx[c]);
                }
                throw MissingCell("load_panel: missing cell at t=" +
                                  std::to_string(timestamps[static_cast<std::size_t>(t)]) +
                                  " coords" + coords);
            }
    return panel;
}

void save_panel(const SeriesPanel& panel, const std::string& path,
                const std::vector<std::string>& coord_columns) {
    if (coord_columns.size() != panel.base_shape.size())
        throw UnknownColumn("save_panel: coordinate column count mismatch");
    std::ofstream out(path);
    if (!out) throw UnknownColumn("save_panel: cannot write " + path);
    out << "timestamp";
    for (const auto& c : coord_columns) out << ',' << c;
    out << ",value\n";
    const Index block = panel.block_size();
    char buf[64];
    for (Index t = 0; t < panel.num_steps(); ++t) {
        for (Index lin = 0; lin < block; ++lin) {
            out << panel.timestamps[static_cast<std::size_t>(t)];
            Index rest = lin;
            for (Index dim : panel.base_shape) {
                out << ',' << (rest % dim + 1);
                rest /= dim;
            }
            std::snprintf(buf, sizeof(buf), "%.17g", panel.value(t, lin));
            out << ',' << buf << '\n';
        }
    }
}

SeriesPanel synth_panel(const Shape& base_shape, Index num_steps, std::uint64_t seed,
                        SynthStructure structure) {
    SeriesPanel panel;
    panel.base_shape = base_shape;
    panel.timestamps.resize(static_cast<std::size_t>(num_steps));
    for (Index t = 0; t < num_steps; ++t) panel.timestamps[static_cast<std::size_t>(t)] = t + 1;
    const Index block = panel.block_size();
    panel.values.assign(static_cast<std::size_t>(block * num_steps), 0.0);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    if (structure == SynthStructure::noise) {
        for (double& v : panel.values) v = gauss(rng);
        return panel;
    }

    // separable signal: block(t) = g(t) * outer(v_1, ..., v_B), kept away
    // from zero so window tensors have nonzero norm
    std::vector<std::vector<double>> factors;
    for (Index dim : base_shape) {
        std::vector<double> v(static_cast<std::size_t>(dim));
        for (double& x : v) x = 1.0 + 0.5 * gauss(rng);
        factors.push_back(std::move(v));
    }
    const Shape strides = shape_strides(base_shape);
    for (Index t = 0; t < num_steps; ++t) {
        const double g = 2.0 + std::sin(0.37 * static_cast<double>(t + 1));
        for (Index lin = 0; lin < block; ++lin) {
            double prod = g;
            Index rest = lin;
            for (std::size_t c = 0; c < base_shape.size(); ++c) {
                prod *= factors[c][static_cast<std::size_t>(rest % base_shape[c])];
                rest /= base_shape[c];
            }
            panel.value(t, lin) = prod;
        }
    }
    if (structure == SynthStructure::mixed)
        for (double& v : panel.values) v += 0.05 * gauss(rng);
    return panel;
}

void standardize_panel(SeriesPanel& panel, Index train_step_count) {
    if (train_step_count < 2 || train_step_count > panel.num_steps())
        throw DegenerateSplit("standardize_panel: invalid training span");
    const Index block = panel.block_size();
    for (Index lin = 0; lin < block; ++lin) {
        double mean = 0.0;
        for (Index t = 0; t < train_step_count; ++t) mean += panel.value(t, lin);
        mean /= static_cast<double>(train_step_count);
        double var = 0.0;
        for (Index t = 0; t < train_step_count; ++t) {
            const double d = panel.value(t, lin) - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / static_cast<double>(train_step_count));
        if (sd < 1e-12) continue;
        for (Index t = 0; t < panel.num_steps(); ++t)
            panel.value(t, lin) = (panel.value(t, lin) - mean) / sd;
    }
}

} // namespace fctn
