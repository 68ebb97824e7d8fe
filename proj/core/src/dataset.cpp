#include "lincl/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lincl/errors.hpp"

namespace lincl {

DatasetKind dataset_kind_from(const std::string& name) {
    if (name == "blobs") return DatasetKind::blobs;
    if (name == "spirals") return DatasetKind::spirals;
    if (name == "rings") return DatasetKind::rings;
    throw ValidationError("unknown dataset kind: " + name);
}

const char* dataset_kind_name(DatasetKind kind) {
    switch (kind) {
        case DatasetKind::blobs: return "blobs";
        case DatasetKind::spirals: return "spirals";
        case DatasetKind::rings: return "rings";
    }
    return "?";
}

Tensor synth_point(DatasetKind kind, std::size_t classes, std::size_t cls, double u, double noise,
                   Rng& rng) {
    if (classes < 2) throw ValidationError("synthetic datasets need at least 2 classes");
    if (cls >= classes) throw ValidationError("class index out of range");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double px = 0.0, py = 0.0;
    switch (kind) {
        case DatasetKind::blobs: {
            // Gaussian clusters centred on a circle.
            const double theta = two_pi * static_cast<double>(cls) / static_cast<double>(classes);
            px = 2.0 * std::cos(theta);
            py = 2.0 * std::sin(theta);
            break;
        }
        case DatasetKind::spirals: {
            // Interleaved arms growing outward; u walks along the arm.
            const double r = 0.25 + 2.0 * u;
            const double theta = two_pi * (0.75 * u + static_cast<double>(cls) / static_cast<double>(classes));
            px = r * std::cos(theta);
            py = r * std::sin(theta);
            break;
        }
        case DatasetKind::rings: {
            // Concentric annuli, one radius per class.
            const double r = 1.0 + static_cast<double>(cls);
            const double theta = two_pi * u;
            px = r * std::cos(theta);
            py = r * std::sin(theta);
            break;
        }
    }
    Tensor p = Tensor::vec({px, py});
    if (noise > 0.0) {
        p[0] += noise * rng.normal();
        p[1] += noise * rng.normal();
    }
    return p;
}

LabeledSet generate_dataset(DatasetKind kind, std::size_t classes, std::size_t samples,
                            double noise, Rng& rng) {
    if (classes < 2) throw ValidationError("generate_dataset: classes must be >= 2");
    if (samples == 0) throw ValidationError("generate_dataset: samples must be >= 1");
    LabeledSet set;
    set.inputs = Tensor({samples, 2});
    set.labels.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const std::size_t cls = i % classes;
        const double u = rng.uniform();
        const Tensor p = synth_point(kind, classes, cls, u, noise, rng);
        set.inputs.at(i, 0) = p[0];
        set.inputs.at(i, 1) = p[1];
        set.labels[i] = static_cast<int>(cls);
    }
    return set;
}

LabeledSet rotate2d(const LabeledSet& set, double angle_radians) {
    if (set.inputs.rank() != 2 || set.inputs.cols() != 2) {
        throw DimensionError("rotate2d requires [N x 2] inputs");
    }
    const double c = std::cos(angle_radians), s = std::sin(angle_radians);
    LabeledSet out = set;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const double x = set.inputs.at(i, 0), y = set.inputs.at(i, 1);
        out.inputs.at(i, 0) = c * x - s * y;
        out.inputs.at(i, 1) = s * x + c * y;
    }
    return out;
}

LabeledSet concat(const LabeledSet& a, const LabeledSet& b) {
    if (a.size() == 0) return b;
    if (b.size() == 0) return a;
    if (a.inputs.rank() != 2 || b.inputs.rank() != 2 || a.inputs.cols() != b.inputs.cols()) {
        throw DimensionError("concat: incompatible input shapes");
    }
    LabeledSet out;
    const std::size_t d = a.inputs.cols();
    out.inputs = Tensor({a.size() + b.size(), d});
    std::copy(a.inputs.data(), a.inputs.data() + a.inputs.size(), out.inputs.data());
    std::copy(b.inputs.data(), b.inputs.data() + b.inputs.size(),
              out.inputs.data() + a.inputs.size());
    out.labels = a.labels;
    out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    return out;
}

LabeledSet load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stod(cell, &pos));
                if (pos == 0) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;  // header row
            }
            throw IoError("non-numeric CSV row in " + path);
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw IoError("ragged CSV rows in " + path);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("empty CSV file " + path);
    if (rows.front().size() < 2) throw IoError("CSV needs at least one feature and a label column");
    const std::size_t d = rows.front().size() - 1;
    LabeledSet set;
    set.inputs = Tensor({rows.size(), d});
    set.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) set.inputs.at(i, j) = rows[i][j];
        set.labels[i] = static_cast<int>(std::lround(rows[i][d]));
    }
    return set;
}

void save_csv(const std::string& path, const LabeledSet& set, bool header) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    const std::size_t d = set.inputs.cols();
    if (header) {
        for (std::size_t j = 0; j < d; ++j) out << "x" << j << ",";
        out << "label\n";
    }
    char buf[64];
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", set.inputs.at(i, j));
            out << buf << ",";
        }
        out << set.labels[i] << "\n";
    }
}

}  // namespace lincl
