#include "copycat/dataset.hpp"

#include <stdexcept>

namespace copycat {

std::string provenance_name(Provenance p) {
    switch (p) {
        case Provenance::ODD: return "ODD";
        case Provenance::PDD: return "PDD";
        case Provenance::NPDD: return "NPDD";
        case Provenance::TD: return "TD";
        case Provenance::FAKE_NPD: return "FAKE_NPD";
        case Provenance::FAKE_PD: return "FAKE_PD";
    }
    throw std::logic_error("unreachable provenance");
}

Provenance provenance_from_name(const std::string& name) {
    if (name == "ODD") return Provenance::ODD;
    if (name == "PDD") return Provenance::PDD;
    if (name == "NPDD") return Provenance::NPDD;
    if (name == "TD") return Provenance::TD;
    if (name == "FAKE_NPD") return Provenance::FAKE_NPD;
    if (name == "FAKE_PD") return Provenance::FAKE_PD;
    throw std::invalid_argument("unknown provenance: " + name);
}

Tensor LabeledDataset::image(int index) const { return image_batch(index, 1); }

Tensor LabeledDataset::image_batch(int first, int count) const {
    if (images.rank() != 4) throw std::invalid_argument("dataset images must be [N,C,H,W]");
    const int n = images.dim(0);
    if (first < 0 || count < 0 || first + count > n)
        throw std::invalid_argument("image_batch: range [" + std::to_string(first) + "," +
                                    std::to_string(first + count) + ") outside dataset of " + std::to_string(n));
    const std::size_t stride = static_cast<std::size_t>(images.numel() / n);
    Tensor out;
    out.shape = {count, images.dim(1), images.dim(2), images.dim(3)};
    out.data.assign(images.data.begin() + static_cast<long>(stride) * first,
                    images.data.begin() + static_cast<long>(stride) * (first + count));
    if (count == 1) out.shape = {1, images.dim(1), images.dim(2), images.dim(3)};
    return out;
}

void LabeledDataset::validate() const {
    if (images.rank() != 4) throw std::invalid_argument("dataset images must be rank 4, got " + images.shape_str());
    const int n = images.dim(0);
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("dataset has " + std::to_string(n) + " images but " +
                                    std::to_string(labels.size()) + " labels");
    if (n_classes < 1) throw std::invalid_argument("dataset n_classes must be >= 1");
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != kUnlabeled && (labels[i] < 0 || labels[i] >= n_classes))
            throw std::invalid_argument("label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                                        " outside [0," + std::to_string(n_classes) + ")");
    }
    for (double v : images.data)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("image value " + std::to_string(v) + " outside [0,1]");
}

LabeledDataset take(const LabeledDataset& d, const std::vector<int>& indices) {
    const int n = d.size();
    const std::size_t stride = n > 0 ? static_cast<std::size_t>(d.images.numel() / n) : 0;
    LabeledDataset out;
    out.n_classes = d.n_classes;
    out.provenance = d.provenance;
    out.images.shape = {static_cast<int>(indices.size()), d.channels(), d.height(), d.width()};
    out.images.data.reserve(indices.size() * stride);
    out.labels.reserve(indices.size());
    for (int idx : indices) {
        if (idx < 0 || idx >= n) throw std::invalid_argument("take: index " + std::to_string(idx) + " out of range");
        auto begin = d.images.data.begin() + static_cast<long>(stride) * idx;
        out.images.data.insert(out.images.data.end(), begin, begin + static_cast<long>(stride));
        out.labels.push_back(d.labels[static_cast<std::size_t>(idx)]);
    }
    return out;
}

LabeledDataset with_labels(const LabeledDataset& d, std::vector<int> labels, Provenance prov) {
    if (labels.size() != d.labels.size())
        throw std::invalid_argument("with_labels: need " + std::to_string(d.labels.size()) + " labels, got " +
                                    std::to_string(labels.size()));
    LabeledDataset out = d;
    out.labels = std::move(labels);
    out.provenance = prov;
    return out;
}

std::vector<int> class_counts(const LabeledDataset& d) {
    std::vector<int> counts(static_cast<std::size_t>(d.n_classes), 0);
    for (int l : d.labels)
        if (l != kUnlabeled) counts.at(static_cast<std::size_t>(l))++;
    return counts;
}

}  // namespace copycat
