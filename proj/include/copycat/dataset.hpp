#pragma once

#include <string>
#include <vector>

#include "copycat/tensor.hpp"

namespace copycat {

// Where a dataset came from in the experimental methodology. FAKE_* marks
// stolen-label datasets assembled by the attacker.
enum class Provenance { ODD, PDD, NPDD, TD, FAKE_NPD, FAKE_PD };

std::string provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

constexpr int kUnlabeled = -1;  // sentinel for datasets queried without labels

struct LabeledDataset {
    Tensor images;            // [N,C,H,W], values in [0,1]
    std::vector<int> labels;  // N entries in [0, n_classes) or kUnlabeled
    int n_classes = 0;
    Provenance provenance = Provenance::TD;

    int size() const { return images.rank() == 4 ? images.dim(0) : 0; }
    int channels() const { return images.rank() == 4 ? images.dim(1) : 0; }
    int height() const { return images.rank() == 4 ? images.dim(2) : 0; }
    int width() const { return images.rank() == 4 ? images.dim(3) : 0; }

    // one image as [C,H,W]
    Tensor image(int index) const;
    // contiguous sub-batch [count,C,H,W] starting at `first`
    Tensor image_batch(int first, int count) const;

    // throws std::invalid_argument on any broken invariant
    void validate() const;
};

// Gathers rows by index (duplicates allowed); labels follow images.
LabeledDataset take(const LabeledDataset& d, const std::vector<int>& indices);

// Same images, different label vector (size must match).
LabeledDataset with_labels(const LabeledDataset& d, std::vector<int> labels, Provenance prov);

std::vector<int> class_counts(const LabeledDataset& d);

}  // namespace copycat
