#pragma once

#include <string>

#include "copycat/dataset.hpp"

namespace copycat {

// IDX ubyte files, big-endian headers. Images: magic 0x00000803 with dims
// N,H,W (single channel) or 0x00000804 with dims N,C,H,W. Labels: magic
// 0x00000801 with dim N, one byte per label. Pixels store round(255*v);
// label byte 0xFF carries the unlabeled sentinel (-1).
void save_idx(const LabeledDataset& d, const std::string& images_path, const std::string& labels_path);

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path, int n_classes = 0,
                        Provenance provenance = Provenance::TD);

}  // namespace copycat
