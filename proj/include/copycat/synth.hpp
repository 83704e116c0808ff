#pragma once

#include <cstdint>
#include <string>

#include "copycat/dataset.hpp"

namespace copycat {

// Rendering style for problem-domain images. The base style (ODD/TD) is fixed;
// `shift` in SynthProblemConfig restyles the PDD split to create domain shift.
enum class TextureFamily { Flat, Gradient, Speckle, Stripes };

std::string texture_family_name(TextureFamily t);
TextureFamily texture_family_from_name(const std::string& name);

struct StyleParams {
    TextureFamily texture = TextureFamily::Gradient;
    double stroke_min = 1.2;  // glyph stroke thickness, pixels
    double stroke_max = 2.2;
    double jitter = 0.06;     // center jitter, fraction of image side

    static StyleParams base();           // ODD/TD rendering style
    static StyleParams default_shift();  // PDD default
};

struct SynthProblemConfig {
    int n_classes = 4;
    int height = 16;
    int width = 16;
    int channels = 1;  // 1 or 3
    int odd_size = 0;
    int pdd_size = 0;
    int npdd_size = 0;
    int td_size = 0;
    StyleParams shift = StyleParams::default_shift();
    std::uint64_t seed = 0;
    // rotates the class->glyph assignment; lets a second config render a
    // problem disjoint from the first (used for generic pretraining data)
    int glyph_offset = 0;

    void validate() const;
};

constexpr int kGlyphFamilies = 12;

struct SynthSplits {
    LabeledDataset odd;   // class-balanced, base style
    LabeledDataset pdd;   // class-balanced, shifted style
    LabeledDataset npdd;  // class-free procedural textures, labels = -1
    LabeledDataset td;    // class-balanced, base style, disjoint draws from ODD
};

// Deterministic per config.seed; every pixel lands on the u8 grid (k/255) so
// IDX round trips and oracle queries are quantization-exact.
SynthSplits synth_problem(const SynthProblemConfig& config);

// a single labeled split of glyph renderings (used for pretraining data)
LabeledDataset synth_glyph_split(const SynthProblemConfig& config, int size, const StyleParams& style,
                                 std::uint64_t seed, Provenance provenance);

SynthProblemConfig synth_config_from_json(const std::string& json_text);
std::string synth_config_to_json(const SynthProblemConfig& config);

}  // namespace copycat
