#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "epiquant/dab_gate.hpp"
#include "epiquant/stain_normalize.hpp"

namespace epiquant {

// Every tunable the pipeline exposes. Defaults make an empty config valid.
struct PipelineConfig {
    NormalizationMethod method = NormalizationMethod::Reinhard;
    LabStats reinhard_target;  // defaults embedded from data/reference_tile.png
    std::string histogram_reference_path;
    MacenkoParams macenko;

    std::array<double, 3> stain_hema = {0.650, 0.704, 0.286};
    std::array<double, 3> stain_dab = {0.269, 0.570, 0.776};
    std::array<double, 3> stain_residual = {0.0, 0.0, 0.0};  // zero = cross product

    int se_radius = 15;
    int connectivity = 8;

    double rotation_step_deg = 0.1;
    int rotation_margin_px = 10;
    int rotation_downsample_cap = 512;

    int gate_pixel_threshold = 130;
    double gate_ap_threshold = 0.6;
    GateRegion gate_region = GateRegion::WholeImage;

    std::uint64_t segment_seed = 0;
    double uniformity_tau = 2.0;
    double dark_tau = 192.0;

    Rgb8 overlay_color = {0, 255, 0};

    std::string output_dir = "out";
    bool save_intermediates = false;
};

// Lab statistics of data/reference_tile.png, the shipped Reinhard target.
LabStats reference_tile_stats();

// Flat `key = value` lines; '#' starts a comment. Unknown keys and
// out-of-range values raise ConfigError naming the key.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config_file(const std::string& path);

// Canonical form: every key, fixed order, canonical number formatting.
// serialize_config(parse_config(t)) is the canonical form of t.
std::string serialize_config(const PipelineConfig& cfg);

}  // namespace epiquant
