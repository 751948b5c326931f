#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epiquant/config.hpp"
#include "epiquant/dab_gate.hpp"
#include "epiquant/quantify_report.hpp"
#include "epiquant/stain_deconvolve.hpp"
#include "epiquant/types.hpp"

namespace epiquant {

enum class ControlLabel { Positive, Negative, Unknown };

struct ManifestEntry {
    std::string path;
    std::string marker;
    ControlLabel control = ControlLabel::Unknown;
};

struct BatchManifest {
    std::vector<ManifestEntry> entries;
};

// CSV manifest: `path,marker[,control]` with optional header line. Paths are
// checked for existence here; markers must be non-empty.
BatchManifest load_manifest_csv(const std::string& path);

// One entry per image found under dir/<marker>/..., sorted for determinism.
BatchManifest manifest_from_directory(const std::string& dir);

// Config plus derived per-run state (stain matrix, histogram reference).
struct PipelineContext {
    PipelineConfig cfg;
    StainMatrix matrix;
    std::optional<RgbImage> histogram_reference;
};

PipelineContext make_context(const PipelineConfig& cfg);

// Everything the per-image pipeline produces, pre-I/O.
struct ProcessOutput {
    double ap = 0.0;
    bool gated_out = false;
    std::optional<int> k;
    std::optional<double> dab_percent;
    double rotation_deg = 0.0;
    RgbImage oriented_original;
    RgbImage oriented_normalized;
    GrayImage oriented_hema;
    GrayImage oriented_dab;
    RgbImage oriented_dab_rgb;
    BinaryMask oriented_tissue;
    BinaryMask dab_mask;  // empty when gated out
    RgbImage overlay;     // only valid when quantified
};

// normalize -> deconvolve -> mask -> orient/crop -> AP gate -> segment ->
// quantify. Throws EmptyMaskError / DecodeError-style failures upward.
ProcessOutput process_image(const RgbImage& input, const PipelineContext& ctx);

// Normalization stage only (dispatch on ctx.cfg.method).
RgbImage normalize_image(const RgbImage& input, const PipelineContext& ctx);

// Pipeline through the AP stage, for gate calibration.
double compute_ap(const RgbImage& input, const PipelineContext& ctx);

// Loads, processes, writes overlay/mask artifacts under out_dir, and never
// throws for per-image failures: those come back as failed records.
QuantRecord run_single(const ManifestEntry& entry, const PipelineContext& ctx,
                       const std::string& out_dir, int row_index);

struct BatchResult {
    std::vector<QuantRecord> records;  // manifest order
    std::vector<MarkerSummary> summaries;
    bool any_failed = false;
    std::string report_path;
    std::string summary_path;
};

// Processes images with `jobs` worker threads; rows stay in manifest order
// and outputs are byte-identical for any jobs value.
BatchResult run_batch(const BatchManifest& manifest, const PipelineContext& ctx,
                      const std::string& out_dir, int jobs);

struct GateCalibrationOutput {
    CalibrationResult result;
    std::vector<double> positive_aps;
    std::vector<double> negative_aps;
    std::string roc_csv_path;
    std::string report_path;
};

// Runs the pipeline through the AP stage on two control directories and
// calibrates the gate threshold; writes the ROC CSV and a text summary.
GateCalibrationOutput calibrate_gate_cmd(const std::string& positive_dir,
                                         const std::string& negative_dir,
                                         const PipelineContext& ctx, const std::string& out_dir);

// Stain matrix from config vectors (rows unit-normalized; zero residual row
// requests the cross product).
StainMatrix stain_matrix_from_config(const PipelineConfig& cfg);

}  // namespace epiquant
