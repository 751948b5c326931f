#include "epiquant/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "epiquant/dab_segment.hpp"
#include "epiquant/errors.hpp"
#include "epiquant/image_core.hpp"
#include "epiquant/image_io.hpp"
#include "epiquant/orient_crop.hpp"
#include "epiquant/tissue_mask.hpp"

namespace fs = std::filesystem;

namespace epiquant {

namespace {

bool is_image_file(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) {
        return (char)std::tolower(c);
    });
    return ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return (char)std::tolower(c); });
    return s;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write file: " + path);
    f << content;
}

}  // namespace

BatchManifest load_manifest_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open manifest: " + path);
    BatchManifest m;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = csv_split(line);
        if (first) {
            first = false;
            if (!fields.empty() && lower(fields[0]) == "path") continue;  // header
        }
        if (fields.size() < 2)
            throw ConfigError("manifest line needs path,marker[,control]: " + line);
        ManifestEntry e;
        e.path = fields[0];
        e.marker = fields[1];
        if (e.marker.empty()) throw ConfigError("manifest: empty marker for " + e.path);
        if (fields.size() >= 3 && !fields[2].empty()) {
            const std::string c = lower(fields[2]);
            if (c == "positive")
                e.control = ControlLabel::Positive;
            else if (c == "negative")
                e.control = ControlLabel::Negative;
            else if (c == "unknown")
                e.control = ControlLabel::Unknown;
            else
                throw ConfigError("manifest: bad control label: " + fields[2]);
        }
        if (!fs::exists(e.path)) throw ConfigError("manifest: missing file: " + e.path);
        m.entries.push_back(std::move(e));
    }
    return m;
}

BatchManifest manifest_from_directory(const std::string& dir) {
    if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir);
    BatchManifest m;
    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_directory()) subdirs.push_back(e.path());
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& sub : subdirs) {
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(sub))
            if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files)
            m.entries.push_back({f.string(), sub.filename().string(), ControlLabel::Unknown});
    }
    // Top-level images fall back to the directory's own name as the marker.
    std::vector<fs::path> loose;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && is_image_file(e.path())) loose.push_back(e.path());
    std::sort(loose.begin(), loose.end());
    for (const auto& f : loose)
        m.entries.push_back({f.string(), fs::path(dir).filename().string(),
                             ControlLabel::Unknown});
    return m;
}

StainMatrix stain_matrix_from_config(const PipelineConfig& cfg) {
    const auto& res = cfg.stain_residual;
    if (res[0] == 0.0 && res[1] == 0.0 && res[2] == 0.0)
        return StainMatrix::from_two_stains(cfg.stain_hema, cfg.stain_dab);
    return StainMatrix::from_rows(cfg.stain_hema, cfg.stain_dab, res);
}

PipelineContext make_context(const PipelineConfig& cfg) {
    PipelineContext ctx;
    ctx.cfg = cfg;
    ctx.matrix = stain_matrix_from_config(cfg);
    if (cfg.method == NormalizationMethod::HistogramSpecification) {
        if (cfg.histogram_reference_path.empty())
            throw ConfigError("histogram normalization needs histogram.reference_path");
        ctx.histogram_reference = load_image(cfg.histogram_reference_path);
    }
    return ctx;
}

RgbImage normalize_image(const RgbImage& input, const PipelineContext& ctx) {
    switch (ctx.cfg.method) {
        case NormalizationMethod::Reinhard:
            return reinhard_normalize(input, ctx.cfg.reinhard_target);
        case NormalizationMethod::HistogramSpecification:
            return histogram_specification(input, *ctx.histogram_reference);
        case NormalizationMethod::Macenko:
            return macenko_normalize(input, ctx.cfg.macenko);
        case NormalizationMethod::None:
            return input;
    }
    return input;
}

namespace {

struct OrientedLayers {
    RotationResult rotation;
    OrientPlan plan;
    RgbImage original;
    RgbImage normalized;
    GrayImage hema;
    GrayImage dab;
    RgbImage dab_rgb;
    BinaryMask tissue;
};

OrientedLayers orient_stage(const RgbImage& input, const PipelineContext& ctx,
                            const RgbImage& normalized, const StainChannels& ch) {
    OrientedLayers L;
    const BinaryMask tissue =
        build_tissue_mask(ch.hema_display, {ctx.cfg.se_radius, ctx.cfg.connectivity});
    RotationOptions ropt;
    ropt.step_deg = ctx.cfg.rotation_step_deg;
    ropt.downsample_cap = ctx.cfg.rotation_downsample_cap;
    L.rotation = find_rotation(tissue, ropt);
    L.plan = plan_orientation(tissue, L.rotation.angle_deg, ctx.cfg.rotation_margin_px);
    L.original = apply_plan(L.plan, input);
    L.normalized = apply_plan(L.plan, normalized);
    L.hema = apply_plan(L.plan, ch.hema_display);
    L.dab = apply_plan(L.plan, ch.dab_display);
    L.dab_rgb = apply_plan(L.plan, dab_display_rgb(ch));
    L.tissue = apply_plan_mask(L.plan);
    return L;
}

}  // namespace

ProcessOutput process_image(const RgbImage& input, const PipelineContext& ctx) {
    const RgbImage normalized = normalize_image(input, ctx);
    const StainChannels ch = deconvolve(od_from_rgb(normalized), ctx.matrix);
    OrientedLayers L = orient_stage(input, ctx, normalized, ch);

    ProcessOutput out;
    out.rotation_deg = L.rotation.angle_deg;
    out.oriented_original = std::move(L.original);
    out.oriented_normalized = std::move(L.normalized);
    out.oriented_hema = std::move(L.hema);
    out.oriented_dab = std::move(L.dab);
    out.oriented_dab_rgb = std::move(L.dab_rgb);
    out.oriented_tissue = std::move(L.tissue);

    GateConfig gate_cfg{ctx.cfg.gate_pixel_threshold, ctx.cfg.gate_ap_threshold,
                        ctx.cfg.gate_region};
    out.ap = average_proportion(out.oriented_dab, gate_cfg, out.oriented_tissue);
    if (!gate(out.ap, gate_cfg)) {
        out.gated_out = true;
        out.dab_mask = BinaryMask(out.oriented_tissue.width, out.oriented_tissue.height);
        return out;
    }

    SegmentConfig seg_cfg;
    seg_cfg.seed = ctx.cfg.segment_seed;
    seg_cfg.uniformity_tau = ctx.cfg.uniformity_tau;
    seg_cfg.dark_tau = ctx.cfg.dark_tau;
    SegmentResult seg =
        select_dab_region(out.oriented_dab_rgb, out.oriented_dab, out.oriented_tissue, seg_cfg);
    out.k = seg.k;
    out.dab_percent = dab_percentage(seg.dab_mask, out.oriented_tissue);
    out.dab_mask = std::move(seg.dab_mask);
    out.overlay = render_overlay(out.oriented_original, out.dab_mask, {ctx.cfg.overlay_color});
    return out;
}

double compute_ap(const RgbImage& input, const PipelineContext& ctx) {
    const RgbImage normalized = normalize_image(input, ctx);
    const StainChannels ch = deconvolve(od_from_rgb(normalized), ctx.matrix);
    OrientedLayers L = orient_stage(input, ctx, normalized, ch);
    GateConfig gate_cfg{ctx.cfg.gate_pixel_threshold, ctx.cfg.gate_ap_threshold,
                        ctx.cfg.gate_region};
    return average_proportion(L.dab, gate_cfg, L.tissue);
}

QuantRecord run_single(const ManifestEntry& entry, const PipelineContext& ctx,
                       const std::string& out_dir, int row_index) {
    QuantRecord rec;
    rec.image_id = fs::path(entry.path).stem().string();
    rec.marker = entry.marker;
    char prefix[16];
    std::snprintf(prefix, sizeof(prefix), "%04d_", row_index);
    const std::string base = (fs::path(out_dir) / (prefix + rec.image_id)).string();
    try {
        const RgbImage input = load_image(entry.path);
        const ProcessOutput out = process_image(input, ctx);
        rec.ap = out.ap;
        rec.gated_out = out.gated_out;
        rec.k = out.k;
        rec.dab_percent = out.dab_percent;
        rec.rotation_deg = out.rotation_deg;
        if (!out.gated_out) {
            rec.overlay_path = base + "_overlay.png";
            rec.mask_path = base + "_mask.png";
            save_png(rec.overlay_path, out.overlay);
            save_png(rec.mask_path, out.dab_mask);
        }
        if (ctx.cfg.save_intermediates) {
            save_png(base + "_normalized.png", out.oriented_normalized);
            save_png(base + "_hema.png", out.oriented_hema);
            save_png(base + "_dab.png", out.oriented_dab);
            save_png(base + "_dab_rgb.png", out.oriented_dab_rgb);
            save_png(base + "_tissue.png", out.oriented_tissue);
            save_png(base + "_rotated.png", out.oriented_original);
        }
    } catch (const Error& e) {
        rec.failed = true;
        rec.error = e.what();
    }
    return rec;
}

BatchResult run_batch(const BatchManifest& manifest, const PipelineContext& ctx,
                      const std::string& out_dir, int jobs) {
    if (manifest.entries.empty()) throw EmptyInputError("run_batch: empty manifest");
    fs::create_directories(out_dir);

    BatchResult result;
    result.records.resize(manifest.entries.size());
    std::atomic<std::size_t> next{0};
    const int workers =
        std::max(1, std::min<int>(jobs, (int)manifest.entries.size()));
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= manifest.entries.size()) return;
            result.records[i] = run_single(manifest.entries[i], ctx, out_dir, (int)i);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    for (const QuantRecord& r : result.records) result.any_failed |= r.failed;
    result.summaries = aggregate(result.records);
    result.report_path = (fs::path(out_dir) / "report.csv").string();
    result.summary_path = (fs::path(out_dir) / "summary.csv").string();
    write_text_file(result.report_path, report_csv(result.records));
    write_text_file(result.summary_path, summary_csv(result.summaries));
    return result;
}

namespace {

std::vector<std::string> list_images(const std::string& dir) {
    if (!fs::is_directory(dir)) throw EmptyInputError("not a directory: " + dir);
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && is_image_file(e.path())) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<std::string> out;
    for (const auto& f : files) out.push_back(f.string());
    return out;
}

}  // namespace

GateCalibrationOutput calibrate_gate_cmd(const std::string& positive_dir,
                                         const std::string& negative_dir,
                                         const PipelineContext& ctx, const std::string& out_dir) {
    GateCalibrationOutput out;
    for (int side = 0; side < 2; ++side) {
        const auto files = list_images(side == 0 ? positive_dir : negative_dir);
        auto& aps = side == 0 ? out.positive_aps : out.negative_aps;
        for (const auto& f : files) {
            try {
                aps.push_back(compute_ap(load_image(f), ctx));
            } catch (const Error&) {
                // Unprocessable controls are skipped, not fatal.
            }
        }
    }
    if (out.positive_aps.empty() || out.negative_aps.empty())
        throw EmptyInputError("calibrate-gate: need at least one usable image per directory");
    out.result = calibrate(out.positive_aps, out.negative_aps);

    fs::create_directories(out_dir);
    std::string roc = "fpr,tpr,threshold\n";
    for (const RocPoint& p : out.result.roc_points)
        roc += format_number(p.fpr) + "," + format_number(p.tpr) + "," +
               format_number(p.threshold) + "\n";
    out.roc_csv_path = (fs::path(out_dir) / "roc.csv").string();
    write_text_file(out.roc_csv_path, roc);

    std::string report;
    report += "gate calibration\n";
    report += "================\n";
    report += "positives: " + std::to_string(out.positive_aps.size()) + " images\n";
    report += "negatives: " + std::to_string(out.negative_aps.size()) + " images\n";
    report += "ap_threshold: " + format_number(out.result.ap_threshold) + "\n";
    report += "youden_j: " + format_number(out.result.youden_j) + "\n";
    report += "auc: " + format_number(out.result.auc) + "\n";
    out.report_path = (fs::path(out_dir) / "calibration.txt").string();
    write_text_file(out.report_path, report);
    return out;
}

}  // namespace epiquant
