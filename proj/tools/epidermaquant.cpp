#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "epiquant/errors.hpp"
#include "epiquant/pipeline.hpp"

namespace {

epiquant::PipelineConfig load_config_or_default(const std::string& config_path) {
    if (!config_path.empty()) return epiquant::load_config_file(config_path);
    if (const char* env = std::getenv("EPIDERMAQUANT_CONFIG"); env && *env)
        return epiquant::load_config_file(env);
    return epiquant::PipelineConfig{};
}

void print_records(const std::vector<epiquant::QuantRecord>& records) {
    for (const auto& r : records) {
        if (r.failed) {
            std::cout << r.image_id << " [" << r.marker << "] FAILED: " << r.error << "\n";
        } else if (r.gated_out) {
            std::cout << r.image_id << " [" << r.marker << "] gated out (AP "
                      << epiquant::format_number(r.ap) << "%)\n";
        } else {
            std::cout << r.image_id << " [" << r.marker << "] DAB "
                      << epiquant::format_number(*r.dab_percent) << "% (k=" << *r.k
                      << ", rotation " << epiquant::format_number(r.rotation_deg) << " deg)\n";
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DAB stain detection and quantification for H-DAB epidermis images"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    int jobs = 1;
    bool save_intermediates = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file (key = value lines)");
        cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
    };

    auto* run = app.add_subcommand("run", "process a batch of images");
    std::string manifest_path, input_dir;
    run->add_option("--manifest", manifest_path, "CSV manifest: path,marker[,control]");
    run->add_option("--input-dir", input_dir, "directory walk: marker = subdirectory name");
    run->add_option("--jobs", jobs, "worker threads")->capture_default_str();
    run->add_flag("--save-intermediates", save_intermediates, "write per-stage PNGs");
    add_common(run);

    auto* single = app.add_subcommand("single", "process one image");
    std::string image_path, marker = "unknown";
    single->add_option("--image", image_path, "input image")->required();
    single->add_option("--marker", marker, "marker label")->capture_default_str();
    single->add_flag("--save-intermediates", save_intermediates, "write per-stage PNGs");
    add_common(single);

    auto* cal = app.add_subcommand("calibrate-gate", "derive the AP gate threshold from controls");
    std::string pos_dir, neg_dir;
    cal->add_option("--positive", pos_dir, "directory of positive controls")->required();
    cal->add_option("--negative", neg_dir, "directory of negative controls")->required();
    add_common(cal);

    CLI11_PARSE(app, argc, argv);

    try {
        epiquant::PipelineConfig cfg = load_config_or_default(config_path);
        cfg.save_intermediates = cfg.save_intermediates || save_intermediates;
        const epiquant::PipelineContext ctx = epiquant::make_context(cfg);

        if (run->parsed()) {
            if (manifest_path.empty() == input_dir.empty()) {
                std::cerr << "run: need exactly one of --manifest or --input-dir\n";
                return 1;
            }
            const epiquant::BatchManifest manifest =
                manifest_path.empty() ? epiquant::manifest_from_directory(input_dir)
                                      : epiquant::load_manifest_csv(manifest_path);
            const epiquant::BatchResult result =
                epiquant::run_batch(manifest, ctx, out_dir, jobs);
            print_records(result.records);
            std::cout << "report: " << result.report_path << "\n";
            std::cout << "summary: " << result.summary_path << "\n";
            return result.any_failed ? 2 : 0;
        }
        if (single->parsed()) {
            std::filesystem::create_directories(out_dir);
            const epiquant::QuantRecord rec =
                epiquant::run_single({image_path, marker}, ctx, out_dir, 0);
            print_records({rec});
            return rec.failed ? 2 : 0;
        }
        if (cal->parsed()) {
            const epiquant::GateCalibrationOutput out =
                epiquant::calibrate_gate_cmd(pos_dir, neg_dir, ctx, out_dir);
            std::cout << "ap_threshold: " << epiquant::format_number(out.result.ap_threshold)
                      << "\nyouden_j: " << epiquant::format_number(out.result.youden_j)
                      << "\nauc: " << epiquant::format_number(out.result.auc) << "\n"
                      << "roc: " << out.roc_csv_path << "\n";
            return 0;
        }
    } catch (const epiquant::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const epiquant::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
