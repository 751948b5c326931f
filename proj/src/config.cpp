#include "epiquant/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "epiquant/errors.hpp"
#include "epiquant/quantify_report.hpp"

namespace epiquant {

LabStats reference_tile_stats() {
    // Computed once from data/reference_tile.png (see tests/test_config.cpp,
    // which re-derives these from the file).
    LabStats s;
    s.mean_l = 83.160157198523819;
    s.mean_a = 5.5320620591982923;
    s.mean_b = -8.5254685177713867;
    s.std_l = 28.741491407797191;
    s.std_a = 9.3801862293784666;
    s.std_b = 16.099641779898882;
    return s;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: " + v);
    }
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not an integer: " + v);
    }
}

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError("config key '" + key + "': " + what);
}

}  // namespace

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig cfg;
    cfg.reinhard_target = reference_tile_stats();

    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"normalization.method",
         [&](const std::string& k, const std::string& v) {
             if (v == "reinhard")
                 cfg.method = NormalizationMethod::Reinhard;
             else if (v == "histogram")
                 cfg.method = NormalizationMethod::HistogramSpecification;
             else if (v == "macenko")
                 cfg.method = NormalizationMethod::Macenko;
             else if (v == "none")
                 cfg.method = NormalizationMethod::None;
             else
                 require(false, k, "expected reinhard|histogram|macenko|none");
         }},
        {"histogram.reference_path",
         [&](const std::string&, const std::string& v) { cfg.histogram_reference_path = v; }},
        {"reinhard.target.mean_l",
         [&](const std::string& k, const std::string& v) { cfg.reinhard_target.mean_l = parse_double(k, v); }},
        {"reinhard.target.mean_a",
         [&](const std::string& k, const std::string& v) { cfg.reinhard_target.mean_a = parse_double(k, v); }},
        {"reinhard.target.mean_b",
         [&](const std::string& k, const std::string& v) { cfg.reinhard_target.mean_b = parse_double(k, v); }},
        {"reinhard.target.std_l",
         [&](const std::string& k, const std::string& v) {
             cfg.reinhard_target.std_l = parse_double(k, v);
             require(cfg.reinhard_target.std_l > 0, k, "must be positive");
         }},
        {"reinhard.target.std_a",
         [&](const std::string& k, const std::string& v) {
             cfg.reinhard_target.std_a = parse_double(k, v);
             require(cfg.reinhard_target.std_a > 0, k, "must be positive");
         }},
        {"reinhard.target.std_b",
         [&](const std::string& k, const std::string& v) {
             cfg.reinhard_target.std_b = parse_double(k, v);
             require(cfg.reinhard_target.std_b > 0, k, "must be positive");
         }},
        {"macenko.od_cutoff",
         [&](const std::string& k, const std::string& v) {
             cfg.macenko.od_cutoff = parse_double(k, v);
             require(cfg.macenko.od_cutoff >= 0, k, "must be >= 0");
         }},
        {"macenko.alpha",
         [&](const std::string& k, const std::string& v) {
             cfg.macenko.alpha_percentile = parse_double(k, v);
             require(cfg.macenko.alpha_percentile > 0 && cfg.macenko.alpha_percentile < 50, k,
                     "must be in (0,50)");
         }},
        {"macenko.beta",
         [&](const std::string& k, const std::string& v) {
             cfg.macenko.beta_percentile = parse_double(k, v);
             require(cfg.macenko.beta_percentile > 50 && cfg.macenko.beta_percentile <= 100, k,
                     "must be in (50,100]");
         }},
        {"macenko.ref_max_c1",
         [&](const std::string& k, const std::string& v) {
             cfg.macenko.ref_max_c1 = parse_double(k, v);
             require(cfg.macenko.ref_max_c1 > 0, k, "must be positive");
         }},
        {"macenko.ref_max_c2",
         [&](const std::string& k, const std::string& v) {
             cfg.macenko.ref_max_c2 = parse_double(k, v);
             require(cfg.macenko.ref_max_c2 > 0, k, "must be positive");
         }},
    };

    // The remaining scalar keys follow one pattern each; fill the table.
    auto vec_setter = [&](std::array<double, 3>& target, int idx) {
        return [&target, idx](const std::string& k, const std::string& v) {
            target[idx] = parse_double(k, v);
        };
    };
    std::map<std::string, Setter> more = {
        {"stain.hema.r", vec_setter(cfg.stain_hema, 0)},
        {"stain.hema.g", vec_setter(cfg.stain_hema, 1)},
        {"stain.hema.b", vec_setter(cfg.stain_hema, 2)},
        {"stain.dab.r", vec_setter(cfg.stain_dab, 0)},
        {"stain.dab.g", vec_setter(cfg.stain_dab, 1)},
        {"stain.dab.b", vec_setter(cfg.stain_dab, 2)},
        {"stain.residual.r", vec_setter(cfg.stain_residual, 0)},
        {"stain.residual.g", vec_setter(cfg.stain_residual, 1)},
        {"stain.residual.b", vec_setter(cfg.stain_residual, 2)},
        {"mask.se_radius",
         [&](const std::string& k, const std::string& v) {
             cfg.se_radius = (int)parse_int(k, v);
             require(cfg.se_radius >= 1 && cfg.se_radius <= 256, k, "must be in [1,256]");
         }},
        {"mask.connectivity",
         [&](const std::string& k, const std::string& v) {
             cfg.connectivity = (int)parse_int(k, v);
             require(cfg.connectivity == 4 || cfg.connectivity == 8, k, "must be 4 or 8");
         }},
        {"rotation.step_deg",
         [&](const std::string& k, const std::string& v) {
             cfg.rotation_step_deg = parse_double(k, v);
             require(cfg.rotation_step_deg > 0 && cfg.rotation_step_deg <= 45, k,
                     "must be in (0,45]");
         }},
        {"rotation.margin_px",
         [&](const std::string& k, const std::string& v) {
             cfg.rotation_margin_px = (int)parse_int(k, v);
             require(cfg.rotation_margin_px >= 0, k, "must be >= 0");
         }},
        {"rotation.downsample_cap",
         [&](const std::string& k, const std::string& v) {
             cfg.rotation_downsample_cap = (int)parse_int(k, v);
             require(cfg.rotation_downsample_cap >= 16, k, "must be >= 16");
         }},
        {"gate.pixel_threshold",
         [&](const std::string& k, const std::string& v) {
             cfg.gate_pixel_threshold = (int)parse_int(k, v);
             require(cfg.gate_pixel_threshold >= 0 && cfg.gate_pixel_threshold <= 255, k,
                     "must be in [0,255]");
         }},
        {"gate.ap_threshold",
         [&](const std::string& k, const std::string& v) {
             cfg.gate_ap_threshold = parse_double(k, v);
             require(cfg.gate_ap_threshold > 0 && cfg.gate_ap_threshold < 100, k,
                     "must be in (0,100)");
         }},
        {"gate.region",
         [&](const std::string& k, const std::string& v) {
             if (v == "whole")
                 cfg.gate_region = GateRegion::WholeImage;
             else if (v == "tissue")
                 cfg.gate_region = GateRegion::TissueOnly;
             else
                 require(false, k, "expected whole|tissue");
         }},
        {"segment.seed",
         [&](const std::string& k, const std::string& v) {
             cfg.segment_seed = (std::uint64_t)parse_int(k, v);
         }},
        {"segment.uniformity_tau",
         [&](const std::string& k, const std::string& v) {
             cfg.uniformity_tau = parse_double(k, v);
             require(cfg.uniformity_tau >= 0, k, "must be >= 0");
         }},
        {"segment.dark_tau",
         [&](const std::string& k, const std::string& v) {
             cfg.dark_tau = parse_double(k, v);
             require(cfg.dark_tau >= 0 && cfg.dark_tau <= 255, k, "must be in [0,255]");
         }},
        {"overlay.color.r",
         [&](const std::string& k, const std::string& v) {
             const long long c = parse_int(k, v);
             require(c >= 0 && c <= 255, k, "must be in [0,255]");
             cfg.overlay_color.r = (std::uint8_t)c;
         }},
        {"overlay.color.g",
         [&](const std::string& k, const std::string& v) {
             const long long c = parse_int(k, v);
             require(c >= 0 && c <= 255, k, "must be in [0,255]");
             cfg.overlay_color.g = (std::uint8_t)c;
         }},
        {"overlay.color.b",
         [&](const std::string& k, const std::string& v) {
             const long long c = parse_int(k, v);
             require(c >= 0 && c <= 255, k, "must be in [0,255]");
             cfg.overlay_color.b = (std::uint8_t)c;
         }},
        {"output.dir",
         [&](const std::string&, const std::string& v) { cfg.output_dir = v; }},
        {"output.save_intermediates",
         [&](const std::string& k, const std::string& v) {
             if (v == "true")
                 cfg.save_intermediates = true;
             else if (v == "false")
                 cfg.save_intermediates = false;
             else
                 require(false, k, "expected true|false");
         }},
    };

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        auto it = setters.find(key);
        if (it != setters.end()) {
            it->second(key, value);
            continue;
        }
        auto it2 = more.find(key);
        if (it2 == more.end()) throw ConfigError("unknown config key: " + key);
        it2->second(key, value);
    }
    return cfg;
}

PipelineConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const PipelineConfig& cfg) {
    std::ostringstream out;
    auto kv = [&](const char* key, const std::string& value) {
        out << key << " = " << value << "\n";
    };
    const char* method = "reinhard";
    switch (cfg.method) {
        case NormalizationMethod::Reinhard: method = "reinhard"; break;
        case NormalizationMethod::HistogramSpecification: method = "histogram"; break;
        case NormalizationMethod::Macenko: method = "macenko"; break;
        case NormalizationMethod::None: method = "none"; break;
    }
    kv("normalization.method", method);
    kv("histogram.reference_path", cfg.histogram_reference_path);
    kv("reinhard.target.mean_l", format_number(cfg.reinhard_target.mean_l));
    kv("reinhard.target.mean_a", format_number(cfg.reinhard_target.mean_a));
    kv("reinhard.target.mean_b", format_number(cfg.reinhard_target.mean_b));
    kv("reinhard.target.std_l", format_number(cfg.reinhard_target.std_l));
    kv("reinhard.target.std_a", format_number(cfg.reinhard_target.std_a));
    kv("reinhard.target.std_b", format_number(cfg.reinhard_target.std_b));
    kv("macenko.od_cutoff", format_number(cfg.macenko.od_cutoff));
    kv("macenko.alpha", format_number(cfg.macenko.alpha_percentile));
    kv("macenko.beta", format_number(cfg.macenko.beta_percentile));
    kv("macenko.ref_max_c1", format_number(cfg.macenko.ref_max_c1));
    kv("macenko.ref_max_c2", format_number(cfg.macenko.ref_max_c2));
    kv("stain.hema.r", format_number(cfg.stain_hema[0]));
    kv("stain.hema.g", format_number(cfg.stain_hema[1]));
    kv("stain.hema.b", format_number(cfg.stain_hema[2]));
    kv("stain.dab.r", format_number(cfg.stain_dab[0]));
    kv("stain.dab.g", format_number(cfg.stain_dab[1]));
    kv("stain.dab.b", format_number(cfg.stain_dab[2]));
    kv("stain.residual.r", format_number(cfg.stain_residual[0]));
    kv("stain.residual.g", format_number(cfg.stain_residual[1]));
    kv("stain.residual.b", format_number(cfg.stain_residual[2]));
    kv("mask.se_radius", std::to_string(cfg.se_radius));
    kv("mask.connectivity", std::to_string(cfg.connectivity));
    kv("rotation.step_deg", format_number(cfg.rotation_step_deg));
    kv("rotation.margin_px", std::to_string(cfg.rotation_margin_px));
    kv("rotation.downsample_cap", std::to_string(cfg.rotation_downsample_cap));
    kv("gate.pixel_threshold", std::to_string(cfg.gate_pixel_threshold));
    kv("gate.ap_threshold", format_number(cfg.gate_ap_threshold));
    kv("gate.region", cfg.gate_region == GateRegion::WholeImage ? "whole" : "tissue");
    kv("segment.seed", std::to_string(cfg.segment_seed));
    kv("segment.uniformity_tau", format_number(cfg.uniformity_tau));
    kv("segment.dark_tau", format_number(cfg.dark_tau));
    kv("overlay.color.r", std::to_string(cfg.overlay_color.r));
    kv("overlay.color.g", std::to_string(cfg.overlay_color.g));
    kv("overlay.color.b", std::to_string(cfg.overlay_color.b));
    kv("output.dir", cfg.output_dir);
    kv("output.save_intermediates", cfg.save_intermediates ? "true" : "false");
    return out.str();
}

}  // namespace epiquant
