// coca — compactness-guided hierarchical segmentation CLI.
//
// Subcommands:
//   segment  image.ppm --config c.cfg --out dir      hard labels + slot masks + manifest
//   eval     run_dir gt.bin --mode fg|bg             ARI and mSC, printed and written
//   heatmap  image.ppm --config c.cfg --out heat.pgm per-pixel slot compactness
//   bench    --sizes 32,64,128,256 --reps 3          runtime scaling report
//
// Exit codes: 0 success, 1 I/O error, 2 config error, 3 numeric error.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coca/coca.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

unsigned thread_request(unsigned flag_value) {
    if (flag_value > 0) return coca::resolve_threads(flag_value);
    if (const char* env = std::getenv("COCA_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end && *end == '\0' && v > 0)
            return coca::resolve_threads(static_cast<unsigned>(v));
    }
    return coca::resolve_threads(0);
}

std::string slot_name(std::size_t s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "slot_%03zu.pgm", s);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw coca::IoError("cannot open " + path);
    out << text;
    if (!out) throw coca::IoError("write failed: " + path);
}

int cmd_segment(const std::string& image_path, const std::string& config_path,
                const std::string& out_dir, unsigned threads, std::uint64_t seed,
                bool seed_set) {
    coca::NetConfig cfg = coca::load_config(config_path);
    if (seed_set) cfg.anchor_seed = seed;
    const coca::Tensor img = coca::read_ppm(image_path);
    const coca::NetResult res = coca::coca_net(img, cfg, threads);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw coca::IoError("cannot create output directory " + out_dir);

    coca::LabelMap pred;
    pred.h = res.h;
    pred.w = res.w;
    pred.labels = res.labels;
    coca::write_labels(out_dir + "/labels.bin", pred);

    const std::size_t K = res.slot_masks.shape.empty() ? 0 : res.slot_masks.shape[0];
    std::vector<std::string> mask_files;
    for (std::size_t s = 0; s < K; ++s) {
        coca::Tensor gray({res.h, res.w});
        for (std::size_t p = 0; p < res.h * res.w; ++p)
            gray.data[p] = res.slot_masks.data[s * res.h * res.w + p];
        coca::write_pgm(out_dir + "/" + slot_name(s), gray);
        mask_files.push_back(slot_name(s));
    }

    std::set<int> assigned(res.labels.begin(), res.labels.end());
    std::size_t anchored = 0;
    for (std::size_t rk : res.final_window_slots) anchored += rk > 0 ? rk - 1 : 0;

    json manifest;
    manifest["image"] = image_path;
    manifest["config"] = config_path;
    manifest["height"] = res.h;
    manifest["width"] = res.w;
    manifest["slots"] = assigned.size();      // slots that win at least one pixel
    manifest["slots_total"] = K;              // materialized masks incl. empty ones
    manifest["anchored_slots"] = anchored;    // final-layer masks minus residuals
    manifest["final_window_slots"] = res.final_window_slots;
    manifest["anchor_mode"] = cfg.anchor_mode == coca::AnchorMode::Compact ? "compact" : "random";
    manifest["anchor_seed"] = cfg.anchor_seed;
    manifest["threads"] = threads;
    manifest["anchors"] = res.anchors;
    manifest["files"] = {{"labels", "labels.bin"}, {"slot_masks", mask_files}};
    write_text(out_dir + "/manifest.json", manifest.dump(2) + "\n");

    std::cout << "segment: " << assigned.size() << " slots (" << K << " materialized), labels in "
              << out_dir << "/labels.bin\n";
    return 0;
}

int cmd_eval(const std::string& run_dir, const std::string& gt_path, const std::string& mode,
             std::string out_path) {
    const coca::LabelFile pred = coca::read_labels(run_dir + "/labels.bin");
    const coca::LabelFile gt = coca::read_labels(gt_path);
    if (pred.map.h != gt.map.h || pred.map.w != gt.map.w)
        throw coca::ConfigError("eval: prediction and ground truth shapes differ");

    coca::LabelMap gtm = gt.map;
    coca::LabelMap prm = pred.map;
    if (mode == "fg") {
        gtm = coca::fg_filter(gtm, gt.bg_ids);
        prm.ignore = gtm.ignore;
    }
    const double a = coca::ari(prm, gtm);
    const double s = coca::msc(coca::labels_to_masks(prm), coca::labels_to_masks(gtm), gtm.ignore);

    std::cout << "ARI " << a << "\n" << "mSC " << s << "\n";
    if (out_path.empty()) out_path = run_dir + "/metrics_" + mode + ".json";
    json rep;
    rep["mode"] = mode;
    rep["ari"] = a;
    rep["msc"] = s;
    write_text(out_path, rep.dump(2) + "\n");
    return 0;
}

int cmd_heatmap(const std::string& image_path, const std::string& config_path,
                const std::string& out_path, unsigned threads, std::uint64_t seed,
                bool seed_set) {
    coca::NetConfig cfg = coca::load_config(config_path);
    if (seed_set) cfg.anchor_seed = seed;
    const coca::Tensor img = coca::read_ppm(image_path);
    const coca::Tensor heat = coca::compactness_heatmap(img, cfg, threads);
    coca::write_pgm(out_path, coca::minmax_scale(heat));
    std::cout << "heatmap: wrote " << out_path << "\n";
    return 0;
}

// Layer chain for an N x N bench image: window side stays 4, so t starts at
// N/4 and divides by 4 until a final global window; every layer keeps k=2.
std::vector<coca::LayerConfig> bench_chain(std::size_t n) {
    std::vector<coca::LayerConfig> layers;
    std::size_t t = n / 4;
    while (true) {
        coca::LayerConfig lc;
        lc.t = t;
        lc.k = 2;
        lc.tau = 4.0;
        layers.push_back(lc);
        if (t == 1) break;
        t = t >= 4 ? t / 4 : 1;
    }
    return layers;
}

int cmd_bench(const std::vector<std::size_t>& sizes, std::size_t reps, unsigned threads,
              std::uint64_t seed, const std::string& out_path) {
    if (sizes.empty()) throw coca::ConfigError("bench: at least one size required");
    if (reps == 0) throw coca::ConfigError("bench: reps must be positive");
    for (std::size_t n : sizes)
        if (n < 16 || (n & (n - 1)) != 0)
            throw coca::ConfigError("bench: sizes must be powers of two, at least 16");

    std::vector<std::array<double, 3>> palette = {
        {0.95, 0.15, 0.10}, {0.10, 0.80, 0.20}, {0.15, 0.25, 0.95},
        {0.95, 0.85, 0.10}, {0.85, 0.15, 0.85}, {0.10, 0.85, 0.85}};

    std::vector<double> medians;
    for (std::size_t n : sizes) {
        coca::SceneSpec spec;
        spec.h = spec.w = n;
        spec.min_objects = spec.max_objects = 3;
        spec.palette = palette;
        spec.seed = seed;
        coca::NetConfig cfg;
        cfg.layers = bench_chain(n);

        std::vector<double> times;
        for (std::size_t r = 0; r < reps; ++r) {
            const coca::Scene scene = coca::generate_scene(spec, r);
            const auto t0 = std::chrono::steady_clock::now();
            const coca::NetResult res = coca::coca_net(scene.image, cfg, threads);
            const auto t1 = std::chrono::steady_clock::now();
            if (res.labels.size() != n * n) throw coca::NumericError("bench: bad result shape");
            times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        }
        std::sort(times.begin(), times.end());
        const double med = times.size() % 2 == 1
                               ? times[times.size() / 2]
                               : 0.5 * (times[times.size() / 2 - 1] + times[times.size() / 2]);
        medians.push_back(med);
        std::cout << "N=" << n << " median_ms=" << med << " (reps=" << reps << ")\n";
    }

    json rep;
    rep["sizes"] = sizes;
    rep["medians_ms"] = medians;
    rep["reps"] = reps;
    rep["threads"] = threads;
    if (sizes.size() >= 2) {
        // least-squares slope of log(time) vs log(N)
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = static_cast<double>(sizes.size());
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            const double x = std::log(static_cast<double>(sizes[i]));
            const double y = std::log(std::max(medians[i], 1e-9));
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        rep["slope"] = slope;
        std::cout << "slope=" << slope << "\n";
    } else {
        std::cout << "slope=n/a (single size)\n";
    }
    if (!out_path.empty()) write_text(out_path, rep.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"compactness-guided hierarchical image segmentation"};
    app.require_subcommand(1);

    std::string image_path, config_path, run_dir, gt_path;
    std::string seg_out = "run", ev_out, hm_out = "heatmap.pgm", bn_out;
    std::string mode = "fg";
    unsigned threads_flag = 0;
    std::uint64_t seed = 0;
    std::string sizes_arg = "32,64,128,256";
    std::size_t reps = 3;

    CLI::App* seg = app.add_subcommand("segment", "segment an image into slot masks");
    seg->add_option("image", image_path, "input PPM image")->required();
    seg->add_option("--config", config_path, "run configuration file")->required();
    seg->add_option("--out", seg_out, "output directory")->capture_default_str();
    seg->add_option("--threads", threads_flag, "worker cap (0 = auto)");
    auto* seg_seed = seg->add_option("--seed", seed, "anchor-sampling seed override");

    CLI::App* ev = app.add_subcommand("eval", "score a run directory against ground truth");
    ev->add_option("run_dir", run_dir, "segment output directory")->required();
    ev->add_option("gt", gt_path, "ground-truth label sidecar")->required();
    ev->add_option("--mode", mode, "fg (background ignored) or bg (full image)")
        ->check(CLI::IsMember({"fg", "bg"}));
    ev->add_option("--out", ev_out, "metrics JSON path (default inside run_dir)");

    CLI::App* hm = app.add_subcommand("heatmap", "per-pixel compactness of assigned slots");
    hm->add_option("image", image_path, "input PPM image")->required();
    hm->add_option("--config", config_path, "run configuration file")->required();
    hm->add_option("--out", hm_out, "output PGM path")->capture_default_str();
    hm->add_option("--threads", threads_flag, "worker cap (0 = auto)");
    auto* hm_seed = hm->add_option("--seed", seed, "anchor-sampling seed override");

    CLI::App* bn = app.add_subcommand("bench", "runtime scaling across image sizes");
    bn->add_option("--sizes", sizes_arg, "comma-separated image sides")->capture_default_str();
    bn->add_option("--reps", reps, "repetitions per size")->capture_default_str();
    bn->add_option("--threads", threads_flag, "worker cap (0 = auto)");
    bn->add_option("--seed", seed, "scene generator seed");
    bn->add_option("--out", bn_out, "scaling report JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const unsigned threads = thread_request(threads_flag);
        if (seg->parsed())
            return cmd_segment(image_path, config_path, seg_out, threads, seed,
                               seg_seed->count() > 0);
        if (ev->parsed()) return cmd_eval(run_dir, gt_path, mode, ev_out);
        if (hm->parsed())
            return cmd_heatmap(image_path, config_path, hm_out, threads, seed,
                               hm_seed->count() > 0);
        if (bn->parsed()) {
            std::vector<std::size_t> sizes;
            std::stringstream ss(sizes_arg);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (tok.empty()) continue;
                std::size_t pos = 0;
                unsigned long v = 0;
                try {
                    v = std::stoul(tok, &pos);
                } catch (const std::exception&) {
                    throw coca::ConfigError("bench: bad size '" + tok + "'");
                }
                if (pos != tok.size()) throw coca::ConfigError("bench: bad size '" + tok + "'");
                sizes.push_back(v);
            }
            return cmd_bench(sizes, reps, threads, seed, bn_out);
        }
    } catch (const coca::IoError& e) {
        std::cerr << "error (I/O): " << e.what() << "\n";
        return 1;
    } catch (const coca::ConfigError& e) {
        std::cerr << "error (config): " << e.what() << "\n";
        return 2;
    } catch (const coca::NumericError& e) {
        std::cerr << "error (numeric): " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
