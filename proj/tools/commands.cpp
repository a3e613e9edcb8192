#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "seedvos/error.hpp"
#include "seedvos/evaluation.hpp"
#include "seedvos/parallel.hpp"
#include "seedvos/synthetic.hpp"

namespace seedvos::cli {

namespace {

using nlohmann::json;

std::string frame_name(std::size_t k, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%05zu%s", k, ext);
    return buf;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::FileNotFound, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
    }
}

void write_json(const json& doc, const fs::path& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

void make_dirs(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

// Sorted *.png files of a directory, by file name.
std::vector<fs::path> png_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) fail(ErrorCode::FileNotFound, "not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
    return files;
}

template <class T>
T get(const json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("config key '") + key + "': " + e.what());
    }
}

void apply_crf_json(const json& doc, CrfParams& crf) {
    for (const auto& [key, value] : doc.items()) {
        if (key == "iterations") crf.iterations = get<int>(doc, "iterations");
        else if (key == "smoothness_weight") crf.smoothness_weight = get<double>(doc, "smoothness_weight");
        else if (key == "smoothness_sxy") crf.smoothness_sxy = get<double>(doc, "smoothness_sxy");
        else if (key == "appearance_weight") crf.appearance_weight = get<double>(doc, "appearance_weight");
        else if (key == "appearance_sxy") crf.appearance_sxy = get<double>(doc, "appearance_sxy");
        else if (key == "appearance_srgb") crf.appearance_srgb = get<double>(doc, "appearance_srgb");
        else if (key == "truncated") crf.truncated = get<bool>(doc, "truncated");
        else if (key == "truncation_sigmas") crf.truncation_sigmas = get<double>(doc, "truncation_sigmas");
        else fail(ErrorCode::InvalidArgument, "unknown crf key '" + key + "'");
    }
}

struct SegmentArgs {
    std::string manifest, out, config_file, mode = "unsupervised", adapt_every, ranking;
    std::size_t seeds = 0, window = 0, bg_seeds = 0, stride = 0;
    double alpha = 0, objectness_bg = 0, motion_bg = 0, alpha_semi = 0;
    int crf_iterations = 0;
    bool no_crf = false, save_prob = false, evaluate = false;
    unsigned threads = 0;
};

int cmd_segment(const SegmentArgs& a, const CLI::App& app, std::ostream& out) {
    const auto given = [&](const char* name) { return app.count(name) > 0; };

    PipelineConfig config;
    if (!a.config_file.empty()) apply_config_json(read_json(a.config_file), config);
    if (given("--seeds")) config.num_seeds = a.seeds;
    if (given("--window")) config.window = a.window;
    if (given("--bg-seeds")) config.num_background_seeds = a.bg_seeds;
    if (given("--alpha")) config.alpha = a.alpha;
    if (given("--objectness-bg")) config.objectness_bg = a.objectness_bg;
    if (given("--motion-bg")) config.motion_bg = a.motion_bg;
    if (given("--alpha-semi")) config.alpha_semi = a.alpha_semi;
    if (given("--stride")) config.track_stride = a.stride;
    if (given("--adapt-every")) config.adapt_every = parse_adapt_every(a.adapt_every);
    if (given("--ranking")) config.ranking = parse_ranking_mode(a.ranking);
    if (given("--crf-iterations")) config.crf.iterations = a.crf_iterations;
    if (a.no_crf) config.crf_enabled = false;
    config.validate();

    const bool semi = a.mode == "semi";
    const auto start = std::chrono::steady_clock::now();
    const Sequence seq = load_sequence(fs::path(a.manifest));
    if (semi && !seq.annotation0) fail(ErrorCode::InvalidArgument, "semi-supervised mode needs annotation0 in the manifest");
    const double load_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const SegmentationResult result = semi ? segment_semisupervised(seq, *seq.annotation0, config)
                                           : segment_sequence(seq, config);

    const fs::path dir(a.out);
    make_dirs(dir / "masks");
    if (a.save_prob) make_dirs(dir / "prob");
    for (std::size_t k = 0; k < result.frames.size(); ++k) {
        save_mask(result.frames[k].mask, dir / "masks" / frame_name(k, ".png"));
        if (a.save_prob) save_tensor(result.frames[k].probability, dir / "prob" / frame_name(k, ".npy"));
    }

    json run;
    run["manifest"] = fs::absolute(a.manifest).string();
    run["sequence"] = seq.name;
    run["mode"] = semi ? "semi" : "unsupervised";
    run["threads"] = max_threads();
    run["config"] = config_to_json(config);
    json timings = result.timings;
    timings["load"] = load_seconds;
    timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    run["timings"] = timings;
    run["selected_track"] = result.selected_track ? json(*result.selected_track) : json(nullptr);
    run["track_scores"] = result.track_scores;
    run["track_frames"] = result.track_frames;
    json seeds = json::array();
    for (std::size_t i = 0; i < result.foreground_seed_pixels.size(); ++i) {
        const PixelIndex p = result.foreground_seed_pixels[i];
        seeds.push_back({{"frame", result.track_frames.at(i)}, {"row", p / seq.width()}, {"col", p % seq.width()}});
    }
    run["foreground_seeds"] = seeds;
    std::vector<std::size_t> pool_frames;
    for (const auto& f : result.frames) pool_frames.push_back(f.pool_frame);
    run["pool_frames"] = pool_frames;
    run["diagnostics"] = result.diagnostics;

    if (a.evaluate) {
        if (!seq.has_full_gt()) fail(ErrorCode::InvalidArgument, "--eval needs gt for every frame");
        std::vector<BinaryMask> pred;
        for (const auto& f : result.frames) pred.push_back(f.mask);
        const std::vector<BinaryMask> gt = seq.gt_masks();
        SequenceScores scores = evaluate_sequence(seq.name, pred, gt);
        if (!result.foreground_seed_pixels.empty()) {
            std::vector<BinaryMask> seed_gt;
            for (std::size_t f : result.track_frames) seed_gt.push_back(gt.at(f));
            scores.seed_accuracy = seed_accuracy(result.foreground_seed_pixels, seed_gt);
        }
        const std::vector<SequenceScores> all{scores};
        write_scores_csv(all, dir / "scores.csv");
        write_scores_json(all, dir / "scores.json");
        run["J_mean"] = scores.mean_region;
        run["F_mean"] = scores.mean_boundary;
        out << "J " << scores.mean_region << "  F " << scores.mean_boundary << '\n';
    }
    write_json(run, dir / "run.json");
    out << "wrote " << result.frames.size() << " masks to " << (dir / "masks").string() << '\n';
    return Ok;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir, const std::string& out_dir, const std::string& name,
             double tolerance, const std::string& run_file, std::ostream& out) {
    const auto pred_files = png_files(pred_dir), gt_files = png_files(gt_dir);
    if (pred_files.size() != gt_files.size()) {
        fail(ErrorCode::InvalidArgument, "frame count mismatch: " + std::to_string(pred_files.size()) + " predictions, " +
                                              std::to_string(gt_files.size()) + " ground-truth masks");
    }
    if (gt_files.empty()) fail(ErrorCode::InvalidArgument, "no masks in " + gt_dir);
    std::vector<BinaryMask> pred, gt;
    for (std::size_t k = 0; k < gt_files.size(); ++k) {
        if (pred_files[k].filename() != gt_files[k].filename()) {
            fail(ErrorCode::InvalidArgument, "frame sets differ: " + pred_files[k].filename().string() + " vs " +
                                                  gt_files[k].filename().string());
        }
        pred.push_back(load_mask(pred_files[k]));
        gt.push_back(load_mask(gt_files[k]));
    }
    SequenceScores scores = evaluate_sequence(name, pred, gt, tolerance);

    if (!run_file.empty()) {
        const json run = read_json(run_file);
        std::vector<PixelIndex> seeds;
        std::vector<BinaryMask> seed_gt;
        for (const auto& s : run.value("foreground_seeds", json::array())) {
            const std::size_t f = s.at("frame").get<std::size_t>();
            if (f >= gt.size()) fail(ErrorCode::InvalidArgument, "seed frame out of range in " + run_file);
            seeds.push_back(s.at("row").get<std::size_t>() * gt[f].width() + s.at("col").get<std::size_t>());
            seed_gt.push_back(gt[f]);
        }
        if (!seeds.empty()) scores.seed_accuracy = seed_accuracy(seeds, seed_gt);
    }

    const fs::path dir(out_dir);
    make_dirs(dir);
    const std::vector<SequenceScores> all{scores};
    write_scores_csv(all, dir / "scores.csv");
    write_scores_json(all, dir / "scores.json");
    out << "J " << scores.mean_region << "  F " << scores.mean_boundary;
    if (scores.seed_accuracy) out << "  seed accuracy " << *scores.seed_accuracy;
    out << '\n';
    return Ok;
}

int cmd_synth(const std::string& preset_name, const std::string& out_dir, std::uint64_t seed, std::size_t frames,
              bool frames_given, std::ostream& out) {
    synthetic::SceneSpec spec = synthetic::preset(preset_name, seed);
    if (frames_given) spec.frames = frames;
    const auto generated = synthetic::generate_sequence(spec);
    make_dirs(out_dir);
    const fs::path manifest = synthetic::write_sequence(generated, out_dir);
    out << manifest.string() << '\n';
    return Ok;
}

std::string optional_cell(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", *v);
    return buf;
}

int cmd_drift(const std::string& manifest, const std::string& csv, std::ostream& out, std::ostream& err) {
    const Sequence seq = load_sequence(fs::path(manifest));
    if (!seq.has_full_gt()) fail(ErrorCode::InvalidArgument, "drift analysis needs gt for every frame");
    const std::vector<BinaryMask> gt = seq.gt_masks();
    std::vector<std::string> diagnostics;
    const auto drift = embedding_drift(seq, gt, &diagnostics);
    const auto wrong = misclassified_fg_fraction(seq, gt);
    for (const auto& d : diagnostics) err << "warning: " << d << '\n';

    std::ofstream f(csv);
    if (!f) fail(ErrorCode::Io, "cannot write " + csv);
    f << "frame,d_fg,d_bg,misclassified_fg\n";
    for (std::size_t k = 0; k < drift.size(); ++k) {
        f << k << ',' << optional_cell(drift[k].foreground) << ',' << optional_cell(drift[k].background) << ','
          << optional_cell(wrong[k]) << '\n';
    }
    out << "wrote " << csv << '\n';
    return Ok;
}

}  // namespace

json config_to_json(const PipelineConfig& c) {
    return {{"num_seeds", c.num_seeds},
            {"window", c.window},
            {"num_background_seeds", c.background_seed_count()},
            {"alpha", c.alpha},
            {"objectness_bg", c.objectness_bg},
            {"motion_bg", c.motion_bg},
            {"alpha_semi", c.alpha_semi},
            {"ranking", to_string(c.ranking)},
            {"adapt_every", c.adapt_every ? json(*c.adapt_every) : json("inf")},
            {"track_stride", c.track_stride},
            {"crf_enabled", c.crf_enabled},
            {"crf",
             {{"iterations", c.crf.iterations},
              {"smoothness_weight", c.crf.smoothness_weight},
              {"smoothness_sxy", c.crf.smoothness_sxy},
              {"appearance_weight", c.crf.appearance_weight},
              {"appearance_sxy", c.crf.appearance_sxy},
              {"appearance_srgb", c.crf.appearance_srgb},
              {"truncated", c.crf.truncated},
              {"truncation_sigmas", c.crf.truncation_sigmas}}}};
}

void apply_config_json(const json& doc, PipelineConfig& c) {
    if (!doc.is_object()) fail(ErrorCode::InvalidArgument, "config must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key == "num_seeds") c.num_seeds = get<std::size_t>(doc, "num_seeds");
        else if (key == "window") c.window = get<std::size_t>(doc, "window");
        else if (key == "num_background_seeds") {
            if (value.is_null()) c.num_background_seeds.reset();
            else c.num_background_seeds = get<std::size_t>(doc, "num_background_seeds");
        } else if (key == "alpha") c.alpha = get<double>(doc, "alpha");
        else if (key == "objectness_bg") c.objectness_bg = get<double>(doc, "objectness_bg");
        else if (key == "motion_bg") c.motion_bg = get<double>(doc, "motion_bg");
        else if (key == "alpha_semi") c.alpha_semi = get<double>(doc, "alpha_semi");
        else if (key == "ranking") c.ranking = parse_ranking_mode(get<std::string>(doc, "ranking"));
        else if (key == "adapt_every") {
            c.adapt_every = value.is_string() ? parse_adapt_every(value.get<std::string>())
                                              : std::optional<std::size_t>(get<std::size_t>(doc, "adapt_every"));
        } else if (key == "track_stride") c.track_stride = get<std::size_t>(doc, "track_stride");
        else if (key == "crf_enabled") c.crf_enabled = get<bool>(doc, "crf_enabled");
        else if (key == "crf") {
            if (!value.is_object()) fail(ErrorCode::InvalidArgument, "config key 'crf' must be an object");
            apply_crf_json(value, c.crf);
        } else fail(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
}

std::optional<std::size_t> parse_adapt_every(const std::string& text) {
    if (text == "inf" || text == "never") return std::nullopt;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || text.empty() || text[0] == '-' || v == 0) {
        fail(ErrorCode::InvalidArgument, "adapt-every must be a positive integer or 'inf', got '" + text + "'");
    }
    return static_cast<std::size_t>(v);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Primary-object video segmentation from dense per-frame features", "seedvos"};
    app.require_subcommand(1);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (0 = all cores)");

    SegmentArgs seg;
    auto* segment = app.add_subcommand("segment", "Segment a sequence given its manifest");
    segment->add_option("manifest", seg.manifest, "Sequence manifest (JSON)")->required();
    segment->add_option("-o,--out", seg.out, "Output directory")->required();
    segment->add_option("--config", seg.config_file, "JSON config; flags override it");
    segment->add_option("--mode", seg.mode)->check(CLI::IsMember({"unsupervised", "semi"}));
    segment->add_option("--adapt-every", seg.adapt_every, "Rebuild seed pools every N frames, or 'inf'");
    segment->add_option("--ranking", seg.ranking, "combined | motion | objectness");
    segment->add_flag("--no-crf", seg.no_crf, "Skip CRF refinement");
    segment->add_flag("--save-prob", seg.save_prob, "Also write probability maps (prob/NNNNN.npy)");
    segment->add_flag("--eval", seg.evaluate, "Score against the manifest's gt masks");
    segment->add_option("--seeds", seg.seeds, "Seeds per frame");
    segment->add_option("--window", seg.window, "Candidate window size (odd)");
    segment->add_option("--bg-seeds", seg.bg_seeds, "Background seeds for the initial FG estimate");
    segment->add_option("--alpha", seg.alpha, "FG expansion overlap");
    segment->add_option("--objectness-bg", seg.objectness_bg);
    segment->add_option("--motion-bg", seg.motion_bg);
    segment->add_option("--alpha-semi", seg.alpha_semi);
    segment->add_option("--stride", seg.stride, "Track every n-th frame");
    segment->add_option("--crf-iterations", seg.crf_iterations);

    std::string pred_dir, gt_dir, eval_out = ".", eval_name = "sequence", run_file;
    double tolerance = 0.0;
    auto* eval = app.add_subcommand("eval", "Score predicted masks against ground truth");
    eval->add_option("pred", pred_dir, "Directory of predicted PNG masks")->required();
    eval->add_option("gt", gt_dir, "Directory of ground-truth PNG masks")->required();
    eval->add_option("-o,--out", eval_out, "Directory for scores.csv / scores.json");
    eval->add_option("--name", eval_name, "Sequence name in the tables");
    eval->add_option("--tolerance", tolerance, "Boundary tolerance in pixels (default from image size)");
    eval->add_option("--run", run_file, "run.json of a segment run, for seed accuracy");

    std::string preset_name = "clean", synth_out;
    std::uint64_t seed = 7;
    std::size_t frames = 0;
    auto* synth = app.add_subcommand("synth", "Write a synthetic sequence");
    synth->add_option("preset", preset_name, "clean | drift | ranking | still");
    synth->add_option("-o,--out", synth_out, "Output directory")->required();
    synth->add_option("--seed", seed);
    synth->add_option("--frames", frames);

    std::string drift_manifest, drift_csv = "drift.csv";
    auto* drift = app.add_subcommand("drift", "Embedding drift curves relative to frame 0");
    drift->add_option("manifest", drift_manifest, "Sequence manifest with gt")->required();
    drift->add_option("-o,--out", drift_csv, "CSV path");

    for (auto* sub : {segment, eval, synth, drift}) sub->add_option("--threads", threads, "Worker thread cap");

    std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(rest.begin(), rest.end());
    try {
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            app.exit(e, out, err);
            return Ok;
        }
        app.exit(e, out, err);
        return InputError;
    }

    try {
        set_max_threads(threads);
        if (*segment) return cmd_segment(seg, *segment, out);
        if (*eval) return cmd_eval(pred_dir, gt_dir, eval_out, eval_name, tolerance, run_file, out);
        if (*synth) return cmd_synth(preset_name, synth_out, seed, frames, synth->count("--frames") > 0, out);
        return cmd_drift(drift_manifest, drift_csv, out, err);
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        return e.is_input_error() ? InputError : PipelineError;
    } catch (const std::exception& e) {
        err << "error [internal]: " << e.what() << '\n';
        return PipelineError;
    }
}

}  // namespace seedvos::cli
