#include "sd/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sd/composite.hpp"
#include "sd/error.hpp"
#include "sd/formats.hpp"
#include "sd/metrics.hpp"
#include "sd/model_io.hpp"
#include "sd/pointcloud.hpp"
#include "sd/refmask.hpp"
#include "sd/render.hpp"
#include "sd/synth.hpp"
#include "sd/train.hpp"
#include "sd/tune.hpp"
#include "sd/vectorize.hpp"

namespace sd::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Globals {
    std::string config;
    unsigned threads = 1;
};

/// Fills options not given on the command line from the JSON config:
/// first from the object named after the subcommand, then from top-level keys.
void apply_config(CLI::App& sub, const std::string& path) {
    if (path.empty()) return;
    json cfg;
    try {
        cfg = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid config JSON: ") + e.what(), 0);
    }
    if (!cfg.is_object()) throw ArgumentError("config must be a JSON object");
    const json* section = cfg.contains(sub.get_name()) && cfg[sub.get_name()].is_object() ? &cfg[sub.get_name()] : nullptr;
    for (CLI::Option* opt : sub.get_options()) {
        if (opt->count() > 0 || opt->get_lnames().empty()) continue;
        const std::string key = opt->get_lnames().front();
        const json* value = nullptr;
        if (section && section->contains(key)) value = &(*section)[key];
        else if (cfg.contains(key) && !cfg[key].is_object()) value = &cfg[key];
        if (!value) continue;
        auto as_text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        if (value->is_array()) {
            for (const auto& v : *value) opt->add_result(as_text(v));
        } else {
            opt->add_result(as_text(*value));
        }
        opt->run_callback();
    }
}

void require(const CLI::App& sub, std::initializer_list<const char*> names) {
    for (const char* n : names) {
        const CLI::Option* opt = sub.get_option(n);
        if (opt->count() == 0) throw ArgumentError(std::string("missing required option ") + n);
    }
}

void mark_window(const GridSpec& spec, const Tile& t, std::vector<std::uint8_t>& valid) {
    for (std::int64_t r = t.window.row0; r < t.window.row0 + t.window.n_rows && r < spec.height; ++r)
        for (std::int64_t c = t.window.col0; c < t.window.col0 + t.window.n_cols && c < spec.width; ++c)
            valid[static_cast<std::size_t>(r) * spec.width + static_cast<std::size_t>(c)] = 1;
}

std::vector<std::uint8_t> tile_subset_mask(const GridSpec& spec, const std::vector<Tile>& tiles, int municipality) {
    std::vector<std::uint8_t> valid(spec.pixel_count(), 0);
    for (const Tile& t : tiles)
        if (t.municipality == municipality) mark_window(spec, t, valid);
    return valid;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) std::cout << text;
    else write_text(path, text);
}

} // namespace

int run(int argc, char** argv) {
    CLI::App app{"Forest stand development-class mapping pipeline", "sdpipe"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "JSON config; flags override its values")->check(CLI::ExistingFile);
    app.add_option("--threads", g.threads, "worker threads for training (1 = bitwise reproducible)")
        ->check(CLI::Range(1u, 256u));
    app.add_flag_callback(
        "--version", [] {
            std::cout << json{{"name", "sdpipe"}, {"version", kVersion}}.dump() << "\n";
            throw CLI::Success();
        },
        "print version as JSON");

    // chm
    std::string points, ground, grid_path, out;
    double radius = 0.15, cap = 50.0, power = 2.0;
    std::size_t knn = 10;
    bool raw = false;
    auto* chm = app.add_subcommand("chm", "height-normalize a cloud and rasterize a canopy height model");
    chm->add_option("--points", points, "point CSV");
    chm->add_option("--ground", ground, "cloud supplying ground points (default: --points)");
    chm->add_option("--grid", grid_path, "grid JSON");
    chm->add_option("--out", out, "output SDGR");
    chm->add_option("--radius", radius, "sub-circle radius in m")->capture_default_str();
    chm->add_option("--cap", cap, "height cap in m")->capture_default_str();
    chm->add_option("--k", knn, "IDW neighbors")->capture_default_str();
    chm->add_option("--power", power, "IDW power")->capture_default_str();
    chm->add_flag("--raw", raw, "keep heights in meters with nodata (skip capping and scaling)");

    auto* dtm = app.add_subcommand("dtm", "TIN terrain model from ground points");
    dtm->add_option("--points", points, "point CSV");
    dtm->add_option("--grid", grid_path, "grid JSON");
    dtm->add_option("--out", out, "output SDGR");

    int fill_kernel = 3;
    auto* ortho = app.add_subcommand("ortho", "per-cell spectral means with gap filling");
    ortho->add_option("--points", points, "point CSV with r,g,b,nir");
    ortho->add_option("--grid", grid_path, "grid JSON");
    ortho->add_option("--out", out, "output SDGR (R, G, B, NIR on the 0..255 scale)");
    ortho->add_option("--fill-kernel", fill_kernel, "gap-fill kernel size")->capture_default_str();

    std::string ortho_path, chm_path, dtm_path, source = "als";
    double dtm_max = kDtmMax;
    auto* comp = app.add_subcommand("composite", "stack scaled channels into an RGBI composite");
    comp->add_option("--ortho", ortho_path, "spectral SDGR from ortho");
    comp->add_option("--chm", chm_path, "finalized CHM SDGR");
    comp->add_option("--dtm", dtm_path, "DTM SDGR (selects RGBI-DAP-DTM)");
    comp->add_option("--source", source, "canopy source")->check(CLI::IsMember({"als", "dap"}))->capture_default_str();
    comp->add_option("--dtm-max", dtm_max, "DTM scaling maximum in m")->capture_default_str();
    comp->add_option("--out", out, "output SDGR");

    std::string stands_path;
    auto* rstands = app.add_subcommand("rasterize-stands", "rasterize a stand map to a class mask");
    rstands->add_option("--stands", stands_path, "stand map JSON");
    rstands->add_option("--grid", grid_path, "grid JSON");
    rstands->add_option("--out", out, "output SDGR");

    std::string munis_path;
    std::uint32_t tile_px = 512, val_period = 5;
    double min_coverage = 0.0;
    std::vector<std::uint32_t> val_offset{0, 0};
    auto* tiles_cmd = app.add_subcommand("tiles", "tile the grid and assign municipalities and splits");
    tiles_cmd->add_option("--grid", grid_path, "grid JSON");
    tiles_cmd->add_option("--municipalities", munis_path, "municipality JSON");
    tiles_cmd->add_option("--tile-px", tile_px, "tile side in pixels")->capture_default_str();
    tiles_cmd->add_option("--min-coverage", min_coverage, "drop tiles below this in-grid fraction")->capture_default_str();
    tiles_cmd->add_option("--val-period", val_period, "validation pattern period")->capture_default_str();
    tiles_cmd->add_option("--val-offset", val_offset, "validation cluster offset: row col")->expected(2);
    tiles_cmd->add_option("--out", out, "output tiles JSON");

    std::string tiles_path;
    auto* folds_cmd = app.add_subcommand("folds", "plan one fold per municipality");
    folds_cmd->add_option("--tiles", tiles_path, "tiles JSON");
    folds_cmd->add_option("--out", out, "output fold plan JSON");

    std::string composite_path, labels_path, folds_path, history_path, model_path;
    std::size_t fold_index = 0;
    std::uint64_t seed = 0;
    UNetConfig ucfg;
    TrainConfig tcfg;
    LossConfig lcfg;
    auto add_training_options = [&](CLI::App* s, bool hyper) {
        s->add_option("--composite", composite_path, "composite SDGR");
        s->add_option("--labels", labels_path, "reference class mask SDGR");
        s->add_option("--tiles", tiles_path, "tiles JSON");
        s->add_option("--folds", folds_path, "fold plan JSON");
        s->add_option("--depth", ucfg.depth, "U-Net encoder levels")->capture_default_str();
        s->add_option("--epochs", tcfg.max_epochs, "maximum epochs")->capture_default_str();
        s->add_option("--patience", tcfg.patience, "early-stopping patience")->capture_default_str();
        s->add_option("--seed", seed, "top-level seed")->capture_default_str();
        if (!hyper) return;
        s->add_option("--lr", tcfg.learning_rate, "learning rate")->capture_default_str();
        s->add_option("--batch", tcfg.batch_size, "batch size")->capture_default_str();
        s->add_option("--filters", ucfg.base_filters, "base filters")->capture_default_str();
        s->add_option("--kernel", ucfg.kernel_size, "kernel size")->capture_default_str();
        s->add_option("--dropout", ucfg.dropout, "dropout probability")->capture_default_str();
        s->add_option("--alpha", lcfg.alpha, "Tversky alpha (beta = 1 - alpha)")->capture_default_str();
        s->add_option("--gamma", lcfg.gamma, "focal exponent")->capture_default_str();
        s->add_option("--epsilon", lcfg.epsilon, "Tversky smoothing")->capture_default_str();
    };
    auto* train_cmd = app.add_subcommand("train", "train a U-Net on one fold");
    add_training_options(train_cmd, true);
    train_cmd->add_option("--fold", fold_index, "fold index in the plan")->capture_default_str();
    train_cmd->add_option("--out", model_path, "output model (SDNN)");
    train_cmd->add_option("--history", history_path, "per-epoch history CSV");

    auto* predict_cmd = app.add_subcommand("predict", "predict a class mask for a composite");
    predict_cmd->add_option("--model", model_path, "model file");
    predict_cmd->add_option("--composite", composite_path, "composite SDGR");
    predict_cmd->add_option("--tile-px", tile_px, "prediction tile side")->capture_default_str();
    predict_cmd->add_option("--out", out, "output mask SDGR");

    std::string pred_path, ref_path, csv_path;
    int municipality = -1;
    bool per_tile = false;
    auto* eval_cmd = app.add_subcommand("evaluate", "metric report of a prediction against a reference");
    eval_cmd->add_option("--pred", pred_path, "predicted mask SDGR");
    eval_cmd->add_option("--ref", ref_path, "reference mask SDGR");
    eval_cmd->add_option("--tiles", tiles_path, "tiles JSON (with --municipality)");
    eval_cmd->add_option("--municipality", municipality, "evaluate only this municipality's tiles");
    eval_cmd->add_flag("--per-tile", per_tile, "average per-tile metrics instead of pooling counts (needs --tiles)");
    eval_cmd->add_option("--out", out, "report JSON (default stdout)");
    eval_cmd->add_option("--csv", csv_path, "flat CSV report");

    std::string a_path, b_path;
    auto* agree_cmd = app.add_subcommand("agree", "pairwise agreement of two predictions");
    agree_cmd->add_option("--a", a_path, "mask used as reference");
    agree_cmd->add_option("--b", b_path, "mask used as prediction");
    agree_cmd->add_option("--out", out, "report JSON (default stdout)");
    agree_cmd->add_option("--csv", csv_path, "flat CSV report");

    std::uint32_t n_trials = 30;
    auto* tune_cmd = app.add_subcommand("tune", "random hyperparameter search with fold cross-validation");
    add_training_options(tune_cmd, false);
    tune_cmd->add_option("--trials", n_trials, "number of trials")->capture_default_str();
    tune_cmd->add_option("--out", out, "study log (JSON lines)");

    std::string mask_path, merge_log;
    int connectivity = 4;
    double mmu = 2000.0;
    auto* vec_cmd = app.add_subcommand("vectorize", "class mask to stand polygons with MMU filtering");
    vec_cmd->add_option("--mask", mask_path, "class mask SDGR");
    vec_cmd->add_option("--connectivity", connectivity, "4 or 8")->check(CLI::IsMember({4, 8}))->capture_default_str();
    vec_cmd->add_option("--mmu", mmu, "minimum mapping unit in m^2")->capture_default_str();
    vec_cmd->add_option("--merge-log", merge_log, "merge log CSV");
    vec_cmd->add_option("--out", out, "output stand JSON");

    SceneSpec scene_spec;
    std::string out_dir;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scene");
    synth_cmd->add_option("--seed", scene_spec.seed, "scene seed")->capture_default_str();
    synth_cmd->add_option("--out", out_dir, "output directory");
    synth_cmd->add_option("--width", scene_spec.width_m, "extent east-west in m")->capture_default_str();
    synth_cmd->add_option("--height", scene_spec.height_m, "extent north-south in m")->capture_default_str();
    synth_cmd->add_option("--cell-size", scene_spec.cell_size, "grid cell size in m")->capture_default_str();
    synth_cmd->add_option("--stands", scene_spec.n_stands, "approximate stand count")->capture_default_str();
    synth_cmd->add_option("--als-density", scene_spec.als_density, "ALS points per m^2")->capture_default_str();
    synth_cmd->add_option("--dap-density", scene_spec.dap_density, "DAP points per m^2")->capture_default_str();
    synth_cmd->add_option("--smoothing", scene_spec.dap_smoothing_radius, "DAP moving-max radius in m")
        ->capture_default_str();
    synth_cmd->add_option("--muni-cols", scene_spec.municipality_cols, "municipality columns")->capture_default_str();
    synth_cmd->add_option("--muni-rows", scene_spec.municipality_rows, "municipality rows")->capture_default_str();

    std::string in_path, style = "classmap";
    std::uint16_t channel = 0;
    auto* render_cmd = app.add_subcommand("render", "render a grid or mask as PNG");
    render_cmd->add_option("--in", in_path, "input SDGR");
    render_cmd->add_option("--style", style, "classmap, grayscale or rgb")->capture_default_str();
    render_cmd->add_option("--channel", channel, "channel for grayscale")->capture_default_str();
    render_cmd->add_option("--out", out, "output PNG");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        apply_config(*sub, g.config);
        tcfg.threads = g.threads;
        const std::string name = sub->get_name();

        if (name == "chm") {
            require(*sub, {"--points", "--grid", "--out"});
            const GridSpec spec = load_grid_spec(grid_path);
            const PointCloud cloud = load_points(points);
            const PointCloud norm = ground.empty() ? normalize_heights(cloud, IdwOptions{knn, power})
                                                   : normalize_heights(cloud, load_points(ground), IdwOptions{knn, power});
            GeoGrid h = rasterize_canopy_p2r(norm, spec, radius);
            save_grid(raw ? h : finalize_height_grid(h, cap), out);
        } else if (name == "dtm") {
            require(*sub, {"--points", "--grid", "--out"});
            save_grid(rasterize_terrain_tin(load_points(points), load_grid_spec(grid_path)), out);
        } else if (name == "ortho") {
            require(*sub, {"--points", "--grid", "--out"});
            save_grid(rasterize_spectral(load_points(points), load_grid_spec(grid_path), fill_kernel), out);
        } else if (name == "composite") {
            require(*sub, {"--ortho", "--chm", "--out"});
            const GeoGrid spectral = scale_channel(load_grid(ortho_path), ChannelKind::Spectral);
            const GeoGrid height = load_grid(chm_path);
            std::optional<GeoGrid> terrain;
            if (!dtm_path.empty()) terrain = scale_channel(load_grid(dtm_path), ChannelKind::Dtm, dtm_max);
            const Composite c = stack(spectral, height, terrain, source == "dap" ? CanopySource::Dap : CanopySource::Als);
            save_grid(c.grid, out);
            std::cerr << to_string(c.combo) << "\n";
        } else if (name == "rasterize-stands") {
            require(*sub, {"--stands", "--grid", "--out"});
            std::vector<std::string> warnings;
            const auto stands = parse_stands(read_text(stands_path));
            for (const auto& s : stands) validate_stand(s);
            save_grid(rasterize_stands(stands, load_grid_spec(grid_path), &warnings), out);
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        } else if (name == "tiles") {
            require(*sub, {"--grid", "--municipalities", "--out"});
            TileSet set;
            set.grid = load_grid_spec(grid_path);
            set.tile_px = tile_px;
            set.pattern.period = val_period;
            set.pattern.offset = {val_offset.at(0), val_offset.at(1)};
            set.tiles = make_tiles(set.grid, tile_px, min_coverage);
            assign_municipalities(set.tiles, set.grid, parse_municipalities(read_text(munis_path)));
            assign_splits(set.tiles, set.pattern);
            write_text(out, tiles_json(set));
        } else if (name == "folds") {
            require(*sub, {"--tiles", "--out"});
            const TileSet set = parse_tiles(read_text(tiles_path));
            write_text(out, fold_plan_json(plan_folds(set.tiles, set.pattern)));
        } else if (name == "train") {
            require(*sub, {"--composite", "--labels", "--tiles", "--folds", "--out"});
            const GeoGrid image = load_grid(composite_path);
            const GeoGrid labels = load_grid(labels_path);
            const TileSet set = parse_tiles(read_text(tiles_path));
            const FoldPlan plan = parse_fold_plan(read_text(folds_path));
            if (fold_index >= plan.folds.size()) throw ArgumentError("fold index out of range");
            const Fold& fold = plan.folds[fold_index];
            ucfg.in_channels = image.channels();
            tcfg.seed = seed;
            Rng init_rng = Rng(seed).split("init");
            const auto train_set = gather_samples(image, labels, set.tiles, fold.train);
            const auto val_set = gather_samples(image, labels, set.tiles, fold.val);
            const TrainResult r = train(init_params<float>(ucfg, init_rng), tcfg, lcfg, train_set, val_set, {},
                                        [](const EpochRecord& e) {
                                            std::cerr << "epoch " << e.epoch << " train_loss " << e.train_loss
                                                      << " val_loss " << e.val_loss << " val_mmcc " << e.val_mmcc
                                                      << "\n";
                                        });
            save_model(r.params, model_path);
            if (!history_path.empty()) {
                std::ofstream h(history_path);
                if (!h) throw IoError("cannot open " + history_path);
                write_history_csv(r.history, h);
            }
            std::cout << json{{"best_epoch", r.best_epoch},
                              {"epochs_run", r.epochs_run},
                              {"val_loss", r.history[r.best_epoch - 1].val_loss},
                              {"val_mmcc", r.history[r.best_epoch - 1].val_mmcc}}
                             .dump()
                      << "\n";
        } else if (name == "predict") {
            require(*sub, {"--model", "--composite", "--out"});
            save_grid(predict_grid(load_model(model_path), load_grid(composite_path), tile_px), out);
        } else if (name == "evaluate") {
            require(*sub, {"--pred", "--ref"});
            const GeoGrid pred = load_grid(pred_path), ref = load_grid(ref_path);
            if ((municipality >= 0 || per_tile) && tiles_path.empty())
                throw ArgumentError("--municipality and --per-tile need --tiles");
            std::vector<Tile> tiles;
            if (!tiles_path.empty()) tiles = parse_tiles(read_text(tiles_path)).tiles;
            MetricReport rep;
            if (per_tile) {
                std::vector<MetricReport> parts;
                for (const Tile& t : tiles) {
                    if (municipality >= 0 && t.municipality != municipality) continue;
                    std::vector<std::uint8_t> valid(ref.spec().pixel_count(), 0);
                    mark_window(ref.spec(), t, valid);
                    const ConfusionMatrix cm = confusion(pred, ref, kNumClasses, &valid);
                    if (cm.total() > 0) parts.push_back(make_report(cm));
                }
                rep = average_reports(parts, ref_path, pred_path);
            } else {
                std::vector<std::uint8_t> valid;
                if (municipality >= 0) valid = tile_subset_mask(ref.spec(), tiles, municipality);
                rep = make_report(confusion(pred, ref, kNumClasses, valid.empty() ? nullptr : &valid), ref_path,
                                  pred_path);
            }
            emit(report_json(rep), out);
            if (!csv_path.empty()) write_text(csv_path, report_csv(rep));
        } else if (name == "agree") {
            require(*sub, {"--a", "--b"});
            const MetricReport rep = agreement(load_grid(a_path), load_grid(b_path), nullptr, a_path, b_path);
            emit(report_json(rep), out);
            if (!csv_path.empty()) write_text(csv_path, report_csv(rep));
        } else if (name == "tune") {
            require(*sub, {"--composite", "--labels", "--tiles", "--folds", "--out"});
            const GeoGrid image = load_grid(composite_path);
            const GeoGrid labels = load_grid(labels_path);
            const TileSet set = parse_tiles(read_text(tiles_path));
            const FoldPlan plan = parse_fold_plan(read_text(folds_path));
            FoldTrainingSetup setup;
            setup.depth = ucfg.depth;
            setup.in_channels = image.channels();
            setup.max_epochs = tcfg.max_epochs;
            setup.patience = tcfg.patience;
            setup.seed = Rng(seed).split("folds").next();
            setup.threads = g.threads;
            std::ofstream log(out, std::ios::trunc);
            if (!log) throw IoError("cannot open " + out);
            const StudyResult study = run_study(SearchSpace{}, n_trials, plan,
                                                unet_fold_trainer(image, labels, set.tiles, setup), seed, nullptr,
                                                [&log](const Trial& t) { log << trial_json(t) << "\n" << std::flush; });
            const Trial& best = study.best_trial();
            std::cout << "best trial " << best.id << " objective " << *best.objective << "\n"
                      << "  learning_rate " << best.hp.learning_rate << "\n"
                      << "  batch_size    " << best.hp.batch_size << "\n"
                      << "  base_filters  " << best.hp.base_filters << "\n"
                      << "  kernel_size   " << best.hp.kernel_size << "\n"
                      << "  dropout       " << best.hp.dropout << "\n"
                      << "  alpha         " << best.hp.alpha << "\n"
                      << "  beta          " << best.hp.beta << "\n"
                      << "  gamma         " << best.hp.gamma << "\n";
        } else if (name == "vectorize") {
            require(*sub, {"--mask", "--out"});
            RegionMap map = components(load_grid(mask_path), connectivity);
            const auto merges = mmu_filter(map, mmu);
            write_text(out, stand_polygons_json(polygonize(map)));
            if (!merge_log.empty()) {
                std::ostringstream csv;
                csv << std::setprecision(17) << "absorbed,into,area_m2,shared_boundary_m\n";
                for (const auto& m : merges) csv << m.absorbed << ',' << m.into << ',' << m.area_m2 << ',' << m.shared_boundary_m << '\n';
                write_text(merge_log, csv.str());
            }
        } else if (name == "synth") {
            require(*sub, {"--out"});
            const Scene scene = generate_scene(scene_spec);
            fs::create_directories(out_dir);
            const fs::path dir(out_dir);
            save_points(scene.als, dir / "als.csv");
            save_points(scene.dap, dir / "dap.csv");
            write_text(dir / "stands.json", stands_json(scene.stands));
            write_text(dir / "municipalities.json", municipalities_json(scene.municipalities));
            write_text(dir / "grid.json", grid_spec_json(scene.grid));
            save_grid(scene.true_mask, dir / "truth.sdgr");
        } else if (name == "render") {
            require(*sub, {"--in", "--out"});
            save_png(render_png(load_grid(in_path), render_style_from_string(style), channel), out);
        }
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace sd::cli
