#include "varflow/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "varflow/beltrami.hpp"
#include "varflow/chanvese.hpp"
#include "varflow/fixtures.hpp"
#include "varflow/gac.hpp"
#include "varflow/image_io.hpp"
#include "varflow/trace.hpp"
#include "varflow/variation.hpp"

namespace varflow {

namespace fs = std::filesystem;
using nlohmann::json;

nlohmann::json default_config(const std::string& command) {
    json cfg{{"input", ""}, {"output_dir", "out"}, {"seed", 1}};
    if (command == "gac") {
        cfg["gac"] = {{"sigma", 2.0},
                      {"contrast", 0.1},
                      {"dt", 1.0},
                      {"steps", 400},
                      {"kind", "geometric"},
                      {"project_normal", false},
                      {"resample_every", 10},
                      {"snapshot_every", 50},
                      {"init_circle", {{"cx", 64.0}, {"cy", 64.0}, {"r", 45.0}, {"n", 256}}},
                      {"synthetic", {{"nx", 128}, {"ny", 128}, {"disk_r", 25.0}}}};
    } else if (command == "beltrami") {
        cfg["beltrami"] = {{"beta", 1.0},
                           {"dt", 0.2},
                           {"steps", 100},
                           {"refreeze_every", 1},
                           {"synthetic", {{"nx", 64}, {"ny", 64}}}};
    } else if (command == "chanvese") {
        cfg["chanvese"] = {{"mu", 0.05},
                           {"eps_h", 1.0},
                           {"eps_grad", 1e-8},
                           {"dt", 0.5},
                           {"reinit_every", -1},
                           {"max_steps", 500},
                           {"tol", 1e-3},
                           {"mode", "geometric"},
                           {"init", "circle"},
                           {"init_circle", {{"cx", 64.0}, {"cy", 64.0}, {"r", 40.0}}},
                           {"checker_period", 16.0},
                           {"phi_path", ""},
                           {"synthetic",
                            {{"nx", 128}, {"ny", 128}, {"disk_r", 20.0}, {"noise_sigma", 0.1}}}};
    } else if (command == "gradcheck") {
        cfg["gradcheck"] = {{"model", "gac"}, {"kind", ""}, {"trials", 20}, {"tolerance", -1.0}};
    } else {
        throw ValidationError("unknown command '" + command + "'");
    }
    return cfg;
}

RunConfig load_config(const std::string& command, const std::string& config_path) {
    RunConfig cfg{command, default_config(command)};
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) throw ValidationError("config file not found: " + config_path);
        json user;
        try {
            f >> user;
        } catch (const json::exception& e) {
            throw ValidationError("config parse error in " + config_path + ": " + e.what());
        }
        cfg.params.merge_patch(user);
    }
    return cfg;
}

void apply_override(RunConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ValidationError("override must look like key=value, got '" + assignment + "'");
    std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    std::string pointer = "/";
    for (char c : key) pointer += (c == '.') ? '/' : c;
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::exception&) {
        parsed = value;  // plain string
    }
    config.params[json::json_pointer(pointer)] = parsed;
}

namespace {

[[noreturn]] void reject(const std::string& msg) { throw ValidationError(msg); }

double need_pos(const json& j, const std::string& key, const std::string& ctx) {
    const double v = j.at(key).get<double>();
    if (!(v > 0.0) || !std::isfinite(v)) reject(ctx + "." + key + " must be > 0");
    return v;
}

double need_nonneg(const json& j, const std::string& key, const std::string& ctx) {
    const double v = j.at(key).get<double>();
    if (!(v >= 0.0) || !std::isfinite(v)) reject(ctx + "." + key + " must be >= 0");
    return v;
}

int need_int_min(const json& j, const std::string& key, int lo, const std::string& ctx) {
    const int v = j.at(key).get<int>();
    if (v < lo) reject(ctx + "." + key + " must be >= " + std::to_string(lo));
    return v;
}

ScalarField to_gray(const std::vector<ScalarField>& channels) {
    if (channels.size() == 1) return channels[0];
    ScalarField out(channels[0].spec());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = 0.0;
        for (const auto& c : channels) acc += c[i];
        out[i] = acc / static_cast<double>(channels.size());
    }
    return out;
}

InnerProductKind parse_curve_kind(const std::string& kind) {
    if (kind == "geometric" || kind == "geometric_curve") return InnerProductKind::GeometricCurve;
    if (kind == "parameter" || kind == "parameter_l2") return InnerProductKind::ParameterL2;
    reject("gac.kind must be 'geometric' or 'parameter', got '" + kind + "'");
}

struct Manifest {
    json metrics = json::object();
    std::vector<std::string> artifacts;
    std::string status = "ok";
};

void write_manifest(const RunConfig& config, const fs::path& dir, Manifest& m) {
    json manifest{{"command", config.command},
                  {"config", config.params},
                  {"metrics", m.metrics},
                  {"status", m.status}};
    json artifacts = json::object();
    for (const auto& a : m.artifacts) artifacts[a] = file_fnv64((dir / a).string());
    manifest["artifacts"] = artifacts;
    std::ofstream f(dir / "manifest.json", std::ios::binary);
    f << manifest.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

int run_gac(const RunConfig& config, const fs::path& dir, Manifest& m) {
    const json& g = config.params.at("gac");
    EdgeIndicatorParams eparams{need_nonneg(g, "sigma", "gac"), need_pos(g, "contrast", "gac")};
    GacEvolveParams ev;
    ev.dt = need_pos(g, "dt", "gac");
    ev.steps = need_int_min(g, "steps", 1, "gac");
    ev.kind = parse_curve_kind(g.at("kind").get<std::string>());
    ev.project_normal = g.at("project_normal").get<bool>();
    ev.resample_every = need_int_min(g, "resample_every", 0, "gac");
    ev.snapshot_every = need_int_min(g, "snapshot_every", 0, "gac");

    const json& ic = g.at("init_circle");
    const double cx = ic.at("cx").get<double>(), cy = ic.at("cy").get<double>();
    const double r = need_pos(ic, "r", "gac.init_circle");
    const int n = need_int_min(ic, "n", 8, "gac.init_circle");

    ScalarField image = [&] {
        if (!config.input().empty()) return to_gray(read_image(config.input()));
        const json& syn = g.at("synthetic");
        GridSpec spec{need_int_min(syn, "nx", 3, "gac.synthetic"),
                      need_int_min(syn, "ny", 3, "gac.synthetic"), 1.0, 1.0};
        return disk_image(spec, spec.nx / 2.0, spec.ny / 2.0,
                          need_pos(syn, "disk_r", "gac.synthetic"));
    }();

    const ScalarField indicator = edge_indicator(image, eparams);
    GacState state(circle_curve(cx, cy, r, static_cast<std::size_t>(n)), indicator);
    GacResult result = evolve_gac(std::move(state), ev);

    write_pgm(indicator, (dir / "edge_indicator.pgm").string());
    result.trace.write_csv((dir / "trace.csv").string());
    export_curve_csv(result.snapshots, (dir / "curve_snapshots.csv").string());
    export_curve_csv({{result.trace.back().step, result.curve}}, (dir / "curve_final.csv").string());
    m.artifacts = {"edge_indicator.pgm", "trace.csv", "curve_snapshots.csv", "curve_final.csv"};
    m.metrics["final_energy"] = result.trace.back().energy;
    m.metrics["final_length"] = result.trace.extra(result.trace.back(), "curve_length");

    if (result.collapsed) {
        m.status = "collapsed";
        m.metrics["collapse_step"] = result.collapse_step;
        std::cerr << "error: numerical: curve collapsed at step " << result.collapse_step << "\n";
        return 3;
    }
    return 0;
}

int run_beltrami(const RunConfig& config, const fs::path& dir, Manifest& m) {
    const json& b = config.params.at("beltrami");
    BeltramiEvolveParams ev;
    ev.dt = need_pos(b, "dt", "beltrami");
    ev.steps = need_int_min(b, "steps", 1, "beltrami");
    ev.refreeze_every = need_int_min(b, "refreeze_every", 1, "beltrami");
    const double beta = need_pos(b, "beta", "beltrami");

    std::vector<ScalarField> channels;
    if (!config.input().empty()) {
        channels = read_image(config.input());
    } else {
        const json& syn = b.at("synthetic");
        GridSpec spec{need_int_min(syn, "nx", 3, "beltrami.synthetic"),
                      need_int_min(syn, "ny", 3, "beltrami.synthetic"), 1.0, 1.0};
        channels.push_back(smooth_image(spec, config.seed()));
    }

    BeltramiResult result = evolve_beltrami({channels, beta}, ev);
    result.trace.write_csv((dir / "trace.csv").string());
    m.artifacts = {"trace.csv"};
    if (result.embedding.channels.size() == 3) {
        write_ppm(result.embedding.channels, (dir / "flowed.ppm").string());
        m.artifacts.push_back("flowed.ppm");
    } else {
        write_pgm(result.embedding.channels[0], (dir / "flowed.pgm").string());
        m.artifacts.push_back("flowed.pgm");
    }
    m.metrics["final_action"] = result.trace.back().energy;
    return 0;
}

int run_chanvese(const RunConfig& config, const fs::path& dir, Manifest& m) {
    const json& c = config.params.at("chanvese");
    CvParams params;
    params.mu = need_nonneg(c, "mu", "chanvese");
    params.eps_h = need_pos(c, "eps_h", "chanvese");
    params.eps_grad = need_pos(c, "eps_grad", "chanvese");
    params.dt = need_pos(c, "dt", "chanvese");
    params.max_steps = need_int_min(c, "max_steps", 1, "chanvese");
    params.tol = need_nonneg(c, "tol", "chanvese");

    const std::string mode_name = c.at("mode").get<std::string>();
    CvMode mode;
    if (mode_name == "classical") mode = CvMode::Classical;
    else if (mode_name == "geometric") mode = CvMode::Geometric;
    else reject("chanvese.mode must be 'classical' or 'geometric'");

    const int reinit = c.at("reinit_every").get<int>();
    params.reinit_every = reinit >= 0 ? reinit : (mode == CvMode::Geometric ? 10 : 0);

    bool synthetic = config.input().empty();
    double disk_r = 0.0, disk_cx = 0.0, disk_cy = 0.0;
    ScalarField image = [&] {
        if (!synthetic) return to_gray(read_image(config.input()));
        const json& syn = c.at("synthetic");
        GridSpec spec{need_int_min(syn, "nx", 3, "chanvese.synthetic"),
                      need_int_min(syn, "ny", 3, "chanvese.synthetic"), 1.0, 1.0};
        disk_r = need_pos(syn, "disk_r", "chanvese.synthetic");
        disk_cx = spec.nx / 2.0;
        disk_cy = spec.ny / 2.0;
        return noisy_disk_image(spec, disk_cx, disk_cy, disk_r,
                                need_nonneg(syn, "noise_sigma", "chanvese.synthetic"),
                                config.seed());
    }();

    const std::string init = c.at("init").get<std::string>();
    ScalarField phi0 = [&]() -> ScalarField {
        if (init == "circle") {
            const json& ic = c.at("init_circle");
            return signed_distance_circle(image.spec(), ic.at("cx").get<double>(),
                                          ic.at("cy").get<double>(),
                                          need_pos(ic, "r", "chanvese.init_circle"));
        }
        if (init == "checkerboard") {
            const double period = need_pos(c, "checker_period", "chanvese");
            ScalarField p(image.spec());
            for (int y = 0; y < p.ny(); ++y)
                for (int x = 0; x < p.nx(); ++x)
                    p.at(x, y) = std::sin(std::numbers::pi * x / period) *
                                 std::sin(std::numbers::pi * y / period);
            return p;
        }
        if (init == "file") {
            const std::string path = c.at("phi_path").get<std::string>();
            if (path.empty()) reject("chanvese.phi_path required when init='file'");
            if (!fs::exists(path)) reject("chanvese.phi_path does not exist: " + path);
            ScalarField p = read_matrix(path);
            if (!(p.spec() == image.spec()))
                reject("chanvese.phi_path matrix dimensions do not match the image");
            return p;
        }
        reject("chanvese.init must be 'circle', 'checkerboard' or 'file'");
    }();

    CvResult result = evolve_cv(image, phi0, params, mode);

    ScalarField mask(image.spec());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = result.state.phi[i] > 0.0 ? 1.0 : 0.0;
    write_pgm(mask, (dir / "mask.pgm").string());
    write_matrix(result.state.phi, (dir / "phi.txt").string());
    result.trace.write_csv((dir / "trace.csv").string());
    m.artifacts = {"mask.pgm", "phi.txt", "trace.csv"};
    m.metrics["steps_run"] = result.steps_run;
    m.metrics["converged"] = result.converged;
    m.metrics["c1"] = result.state.stats.c1;
    m.metrics["c2"] = result.state.stats.c2;

    if (synthetic) {
        // ground truth known by construction: pixel accuracy of the final mask
        std::size_t correct = 0;
        for (int y = 0; y < image.ny(); ++y)
            for (int x = 0; x < image.nx(); ++x) {
                const bool inside = std::hypot(x - disk_cx, y - disk_cy) <= disk_r;
                if (inside == (mask.at(x, y) > 0.5)) ++correct;
            }
        m.metrics["mask_accuracy"] =
            static_cast<double>(correct) / static_cast<double>(image.size());
    }

    if (result.collapsed) {
        m.status = "collapsed";
        std::cerr << "error: numerical: phi collapsed to one sign at step " << result.steps_run
                  << "\n";
        return 3;
    }
    return 0;
}

int run_gradcheck(const RunConfig& config, const fs::path& dir, Manifest& m) {
    const json& g = config.params.at("gradcheck");
    const std::string model = g.at("model").get<std::string>();
    const int trials = need_int_min(g, "trials", 1, "gradcheck");
    std::string kind = g.at("kind").get<std::string>();
    double tol = g.at("tolerance").get<double>();
    const std::uint64_t seed = config.seed();

    GradCheckReport report;
    if (model == "gac") {
        if (kind.empty()) kind = "geometric_curve";
        if (tol <= 0.0) tol = 1e-4;
        const GridSpec spec{128, 128, 1.0, 1.0};
        const ScalarField indicator = edge_indicator(smooth_image(spec, seed), {2.0, 0.2});
        const ClosedCurve ellipse = ellipse_curve(64.0, 64.0, 42.0, 30.0, 256);
        const GacFunctional F(indicator, ellipse.size());
        const std::vector<double> state = GacFunctional::pack(ellipse);
        const MetricWeights w = kind == "parameter_l2" || kind == "parameter"
                                    ? parameter_weights(state.size())
                                    : geometric_curve_weights(geometry(ellipse));
        report = check_gradient(F, w, state, trials, seed, tol,
                                smooth_curve_directions(ellipse.size()));
    } else if (model == "polyakov") {
        if (kind.empty()) kind = "geometric_surface";
        if (tol <= 0.0) tol = 1e-4;
        const GridSpec spec{32, 32, 1.0, 1.0};
        EmbeddingMap e{{smooth_image(spec, seed)}, 1.0};
        InducedMetric frozen = induced_metric(e);
        const std::vector<double> state = e.channels[0].values();
        const MetricWeights w = kind == "parameter_l2" || kind == "parameter"
                                    ? parameter_weights(state.size())
                                    : geometric_surface_weights(frozen.det_g);
        const PolyakovFunctional F(std::move(e), std::move(frozen), 0);
        report = check_gradient(F, w, state, trials, seed, tol,
                                smooth_grid_directions(spec, false));
    } else if (model == "chanvese") {
        if (kind.empty()) kind = "parameter_l2";
        if (tol <= 0.0) tol = 2e-3;
        const GridSpec spec{32, 32, 1.0, 1.0};
        const ScalarField image = smooth_image(spec, seed);
        ScalarField phi = signed_distance_circle(spec, 16.0, 16.0, 9.0);
        for (std::size_t i = 0; i < phi.size(); ++i) phi[i] *= 0.7;
        CvParams params;
        params.mu = 0.05;
        params.eps_h = 2.0;
        const RegionStats stats = region_means(image, phi, params.eps_h);
        const CvFunctional F(image, stats, params);
        const std::vector<double> state = phi.values();
        const MetricWeights w =
            kind == "level_set_curve_measure" || kind == "levelset"
                ? level_set_measure_weights(phi, params.eps_h, params.eps_grad)
                : parameter_weights(state.size());
        report = check_gradient(F, w, state, trials, seed, tol,
                                smooth_grid_directions(spec, true));
    } else {
        reject("gradcheck.model must be 'gac', 'polyakov' or 'chanvese'");
    }

    std::string csv = "trial,lhs,rhs,rel_error\n";
    char buf[120];
    for (const auto& t : report.trials) {
        std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g\n", t.trial, t.lhs, t.rhs,
                      t.rel_error);
        csv += buf;
    }
    std::ofstream f(dir / "gradcheck.csv", std::ios::binary);
    f << csv;
    m.artifacts = {"gradcheck.csv"};
    m.metrics["model"] = model;
    m.metrics["kind"] = kind;
    m.metrics["max_rel_error"] = report.max_rel_error;
    m.metrics["tolerance"] = report.tolerance;
    m.metrics["pass"] = report.pass;

    if (!report.pass) {
        m.status = "gradcheck_failed";
        std::cerr << "error: numerical: gradient check failed, max rel error "
                  << report.max_rel_error << " > " << report.tolerance << "\n";
        return 3;
    }
    return 0;
}

}  // namespace

int run(const RunConfig& config) {
    try {
        if (config.command != "gac" && config.command != "beltrami" &&
            config.command != "chanvese" && config.command != "gradcheck")
            reject("unknown command '" + config.command + "'");
        if (!config.input().empty() && !fs::exists(config.input()))
            reject("input path does not exist: " + config.input());

        // validation happens inside each command before it writes anything;
        // the output directory is only created after the config parses
        const fs::path dir(config.output_dir());
        fs::create_directories(dir);

        Manifest m;
        int code = 0;
        if (config.command == "gac") code = run_gac(config, dir, m);
        else if (config.command == "beltrami") code = run_beltrami(config, dir, m);
        else if (config.command == "chanvese") code = run_chanvese(config, dir, m);
        else code = run_gradcheck(config, dir, m);
        write_manifest(config, dir, m);
        return code;
    } catch (const ValidationError& e) {
        std::cerr << "error: validation: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: validation: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: io: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: numerical: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace varflow
