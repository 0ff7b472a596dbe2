#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "ldct/baselines.hpp"
#include "ldct/evaluation.hpp"
#include "ldct/image_io.hpp"
#include "ldct/pipeline.hpp"
#include "ldct/projector.hpp"
#include "ldct/reconstruction.hpp"
#include "ldct/transform.hpp"
#include "manifest.hpp"

namespace ldct::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

std::string require(const KeyValueConfig& cfg, const std::string& key) {
    const auto v = cfg.get_string(key);
    if (!v || v->empty()) throw ConfigError("missing required setting '" + key + "' (flag --" + key + ")");
    return *v;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

fs::path sibling(const fs::path& p, const std::string& suffix) { return fs::path(p.string() + suffix); }

HuScale hu_scale(const KeyValueConfig& cfg) {
    HuScale hu;
    hu.mu_water = cfg.get_double("mu_water", hu.mu_water);
    if (!(hu.mu_water > 0.0)) throw ValidationError("mu_water must be > 0");
    return hu;
}

void write_csv(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// ---------------------------------------------------------------- simulate

const std::vector<std::string> simulate_keys{"size", "views", "geometry", "phantom", "refine", "edge_width",
                                             "i0", "seed", "noiseless", "out_dir", "training_slices",
                                             "training_seed", "mu_water", "head_radius", "texture_count",
                                             "texture_hu"};

// ---------------------------------------------------------------- train

const std::vector<std::string> train_keys{"images", "exclude", "eta", "lambda0", "iters", "init", "seed",
                                          "patch", "keep_every", "out", "curve", "manifest"};

// ---------------------------------------------------------------- reconstruct

const std::vector<std::string> reconstruct_keys{
    "method", "sino", "geometry", "init", "auto_init", "transform", "beta", "gamma", "subsets", "inner_iters",
    "outer_iters", "alpha", "stop_tol", "ep_beta", "ep_delta", "ep_iters", "ep_subsets", "ep_neighborhood",
    "cutoff", "patch", "truth", "out", "history", "png", "manifest", "mu_water"};

struct Stage {
    std::string method;
    double seconds = 0.0;
    double rmse = std::nan("");
    json params = json::object();
};

json stage_json(const Stage& s) {
    json j{{"method", s.method}, {"seconds", s.seconds}, {"params", s.params}};
    if (!std::isnan(s.rmse)) j["rmse_hu"] = s.rmse;
    return j;
}

EpConfig ep_config(const KeyValueConfig& cfg) {
    EpConfig ep;
    ep.beta = cfg.get_double("ep_beta", 0.0);
    ep.delta = cfg.get_double("ep_delta", ep.delta);
    ep.iterations = static_cast<int>(cfg.get_int("ep_iters", ep.iterations));
    ep.subsets = static_cast<int>(cfg.get_int("ep_subsets", ep.subsets));
    ep.neighborhood = static_cast<int>(cfg.get_int("ep_neighborhood", ep.neighborhood));
    ep.alpha = cfg.get_double("alpha", ep.alpha);
    return ep;
}

}  // namespace

std::string dose_tag(double i0) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.0e", i0);
    if (std::stod(buf) == i0) {
        std::string s = buf;
        const auto e = s.find('e');
        std::string mant = s.substr(0, e);
        std::string ex = s.substr(e + 1);
        const bool neg = ex[0] == '-';
        ex = ex.substr(1);
        while (ex.size() > 1 && ex[0] == '0') ex.erase(0, 1);
        return mant + "e" + (neg ? "-" : "") + ex;
    }
    std::snprintf(buf, sizeof buf, "%g", i0);
    return buf;
}

int run_simulate(const Invocation& inv) {
    const auto t0 = Clock::now();
    const KeyValueConfig& cfg = inv.cfg;
    cfg.require_known(simulate_keys);

    DeskProtocol p = desk_protocol(static_cast<int>(cfg.get_int("size", 256)), static_cast<int>(cfg.get_int("views", 360)));
    Manifest man("simulate", inv.argv);
    if (const auto g = cfg.get_string("geometry")) {
        p.geometry = Geometry::load(*g);
        p.edge_width = std::max(8.0, 2.0 * p.geometry.pixel_size);
        man.add_input(*g);
    }
    p.hu = hu_scale(cfg);
    p.refine = static_cast<int>(cfg.get_int("refine", p.refine));
    if (p.refine < 1) throw ValidationError("refine must be >= 1");
    p.edge_width = cfg.get_double("edge_width", p.edge_width);
    p.head_radius = cfg.get_double("head_radius", p.head_radius);
    p.texture_count = static_cast<int>(cfg.get_int("texture_count", p.texture_count));
    p.texture_hu = cfg.get_double("texture_hu", p.texture_hu);
    const auto doses = cfg.get_double_list("i0").value_or(std::vector<double>{1e4});
    const auto seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
    const bool noiseless = cfg.get_bool("noiseless", false);
    const fs::path out_dir = cfg.get_string("out_dir", ".");
    const int n_train = static_cast<int>(cfg.get_int("training_slices", 0));
    const auto train_seed = static_cast<std::uint64_t>(cfg.get_int("training_seed", 1000));
    for (double d : doses) {
        if (!(d > 0.0)) throw ValidationError("i0 values must be > 0");
    }
    ensure_dir(out_dir);

    const std::string phantom_spec = cfg.get_string("phantom", "head");
    Phantom ph;
    if (phantom_spec == "head") {
        ph = desk_phantom(p);
    } else {
        ph = make_phantom(fs::path(phantom_spec), p.hu);
        man.add_input(phantom_spec);
    }
    const Geometry fine = p.simulation_geometry();
    if (ph.attenuation.rows != fine.image_rows || ph.attenuation.cols != fine.image_cols) {
        throw ConfigError("phantom raster must be " + std::to_string(fine.image_rows) + "x" +
                          std::to_string(fine.image_cols) + " (reconstruction grid times refine)");
    }

    const fs::path geo_path = out_dir / "geometry.cfg";
    {
        std::ofstream g(geo_path, std::ios::trunc);
        if (!g) throw IoError("cannot write " + geo_path.string());
        g << p.geometry.to_config();
    }
    const Image truth = ground_truth_hu(ph, p.refine);
    const fs::path truth_path = out_dir / "truth.phnt";
    write_image(truth_path, truth);
    write_png16(out_dir / "truth.png", truth);
    man.add_output(geo_path);
    man.add_output(truth_path);
    man.add_output(out_dir / "truth.png");

    for (double i0 : doses) {
        const auto ts = Clock::now();
        const NoisySinogram s = simulate_sinogram(ph, fine, i0, seed, noiseless);
        const fs::path sp = out_dir / ("sino_" + dose_tag(i0) + ".sino");
        write_sinogram(sp, s, p.geometry.detector_spacing);
        man.add_output(sp);
        man.add_timing("sinogram_" + dose_tag(i0), seconds_since(ts));
        std::cout << "wrote " << sp.string() << "\n";
    }
    for (int k = 0; k < n_train; ++k) {
        const Image slice = ground_truth_hu(desk_training_phantom(p, train_seed + k), p.refine);
        char name[32];
        std::snprintf(name, sizeof name, "train_%02d.phnt", k);
        write_image(out_dir / name, slice);
        man.add_output(out_dir / name);
    }
    man.set_config(cfg);
    man.add_seed("noise", seed);
    if (n_train > 0) man.add_seed("training_phantoms", train_seed);
    man.extra()["noiseless"] = noiseless;
    man.extra()["refine"] = p.refine;
    man.extra()["edge_width_mm"] = p.edge_width;
    man.extra()["texture"] = {{"count", p.texture_count}, {"amplitude_hu", p.texture_hu}};
    man.add_timing("total", seconds_since(t0));
    man.write(out_dir / "manifest.json");
    return 0;
}

int run_train(const Invocation& inv) {
    const auto t0 = Clock::now();
    const KeyValueConfig& cfg = inv.cfg;
    cfg.require_known(train_keys);
    Manifest man("train", inv.argv);

    const auto images = split_list(require(cfg, "images"));
    const auto excluded = split_list(cfg.get_string("exclude", ""));
    // a training slice must never be the test image: compare file hashes and pixel content
    std::map<std::string, std::string> excluded_hashes;
    std::vector<Image> excluded_images;
    for (const auto& e : excluded) {
        excluded_hashes[sha256_file(e)] = e;
        excluded_images.push_back(read_image(e));
        man.add_input(e);
    }
    std::vector<Image> slices;
    for (const auto& path : images) {
        const std::string h = sha256_file(path);
        if (const auto it = excluded_hashes.find(h); it != excluded_hashes.end()) {
            throw ConfigError("training image " + path + " is identical to excluded test image " + it->second);
        }
        Image img = read_image(path);
        for (std::size_t k = 0; k < excluded_images.size(); ++k) {
            const Image& ex = excluded_images[k];
            if (ex.rows == img.rows && ex.cols == img.cols && ex.values == img.values) {
                throw ConfigError("training image " + path + " has the same pixels as excluded test image " +
                                  excluded[k]);
            }
        }
        slices.push_back(std::move(img));
        man.add_input(path);
    }

    LearningConfig lc;
    lc.eta = cfg.get_double("eta", lc.eta);
    lc.lambda0 = cfg.get_double("lambda0", lc.lambda0);
    lc.n_iters = static_cast<int>(cfg.get_int("iters", lc.n_iters));
    lc.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long>(lc.seed)));
    const int patch = static_cast<int>(cfg.get_int("patch", 8));
    lc.patch_rows = lc.patch_cols = patch;
    const std::string init = cfg.get_string("init", "dct");
    if (init == "dct") {
        lc.init = TransformInit::dct;
    } else if (init == "identity") {
        lc.init = TransformInit::identity;
    } else if (init == "random") {
        lc.init = TransformInit::random_orthonormal;
    } else {
        throw ConfigError("init must be dct, identity or random (got '" + init + "')");
    }
    lc.validate();
    const int keep_every = static_cast<int>(cfg.get_int("keep_every", 1));
    const Matrix y = collect_patches(slices, patch, patch, keep_every);

    const fs::path out = cfg.get_string("out", "transform.stfm");
    const fs::path curve = cfg.get_string("curve", sibling(out, ".curve.csv").string());
    std::ostringstream csv;
    csv << "iteration,objective_after_coding,objective_after_update,residual_ratio,nonzeros,condition\n";
    const auto tl = Clock::now();
    const LearningResult res = learn_transform(y, lc, [&](const LearningStep& s) {
        csv << s.iteration << "," << fmt(s.after_coding) << "," << fmt(s.after_update) << "," << fmt(s.residual_ratio)
            << "," << s.nonzeros << "," << fmt(s.condition) << "\n";
    });
    man.add_timing("learning", seconds_since(tl));
    write_transform(out, res.transform);
    write_csv(curve, csv.str());
    man.add_output(out);
    man.add_output(curve);
    man.set_config(cfg);
    man.add_seed("init", lc.seed);
    man.extra()["patches"] = y.cols();
    man.extra()["lambda"] = res.lambda;
    man.extra()["condition"] = res.transform.stats.condition;
    man.add_timing("total", seconds_since(t0));
    man.write(cfg.get_string("manifest", sibling(out, ".manifest.json").string()));
    std::cout << "wrote " << out.string() << " (" << y.cols() << " patches, condition "
              << res.transform.stats.condition << ")\n";
    return 0;
}

int run_reconstruct(const Invocation& inv) {
    const auto t0 = Clock::now();
    const KeyValueConfig& cfg = inv.cfg;
    cfg.require_known(reconstruct_keys);
    Manifest man("reconstruct", inv.argv);

    const std::string method = require(cfg, "method");
    if (method != "fbp" && method != "pwls-ep" && method != "pwls-dct" && method != "pwls-st") {
        throw ConfigError("method must be one of fbp, pwls-ep, pwls-dct, pwls-st (got '" + method + "')");
    }
    const fs::path sino_path = require(cfg, "sino");
    const fs::path geo_path = require(cfg, "geometry");
    const Geometry geo = Geometry::load(geo_path);
    const NoisySinogram sino = read_sinogram(sino_path);
    man.add_input(sino_path);
    man.add_input(geo_path);
    if (sino.n_views != geo.n_views || sino.n_channels != geo.n_channels) {
        throw ConfigError("sinogram " + sino_path.string() + " does not match geometry " + geo_path.string());
    }
    const HuScale hu = hu_scale(cfg);
    std::optional<Image> truth;
    if (const auto t = cfg.get_string("truth")) {
        truth = read_image(*t);
        man.add_input(*t);
    }
    auto score = [&](const Vector& x) {
        if (!truth) return std::nan("");
        return rmse_hu(Image(geo.image_rows, geo.image_cols, geo.pixel_size, x), *truth);
    };
    const bool auto_init = cfg.get_bool("auto_init", false);
    const auto init_path = cfg.get_string("init");
    if (auto_init && init_path) throw ConfigError("use either init or auto_init, not both");

    // flags aimed at the requested method; EP keeps its own keys for the chain
    KeyValueConfig ep_keys = cfg;
    if (method == "pwls-ep") {
        if (const auto b = cfg.get_string("beta")) ep_keys.set("ep_beta", *b);
        if (const auto m = cfg.get_string("subsets")) ep_keys.set("ep_subsets", *m);
        if (const auto k = cfg.get_string("outer_iters")) ep_keys.set("ep_iters", *k);
    }

    std::vector<Stage> stages;
    std::optional<Projector> proj;
    auto projector = [&]() -> const Projector& {
        if (!proj) proj.emplace(geo, hu.mu_per_hu());
        return *proj;
    };
    FbpConfig fbp_cfg;
    fbp_cfg.cutoff = cfg.get_double("cutoff", fbp_cfg.cutoff);

    auto run_fbp = [&]() {
        const auto ts = Clock::now();
        Image img = fbp_hu(sino.y, geo, hu, fbp_cfg);
        Stage s{"FBP", seconds_since(ts), score(img.values), json{{"cutoff", fbp_cfg.cutoff}}};
        stages.push_back(s);
        return img.values;
    };
    auto run_ep = [&](const Vector& init) {
        const EpConfig ep = ep_config(ep_keys);
        if (!(ep.beta > 0.0)) throw ConfigError("PWLS-EP needs ep_beta > 0 (flag --ep-beta, or --beta with --method pwls-ep)");
        const auto ts = Clock::now();
        const WeightedLeastSquares data(projector(), sino.y, sino.weights, ep.subsets);
        Vector x = reconstruct_pwls_ep(data, ep, init);
        stages.push_back(Stage{"PWLS-EP", seconds_since(ts), score(x),
                               json{{"beta", ep.beta}, {"delta", ep.delta}, {"iterations", ep.iterations},
                                    {"subsets", ep.subsets}, {"neighborhood", ep.neighborhood}, {"alpha", ep.alpha}}});
        return x;
    };

    Vector x;
    std::vector<CostReport> history;
    if (method == "fbp") {
        x = run_fbp();
    } else if (method == "pwls-ep") {
        Vector init;
        if (init_path) {
            init = read_image(*init_path).values;
            man.add_input(*init_path);
        } else {
            init = run_fbp();  // FBP initialisation is the default for EP
        }
        x = run_ep(init);
    } else {
        Vector init;
        if (init_path) {
            init = read_image(*init_path).values;
            man.add_input(*init_path);
        } else if (auto_init) {
            init = run_ep(run_fbp());
        } else {
            throw ConfigError(method + " needs an initial image: pass --init or --auto-init");
        }
        if (init.size() != geo.n_pixels()) throw ConfigError("initial image does not match the geometry");
        const int patch = static_cast<int>(cfg.get_int("patch", 8));
        SparsifyingTransform t = make_dct_transform(patch, patch);
        if (method == "pwls-st") {
            const fs::path tp = require(cfg, "transform");
            if (!fs::exists(tp)) throw IoError("transform file " + tp.string() + " does not exist");
            t = read_transform(tp);
            man.add_input(tp);
        }
        PwlsStConfig st;
        st.beta = cfg.get_double("beta", 0.0);
        if (!(st.beta > 0.0)) throw ConfigError("missing required setting 'beta' (flag --beta) for " + method);
        st.gamma = cfg.get_double("gamma", st.gamma);
        st.subsets = static_cast<int>(cfg.get_int("subsets", st.subsets));
        st.inner_iters = static_cast<int>(cfg.get_int("inner_iters", st.inner_iters));
        st.outer_iters = static_cast<int>(cfg.get_int("outer_iters", st.outer_iters));
        st.alpha = cfg.get_double("alpha", st.alpha);
        st.stop_tol = cfg.get_double("stop_tol", st.stop_tol);
        st.validate();
        PatchScheme ps{t.patch_rows, t.patch_cols, 1, PatchBoundary::wrap, geo.image_rows, geo.image_cols};
        const auto ts = Clock::now();
        const WeightedLeastSquares data(projector(), sino.y, sino.weights, st.subsets);
        ImageMonitor monitor;
        if (truth) monitor = score;
        const PwlsStResult r = reconstruct_pwls_st(data, t, ps, st, init, monitor);
        x = r.image;
        history = r.history;
        stages.push_back(Stage{method == "pwls-st" ? "PWLS-ST" : "PWLS-DCT", seconds_since(ts), score(x),
                               json{{"beta", st.beta}, {"gamma", st.gamma}, {"subsets", st.subsets},
                                    {"inner_iters", st.inner_iters}, {"outer_iters", st.outer_iters},
                                    {"alpha", st.alpha}, {"outer_iters_run", r.history.size() - 1}}});
    }

    const fs::path out = cfg.get_string("out", method + ".phnt");
    const Image result(geo.image_rows, geo.image_cols, geo.pixel_size, x);
    write_image(out, result);
    man.add_output(out);
    if (const auto png = cfg.get_string("png")) {
        write_png16(*png, result);
        man.add_output(*png);
    }
    if (!history.empty()) {
        const fs::path hp = cfg.get_string("history", sibling(out, ".history.csv").string());
        std::ostringstream csv;
        csv << "outer_iter,data_term,sparsification_residual,l0_count,total_cost,rmse_hu\n";
        for (const auto& c : history) {
            csv << c.outer_iter << "," << fmt(c.data_term) << "," << fmt(c.sparsification_residual) << ","
                << c.l0_count << "," << fmt(c.total) << "," << fmt(c.rmse_hu) << "\n";
        }
        write_csv(hp, csv.str());
        man.add_output(hp);
    }
    json js = json::array();
    for (const auto& s : stages) js.push_back(stage_json(s));
    man.extra()["stages"] = js;
    man.extra()["auto_init"] = auto_init;
    man.set_config(cfg);
    const double runtime = seconds_since(t0);
    man.add_timing("total", runtime);
    man.extra()["runtime_s"] = runtime;
    man.write(cfg.get_string("manifest", sibling(out, ".manifest.json").string()));
    std::cout << "wrote " << out.string();
    if (truth) std::cout << " (RMSE " << score(x) << " HU)";
    std::cout << "\n";
    return 0;
}

int run_evaluate(const Invocation& inv) {
    const auto t0 = Clock::now();
    const KeyValueConfig& cfg = inv.cfg;
    cfg.require_known({"truth", "result", "dose", "out_dir", "diff_window"});
    Manifest man("evaluate", inv.argv);
    const fs::path truth_path = require(cfg, "truth");
    const Image truth = read_image(truth_path);
    man.add_input(truth_path);
    const double default_dose = cfg.get_double("dose", 0.0);
    const double diff_window = cfg.get_double("diff_window", 0.0);
    const fs::path out_dir = cfg.get_string("out_dir", ".");
    ensure_dir(out_dir);

    // entries look like [dose:]METHOD=path
    std::vector<EvalReport> reports;
    auto report_for = [&](double dose) -> EvalReport& {
        for (auto& r : reports) {
            if (r.dose == dose) return r;
        }
        reports.push_back(EvalReport{dose, {}});
        return reports.back();
    };
    for (const auto& entry : split_list(require(cfg, "result"))) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) throw ConfigError("result '" + entry + "' must look like [dose:]METHOD=path");
        std::string label = entry.substr(0, eq);
        const fs::path path = entry.substr(eq + 1);
        double dose = default_dose;
        if (const auto colon = label.find(':'); colon != std::string::npos) {
            try {
                dose = std::stod(label.substr(0, colon));
            } catch (const std::exception&) {
                throw ConfigError("result '" + entry + "': bad dose");
            }
            label = label.substr(colon + 1);
        }
        if (!fs::exists(path)) throw IoError("result image " + path.string() + " does not exist");
        const Image img = read_image(path);
        man.add_input(path);
        MethodScore s;
        s.method = label;
        s.rmse_hu = rmse_hu(img, truth);
        const fs::path side = sibling(path, ".manifest.json");
        if (fs::exists(side)) {
            std::ifstream in(side);
            const json m = json::parse(in, nullptr, false);
            if (!m.is_discarded() && m.contains("details") && m["details"].contains("runtime_s")) {
                s.runtime_s = m["details"]["runtime_s"].get<double>();
            }
        }
        const Image diff = difference_image(img, truth);
        const double hi = diff_window > 0.0 ? diff_window : std::max(diff.values.maxCoeff(), 1e-12);
        const fs::path png = out_dir / ("diff_" + label + (dose > 0.0 ? "_" + dose_tag(dose) : "") + ".png");
        write_png16(png, diff, 0.0, hi);
        man.add_output(png);
        s.difference_image = png.string();
        report_for(dose).add(s);
    }
    const fs::path csv = out_dir / "comparison.csv";
    const fs::path md = out_dir / "comparison.md";
    write_csv(csv, comparison_csv(reports));
    write_csv(md, comparison_markdown(reports));
    man.add_output(csv);
    man.add_output(md);
    man.set_config(cfg);
    man.add_timing("total", seconds_since(t0));
    man.write(out_dir / "manifest.json");
    std::cout << comparison_markdown(reports);
    return 0;
}

int run_verify(const std::string& manifest) {
    const auto issues = verify_manifest(manifest);
    for (const auto& i : issues) std::cerr << i.path << ": " << i.problem << "\n";
    if (issues.empty()) {
        std::cout << manifest << ": all hashes match\n";
        return 0;
    }
    return 1;
}

}  // namespace ldct::cli
