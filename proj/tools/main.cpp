#include <CLI11.hpp>

#include <deque>
#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "ldct/errors.hpp"

using namespace ldct;

namespace {

// Flag values are kept as strings and layered over the config file, so one
// set of typed getters produces the diagnostics for both sources.
struct FlagSet {
    enum class Kind { value, list, toggle };
    struct Flag {
        Kind kind;
        std::string key;
        CLI::Option* option = nullptr;
        std::string value;
        std::vector<std::string> items;
        bool on = false;
    };
    std::deque<Flag> flags;  // stable addresses for CLI11 bindings
    std::string config_path;

    void value(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
        auto& f = flags.emplace_back(Flag{Kind::value, key, nullptr, {}, {}, false});
        f.option = app->add_option(name, f.value, help);
    }
    void list(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
        auto& f = flags.emplace_back(Flag{Kind::list, key, nullptr, {}, {}, false});
        f.option = app->add_option(name, f.items, help)->delimiter(',');
    }
    void toggle(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
        auto& f = flags.emplace_back(Flag{Kind::toggle, key, nullptr, {}, {}, false});
        f.option = app->add_flag(name, f.on, help);
    }

    cli::Invocation invocation(const std::string& command, const std::vector<std::string>& argv) const {
        cli::Invocation inv{command, argv, {}};
        if (!config_path.empty()) inv.cfg = KeyValueConfig::load(config_path);
        for (const auto& f : flags) {
            if (f.option->count() == 0) continue;
            switch (f.kind) {
                case Kind::value:
                    inv.cfg.set(f.key, f.value);
                    break;
                case Kind::toggle:
                    inv.cfg.set(f.key, f.on ? "true" : "false");
                    break;
                case Kind::list: {
                    std::string joined;
                    for (const auto& item : f.items) joined += (joined.empty() ? "" : ",") + item;
                    inv.cfg.set(f.key, joined);
                    break;
                }
            }
        }
        return inv;
    }
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    CLI::App app{"Low-dose CT reconstruction with a learned sparsifying transform", "ldct"};
    app.require_subcommand(1);

    FlagSet sim, train, rec, eval;
    std::string verify_path;

    auto* s = app.add_subcommand("simulate", "Simulate a phantom and Poisson sinograms");
    s->add_option("--config", sim.config_path, "key = value settings file");
    sim.value(s, "--geometry", "geometry", "geometry file (default: desk fan-beam protocol)");
    sim.value(s, "--size", "size", "reconstruction grid size for the desk protocol [256]");
    sim.value(s, "--views", "views", "number of views for the desk protocol [360]");
    sim.value(s, "--phantom", "phantom", "'head' or a PHNT attenuation raster on the fine grid [head]");
    sim.value(s, "--refine", "refine", "simulation grid refinement factor [2]");
    sim.value(s, "--edge-width", "edge_width", "phantom boundary ramp in mm [max(8, 2 pixels)]");
    sim.value(s, "--texture-count", "texture_count", "soft-tissue texture blobs in the head phantom [6000]");
    sim.value(s, "--texture-hu", "texture_hu", "peak texture amplitude in HU [30]");
    sim.list(s, "--i0", "i0", "incident photons per ray, comma separated [1e4]");
    sim.value(s, "--seed", "seed", "noise seed [1]");
    sim.toggle(s, "--noiseless", "noiseless", "write expected line integrals without noise");
    sim.value(s, "--training-slices", "training_slices", "also write this many training phantoms [0]");
    sim.value(s, "--training-seed", "training_seed", "seed of the first training phantom [1000]");
    sim.value(s, "--out-dir", "out_dir", "output directory [.]");

    auto* t = app.add_subcommand("train", "Learn a sparsifying transform from training images");
    t->add_option("--config", train.config_path, "key = value settings file");
    train.list(t, "--images", "images", "training images (PHNT, HU)");
    train.list(t, "--exclude", "exclude", "test images that must not be used for training");
    train.value(t, "--eta", "eta", "sparsity threshold in HU [75]");
    train.value(t, "--lambda0", "lambda0", "regulariser weight relative to ||Y||_F^2 [1]");
    train.value(t, "--iters", "iters", "alternating iterations [100]");
    train.value(t, "--init", "init", "dct, identity or random [dct]");
    train.value(t, "--seed", "seed", "seed for random initialisation [1]");
    train.value(t, "--patch", "patch", "patch side length [8]");
    train.value(t, "--keep-every", "keep_every", "use every k-th patch [1]");
    train.value(t, "--out", "out", "transform file [transform.stfm]");
    train.value(t, "--curve", "curve", "learning-curve CSV [<out>.curve.csv]");

    auto* r = app.add_subcommand("reconstruct", "Reconstruct an image from a sinogram");
    r->add_option("--config", rec.config_path, "key = value settings file");
    rec.value(r, "--method", "method", "fbp, pwls-ep, pwls-dct or pwls-st");
    rec.value(r, "--sino", "sino", "sinogram file");
    rec.value(r, "--geometry", "geometry", "geometry file");
    rec.value(r, "--init", "init", "initial image (PHNT, HU)");
    rec.toggle(r, "--auto-init", "auto_init", "initialise through FBP then PWLS-EP");
    rec.value(r, "--transform", "transform", "learned transform (pwls-st)");
    rec.value(r, "--beta", "beta", "regularisation weight of the requested method");
    rec.value(r, "--gamma", "gamma", "sparse-coding threshold in HU [25]");
    rec.value(r, "--subsets", "subsets", "ordered subsets [4; 12 for pwls-ep]");
    rec.value(r, "--inner-iters", "inner_iters", "image-update passes per outer iteration [2]");
    rec.value(r, "--outer-iters", "outer_iters", "outer iterations [50; EP passes for pwls-ep]");
    rec.value(r, "--alpha", "alpha", "over-relaxation in [1, 2) [1.999]");
    rec.value(r, "--stop-tol", "stop_tol", "relative image change for early stop, 0 disables [1e-6]");
    rec.value(r, "--ep-beta", "ep_beta", "PWLS-EP weight for the auto-init chain");
    rec.value(r, "--ep-delta", "ep_delta", "hyperbola delta in HU [10]");
    rec.value(r, "--ep-iters", "ep_iters", "PWLS-EP passes [30]");
    rec.value(r, "--ep-subsets", "ep_subsets", "PWLS-EP subsets [12]");
    rec.value(r, "--cutoff", "cutoff", "Hanning cutoff as a fraction of Nyquist [1]");
    rec.value(r, "--patch", "patch", "DCT patch side for pwls-dct [8]");
    rec.value(r, "--truth", "truth", "ground truth for RMSE tracking");
    rec.value(r, "--out", "out", "output image [<method>.phnt]");
    rec.value(r, "--history", "history", "cost history CSV [<out>.history.csv]");
    rec.value(r, "--png", "png", "also write a PNG with the [800, 1200] HU window");

    auto* e = app.add_subcommand("evaluate", "RMSE table and difference images");
    e->add_option("--config", eval.config_path, "key = value settings file");
    eval.value(e, "--truth", "truth", "ground-truth image (PHNT, HU)");
    eval.list(e, "--result", "result", "[dose:]METHOD=path entries");
    eval.value(e, "--dose", "dose", "dose label for entries without one");
    eval.value(e, "--diff-window", "diff_window", "upper window for difference PNGs in HU [per-image max]");
    eval.value(e, "--out-dir", "out_dir", "output directory [.]");

    auto* v = app.add_subcommand("verify", "Recompute the file hashes recorded in a manifest");
    v->add_option("manifest", verify_path, "manifest JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*s) return cli::run_simulate(sim.invocation("simulate", args));
        if (*t) return cli::run_train(train.invocation("train", args));
        if (*r) return cli::run_reconstruct(rec.invocation("reconstruct", args));
        if (*e) return cli::run_evaluate(eval.invocation("evaluate", args));
        if (*v) return cli::run_verify(verify_path);
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const ValidationError& err) {
        std::cerr << "invalid setting: " << err.what() << "\n";
        return 2;
    } catch (const DivergenceError& err) {
        std::cerr << "diverged: " << err.what() << "\n";
        return 3;
    } catch (const IoError& err) {
        std::cerr << "i/o error: " << err.what() << "\n";
        return 4;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
