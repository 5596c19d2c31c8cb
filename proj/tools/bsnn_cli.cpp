// bsnn: train, simulate, explain, audit and render binary spiking networks
// from the command line. Every subcommand writes a .manifest.json sidecar
// with its resolved flags so runs can be replayed and verified.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "bsnn/axp.hpp"
#include "bsnn/causal_model.hpp"
#include "bsnn/errors.hpp"
#include "bsnn/mnist.hpp"
#include "bsnn/network.hpp"
#include "bsnn/render.hpp"
#include "bsnn/shapley.hpp"
#include "bsnn/simulate.hpp"
#include "bsnn/smtlib.hpp"
#include "bsnn/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitSolver = 4;
constexpr int kExitCertificate = 5;
constexpr const char* kVersion = "0.1.0";

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw bsnn::DataError("cannot write " + path);
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw bsnn::DataError("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_manifest(const std::string& out_path, const std::string& subcommand, const json& flags,
                    double wall_ms) {
    json j;
    j["subcommand"] = subcommand;
    j["flags"] = flags;
    j["toolkit_version"] = kVersion;
    j["wall_time_ms"] = wall_ms;
    write_text(out_path + ".manifest.json", j.dump(1));
}

bsnn::SpikeEncoding parse_encoding(const std::string& name) {
    if (name == "thresholded") return bsnn::SpikeEncoding::Thresholded;
    if (name == "poisson") return bsnn::SpikeEncoding::Poisson;
    throw bsnn::ConfigError("unknown encoding " + name);
}

bsnn::InputSequence encode_image(const bsnn::Image& img, bsnn::SpikeEncoding encoding, int t_end,
                                 std::uint64_t seed) {
    if (encoding == bsnn::SpikeEncoding::Thresholded) return bsnn::threshold_encode(img);
    return bsnn::poisson_encode(img, t_end, seed);
}

struct CommonInstanceFlags {
    std::string network_path;
    std::string data_dir = "data";
    int index = 0;
    std::string encoding = "thresholded";
    int t_end = 1;
    std::uint64_t seed = 1;
};

void add_instance_flags(CLI::App* cmd, CommonInstanceFlags& flags) {
    cmd->add_option("--network", flags.network_path, "network JSON file")->required();
    cmd->add_option("--data-dir", flags.data_dir, "directory with MNIST IDX files");
    cmd->add_option("--index", flags.index, "image index within the test split");
    cmd->add_option("--encoding", flags.encoding, "thresholded|poisson");
    cmd->add_option("--t-end", flags.t_end, "number of time steps");
    cmd->add_option("--seed", flags.seed, "encoder seed");
}

json instance_flags_json(const CommonInstanceFlags& f) {
    return {{"network", f.network_path}, {"data_dir", f.data_dir}, {"index", f.index},
            {"encoding", f.encoding},    {"t_end", f.t_end},       {"seed", f.seed}};
}

bsnn::Image load_test_image(const CommonInstanceFlags& f) {
    const auto images = bsnn::read_idx_images(f.data_dir + "/t10k-images-idx3-ubyte");
    if (f.index < 0 || f.index >= static_cast<int>(images.size()))
        throw bsnn::ConfigError("image index out of range");
    return images[f.index];
}

// ---------------------------------------------------------------------------

int cmd_train(const std::vector<int>& digits, int k, const std::string& scale,
              const std::string& encoding, int t_end, int epochs, double lr, int batch_size,
              std::uint64_t seed, int restarts, int max_train, const std::string& data_dir,
              const std::string& out_path) {
    const auto start = std::chrono::steady_clock::now();
    bsnn::TrainConfig cfg;
    cfg.digits = digits;
    cfg.hidden_count = k;
    cfg.scale = scale == "ternary" ? bsnn::WeightScale::Ternary : bsnn::WeightScale::Binary;
    cfg.encoding = parse_encoding(encoding);
    cfg.t_end = t_end;
    cfg.epochs = epochs;
    cfg.learning_rate = lr;
    cfg.batch_size = batch_size;
    cfg.seed = seed;
    cfg.restarts = restarts;
    cfg.max_train_images = max_train;
    cfg.validate();

    const auto full_train = bsnn::filter_digits(bsnn::load_idx_split(data_dir, true), digits);
    const auto test = bsnn::filter_digits(bsnn::load_idx_split(data_dir, false), digits);

    // deterministic 10% validation carve-out
    bsnn::LabeledDataset train, val;
    for (std::size_t i = 0; i < full_train.size(); ++i) {
        auto& dst = (i % 10 == 9) ? val : train;
        dst.images.push_back(full_train.images[i]);
        dst.labels.push_back(full_train.labels[i]);
    }

    bsnn::TrainResult result = bsnn::train(cfg, train, val);
    result.metrics.test_accuracy =
        bsnn::evaluate(result.arch, test, cfg.encoding, cfg.t_end, cfg.seed);

    result.arch.save(out_path);
    const std::string stem = out_path.substr(0, out_path.find_last_of('.'));
    write_text(stem + ".metrics.json", bsnn::metrics_to_json(result.metrics));

    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                start)
                          .count();
    write_manifest(out_path, "train",
                   {{"digits", digits},
                    {"k", k},
                    {"scale", scale},
                    {"encoding", encoding},
                    {"t_end", t_end},
                    {"epochs", epochs},
                    {"lr", lr},
                    {"batch_size", batch_size},
                    {"seed", seed},
                    {"restarts", restarts},
                    {"max_train", max_train},
                    {"data_dir", data_dir},
                    {"out", out_path}},
                   ms);
    std::cout << "val_accuracy " << result.metrics.val_accuracy << "\ntest_accuracy "
              << result.metrics.test_accuracy << "\n";
    return 0;
}

int cmd_simulate(const CommonInstanceFlags& f, const std::string& out_path) {
    const auto start = std::chrono::steady_clock::now();
    const auto arch = bsnn::NetworkArchitecture::load(f.network_path);
    const auto img = load_test_image(f);
    const auto input = encode_image(img, parse_encoding(f.encoding), f.t_end, f.seed);
    const auto trace = bsnn::simulate(arch, input);
    write_text(out_path, trace.to_json());
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    write_manifest(out_path, "simulate", instance_flags_json(f), ms);
    std::cout << "class " << bsnn::classify(arch, trace) << "\n";
    return 0;
}

int cmd_explain(const CommonInstanceFlags& f, int t, const std::string& backend,
                std::uint64_t order_seed, bool raster, const std::string& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    const auto arch = bsnn::NetworkArchitecture::load(f.network_path);
    const auto img = load_test_image(f);
    const auto input = encode_image(img, parse_encoding(f.encoding), f.t_end, f.seed);

    bsnn::AxpOptions options;
    options.backend = backend == "smt" ? bsnn::Backend::SmtLia : bsnn::Backend::CnfSat;
    options.order_seed = order_seed;
    options.raster_order = raster;

    const bsnn::Explanation expl = bsnn::compute_axp(arch, input, t, options);
    const auto trace = bsnn::simulate(arch, input);
    const auto model = bsnn::build_bcm(arch, trace);
    const auto violations = bsnn::audit_connectivity(expl, arch);

    fs::create_directories(out_dir);
    const std::string prefix =
        out_dir + "/axp_i" + std::to_string(f.index) + "_t" + std::to_string(t);
    write_text(prefix + ".json", bsnn::explanation_to_json(expl, model, img.width, img.height));
    bsnn::render_explanation(expl, arch, model, img.width, img.height).save(prefix + ".ppm");

    json flags = instance_flags_json(f);
    flags["t"] = t;
    flags["backend"] = backend;
    flags["order_seed"] = order_seed;
    flags["raster"] = raster;
    flags["out_dir"] = out_dir;
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    write_manifest(prefix + ".json", "explain", flags, ms);

    std::cout << "literals " << expl.term.literals.size() << "\ncertificates "
              << expl.certificates.i << expl.certificates.ii << expl.certificates.iii
              << "\nconnectivity_violations " << violations.size() << "\n";
    if (!expl.certificates.all()) {
        std::cerr << "certificate check failed\n";
        return kExitCertificate;
    }
    if (!violations.empty()) {
        std::cerr << "explanation mentions disconnected features\n";
        return kExitCertificate;
    }
    return 0;
}

int cmd_shap(const CommonInstanceFlags& f, int sample_size, double delta, int target,
             const std::string& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    const auto arch = bsnn::NetworkArchitecture::load(f.network_path);
    const auto img = load_test_image(f);
    if (sample_size < arch.input_count())
        throw bsnn::ConfigError("sample size below the feature count");

    bsnn::SnnValueOptions opts;
    opts.encoding = parse_encoding(f.encoding);
    opts.t_end = f.t_end;
    opts.seed = f.seed;
    if (target < 0) {
        const auto input = encode_image(img, opts.encoding, f.t_end, f.seed);
        target = bsnn::classify(arch, bsnn::simulate(arch, input));
    }
    opts.target_class = target;

    const auto v = bsnn::make_snn_value(arch, img, opts);
    const auto shap = bsnn::sampled_shapley(v, arch.input_count(), sample_size, f.seed);
    double use_delta = delta;
    if (use_delta <= 0) {
        double mx = 0;
        for (const double s : shap.scores) mx = std::max(mx, std::abs(s));
        use_delta = 0.01 * mx;
        if (use_delta <= 0) use_delta = 1e-12;
    }
    bsnn::AttributionReport report = bsnn::relevance_audit(shap.scores, use_delta, arch);
    report.sample_size = sample_size;
    report.regularized = shap.regularized;
    report.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    fs::create_directories(out_dir);
    const std::string prefix = out_dir + "/shap_i" + std::to_string(f.index) + "_n" +
                               std::to_string(sample_size) + "_s" + std::to_string(f.seed);
    write_text(prefix + ".json", bsnn::report_to_json(report));
    bsnn::render_attribution(report, arch, img.width, img.height).save(prefix + ".ppm");

    json flags = instance_flags_json(f);
    flags["sample_size"] = sample_size;
    flags["delta"] = delta;
    flags["target"] = target;
    flags["out_dir"] = out_dir;
    write_manifest(prefix + ".json", "shap", flags, report.wall_time_ms);

    std::cout << "relevant " << report.relevant.size() << "\nwrongly_relevant_pct "
              << report.wrongly_relevant_pct << "\n";
    return 0;
}

int cmd_verify(const std::string& dir) {
    int checked = 0, failed = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() < 14 || name.substr(name.size() - 14) != ".manifest.json") continue;
        const json manifest = json::parse(read_text(entry.path().string()));
        const std::string sub = manifest.at("subcommand").get<std::string>();
        const json& flags = manifest.at("flags");
        const std::string artifact = entry.path().string().substr(
            0, entry.path().string().size() - std::string(".manifest.json").size());

        if (sub == "simulate" || sub == "explain") {
            CommonInstanceFlags f;
            f.network_path = flags.at("network").get<std::string>();
            f.data_dir = flags.at("data_dir").get<std::string>();
            f.index = flags.at("index").get<int>();
            f.encoding = flags.at("encoding").get<std::string>();
            f.t_end = flags.at("t_end").get<int>();
            f.seed = flags.at("seed").get<std::uint64_t>();
            const auto arch = bsnn::NetworkArchitecture::load(f.network_path);
            const auto img = load_test_image(f);
            const auto input = encode_image(img, parse_encoding(f.encoding), f.t_end, f.seed);

            if (sub == "simulate") {
                ++checked;
                const auto stored = bsnn::DynamicsTrace::from_json(read_text(artifact));
                const auto fresh = bsnn::simulate(arch, input);
                bool ok = stored == fresh && bsnn::check_compatibility(arch, stored);
                if (!ok) {
                    ++failed;
                    // locate the first divergent cell for the report
                    std::string where = "trace mismatch";
                    for (int t = 0; t <= stored.t_end() && where == "trace mismatch"; ++t)
                        for (int g = 0; g < arch.neuron_count(); ++g)
                            if (stored.firing(t, g) != fresh.firing(t, g)) {
                                where = "firing(" + std::to_string(t) + "," +
                                        bsnn::to_string(arch.neuron_at(g)) + ")";
                                break;
                            }
                    std::cout << "FAIL " << artifact << " " << where << "\n";
                } else {
                    std::cout << "ok   " << artifact << "\n";
                }
            } else {
                ++checked;
                const auto trace = bsnn::simulate(arch, input);
                const auto model = bsnn::build_bcm(arch, trace);
                const auto expl = bsnn::explanation_from_json(read_text(artifact), model);
                const auto certs =
                    bsnn::verify_axp(arch, input, expl.term, expl.explanandum, {});
                const auto violations = bsnn::audit_connectivity(expl, arch);
                if (!certs.all() || !violations.empty()) {
                    ++failed;
                    std::cout << "FAIL " << artifact << " certificates " << certs.i << certs.ii
                              << certs.iii << " violations " << violations.size() << "\n";
                } else {
                    std::cout << "ok   " << artifact << "\n";
                }
            }
        }
    }
    if (checked == 0) std::cout << "warning: no verifiable artifacts found in " << dir << "\n";
    std::cout << checked << " checked, " << failed << " failed\n";
    return failed == 0 ? 0 : kExitCertificate;
}

int cmd_render(const std::string& in_path, const std::string& network_path,
               const std::string& out_path) {
    const auto arch = bsnn::NetworkArchitecture::load(network_path);
    const json j = json::parse(read_text(in_path));
    if (j.contains("literals")) {
        // explanation artifact; geometry travels with it. Any model over the
        // same architecture provides the variable numbering.
        const int width = j.at("width").get<int>();
        const int height = j.at("height").get<int>();
        const int t_end = std::max(1, j.at("t").get<int>());
        const auto trace = bsnn::simulate(arch, bsnn::InputSequence(arch.input_count(), t_end));
        const auto model = bsnn::build_bcm(arch, trace);
        const auto expl = bsnn::explanation_from_json(read_text(in_path), model);
        bsnn::render_explanation(expl, arch, model, width, height).save(out_path);
        return 0;
    }
    if (j.contains("scores")) {
        bsnn::AttributionReport report;
        report.delta = j.at("delta").get<double>();
        for (const auto& s : j.at("scores")) report.scores.push_back(s.get<double>());
        for (const auto& r : j.at("relevant")) report.relevant.push_back(r.get<int>());
        const int side = static_cast<int>(std::lround(std::sqrt(report.scores.size())));
        bsnn::render_attribution(report, arch, side, side).save(out_path);
        return 0;
    }
    throw bsnn::ConfigError("unrecognized artifact type in " + in_path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary spiking networks as causal models: training, simulation,"
                 " abductive explanation and attribution audit"};
    app.require_subcommand(1);

    // train
    auto* train_cmd = app.add_subcommand("train", "train a quantized network on digit subsets");
    std::vector<int> digits{1, 5, 9};
    int k = 16, t_end = 1, epochs = 120, batch_size = 64, restarts = 3, max_train = 12000;
    double lr = 0.05;
    std::uint64_t seed = 1;
    std::string scale = "binary", encoding = "thresholded", data_dir = "data",
                out_path = "network.json";
    train_cmd->add_option("--digits", digits, "digit classes, e.g. --digits 1 5 9")->expected(1, 10);
    train_cmd->add_option("--k", k, "hidden neuron count");
    train_cmd->add_option("--scale", scale, "binary|ternary");
    train_cmd->add_option("--encoding", encoding, "thresholded|poisson");
    train_cmd->add_option("--t-end", t_end, "time steps");
    train_cmd->add_option("--epochs", epochs, "training epochs");
    train_cmd->add_option("--lr", lr, "learning rate");
    train_cmd->add_option("--batch-size", batch_size, "batch size");
    train_cmd->add_option("--seed", seed, "training seed");
    train_cmd->add_option("--restarts", restarts, "independent restarts");
    train_cmd->add_option("--max-train", max_train, "cap on training images");
    train_cmd->add_option("--data-dir", data_dir, "directory with MNIST IDX files");
    train_cmd->add_option("--out", out_path, "output network JSON");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "run the dynamics on one test image");
    CommonInstanceFlags sim_flags;
    std::string sim_out = "trace.json";
    add_instance_flags(sim_cmd, sim_flags);
    sim_cmd->add_option("--out", sim_out, "output trace JSON");

    // explain
    auto* explain_cmd = app.add_subcommand("explain", "compute an abductive explanation");
    CommonInstanceFlags expl_flags;
    int expl_t = 1;
    std::string backend = "cnf", out_dir = "out";
    std::uint64_t order_seed = 0;
    bool raster = false;
    add_instance_flags(explain_cmd, expl_flags);
    explain_cmd->add_option("--t", expl_t, "explanation time step");
    explain_cmd->add_option("--backend", backend, "cnf|smt");
    explain_cmd->add_option("--order-seed", order_seed, "literal order seed");
    explain_cmd->add_flag("--raster", raster, "raster literal order instead of shuffle");
    explain_cmd->add_option("--out-dir", out_dir, "output directory");

    // shap
    auto* shap_cmd = app.add_subcommand("shap", "sampled Shapley attribution audit");
    CommonInstanceFlags shap_flags;
    int sample_size = 10000, target = -1;
    double delta = -1.0;
    std::string shap_out_dir = "out";
    add_instance_flags(shap_cmd, shap_flags);
    shap_cmd->add_option("--sample-size", sample_size, "coalition sample budget");
    shap_cmd->add_option("--delta", delta, "relevance threshold (<=0: 1% of max |score|)");
    shap_cmd->add_option("--target", target, "target class (-1: predicted)");
    shap_cmd->add_option("--out-dir", shap_out_dir, "output directory");

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "re-check artifacts in a directory");
    std::string verify_dir = "out";
    verify_cmd->add_option("--dir", verify_dir, "directory of artifacts with manifests");

    // render
    auto* render_cmd = app.add_subcommand("render", "rasterize an artifact to PPM");
    std::string render_in, render_network, render_out = "out.ppm";
    render_cmd->add_option("--in", render_in, "artifact JSON")->required();
    render_cmd->add_option("--network", render_network, "network JSON")->required();
    render_cmd->add_option("--out", render_out, "output PPM");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed())
            return cmd_train(digits, k, scale, encoding, t_end, epochs, lr, batch_size, seed,
                             restarts, max_train, data_dir, out_path);
        if (sim_cmd->parsed()) return cmd_simulate(sim_flags, sim_out);
        if (explain_cmd->parsed())
            return cmd_explain(expl_flags, expl_t, backend, order_seed, raster, out_dir);
        if (shap_cmd->parsed())
            return cmd_shap(shap_flags, sample_size, delta, target, shap_out_dir);
        if (verify_cmd->parsed()) return cmd_verify(verify_dir);
        if (render_cmd->parsed()) return cmd_render(render_in, render_network, render_out);
    } catch (const bsnn::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const bsnn::DataError& ex) {
        std::cerr << "data error: " << ex.what() << "\n";
        return kExitData;
    } catch (const bsnn::SolverError& ex) {
        std::cerr << "solver error: " << ex.what() << "\n";
        return kExitSolver;
    } catch (const bsnn::CertificateError& ex) {
        std::cerr << "certificate error: " << ex.what() << "\n";
        return kExitCertificate;
    }
    return 0;
}
