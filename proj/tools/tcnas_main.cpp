// tcnas — flow-tensor datasets, hardware-aware CNN search, white-box attacks,
// and adversarial fine-tuning from one binary.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "CLI11.hpp"

#include "tcnas/advtrain/advtrain.hpp"
#include "tcnas/attacks/attacks.hpp"
#include "tcnas/common/binio.hpp"
#include "tcnas/common/error.hpp"
#include "tcnas/common/hash.hpp"
#include "tcnas/flowio/flowset.hpp"
#include "tcnas/flowio/synth.hpp"
#include "tcnas/hwcost/cost.hpp"
#include "tcnas/nas/search.hpp"
#include "tcnas/tensornn/checkpoint.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tcnas;

namespace {

constexpr const char* kVersion = "0.1.0";

struct GlobalOpts {
    uint64_t seed = 0;
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    std::string out_dir = ".";
};

std::string out_path(const GlobalOpts& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    return (fs::path(g.out_dir) / name).string();
}

uint64_t file_hash(const std::string& path) {
    const auto bytes = read_file(path);
    return fnv1a64(bytes.data(), bytes.size());
}

void write_manifest(const GlobalOpts& g, const std::string& command, json options,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    json inputs_j = json::object();
    for (const auto& p : inputs) inputs_j[p] = hex64(file_hash(p));
    const json manifest{{"tool", "tcnas"},     {"version", kVersion}, {"command", command},
                        {"seed", g.seed},      {"threads", g.threads}, {"options", std::move(options)},
                        {"inputs", inputs_j},  {"outputs", outputs}};
    write_file(out_path(g, command + "_manifest.json"), manifest.dump(2) + "\n");
}

flowio::SampleFormat parse_format(const std::string& s) {
    if (s == "flat") return flowio::SampleFormat::flat;
    if (s == "ts" || s == "timeseries") return flowio::SampleFormat::timeseries;
    fail("InvalidArgument", "format must be 'flat' or 'ts'");
}

tensornn::ArchSpec spec_for_preset(const std::string& name, int classes) {
    if (name == "flat") return tensornn::preset_flat(classes);
    if (name == "ts") return tensornn::preset_timeseries(classes);
    fail("UnknownPreset", "unknown preset '" + name + "'; valid presets: flat, ts");
}

tensornn::ArchSpec load_spec(const std::string& spec_path, const std::string& preset,
                             int classes) {
    if (!spec_path.empty()) {
        const auto bytes = read_file(spec_path);
        return tensornn::arch_from_json(json::parse(bytes.begin(), bytes.end()));
    }
    if (!preset.empty()) return spec_for_preset(preset, classes);
    fail("InvalidArgument", "need --spec or --preset");
}

void print_class_counts(const flowio::Dataset& ds) {
    const auto counts = flowio::class_counts(ds);
    std::printf("%zu samples, %zu classes (%s)\n", ds.size(), ds.num_classes(),
                ds.format == flowio::SampleFormat::flat ? "flat 784" : "timeseries 10x1000");
    for (size_t c = 0; c < counts.size(); ++c)
        std::printf("  %-20s %zu\n", ds.class_names[c].c_str(), counts[c]);
}

// One manifest line: <path> TAB <class name>. Paths resolve against the
// manifest's own directory.
struct LabelsManifest {
    std::vector<std::string> class_names;
    std::map<std::string, uint16_t> label_of_path; // absolute path -> class id
};

LabelsManifest read_labels_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("IoError", "cannot open labels manifest " + path);
    const fs::path base = fs::path(path).parent_path();
    LabelsManifest m;
    std::map<std::string, uint16_t> class_ids;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            fail("InvalidArgument", path + ":" + std::to_string(line_no) +
                                        ": expected '<path>\\t<class name>'");
        std::string file = line.substr(0, tab);
        const std::string cls = line.substr(tab + 1);
        if (cls.empty())
            fail("InvalidArgument", path + ":" + std::to_string(line_no) + ": empty class name");
        auto [it, inserted] = class_ids.try_emplace(cls, static_cast<uint16_t>(m.class_names.size()));
        if (inserted) m.class_names.push_back(cls);
        fs::path p(file);
        if (p.is_relative()) p = base / p;
        m.label_of_path[p.lexically_normal().string()] = it->second;
    }
    return m;
}

void cmd_preprocess(const GlobalOpts& g, const std::string& labels_path,
                    std::vector<std::string> pcaps, const std::string& format_name,
                    std::string out, double test_frac, double val_frac, bool strict) {
    const auto format = parse_format(format_name);
    const auto manifest = read_labels_manifest(labels_path);
    if (pcaps.empty())
        for (const auto& [path, label] : manifest.label_of_path) pcaps.push_back(path);

    flowio::Dataset ds;
    ds.format = format;
    ds.dim0 = format == flowio::SampleFormat::flat ? 784 : 10;
    ds.dim1 = format == flowio::SampleFormat::flat ? 1 : 1000;
    ds.class_names = manifest.class_names;

    size_t total_skipped = 0;
    for (const auto& pcap_path : pcaps) {
        const auto norm = fs::path(pcap_path).lexically_normal().string();
        const auto it = manifest.label_of_path.find(norm);
        std::optional<uint16_t> file_label;
        if (it != manifest.label_of_path.end()) file_label = it->second;

        flowio::ParsedCapture cap;
        try {
            cap = flowio::parse_pcap(read_file(pcap_path));
        } catch (const Error& e) {
            fail(e.code(), pcap_path + ": " + e.what());
        }
        total_skipped += cap.skipped;
        const auto flows = flowio::assemble_flows(
            cap.packets, [&file_label](const flowio::FlowKey&) { return file_label; }, strict);
        for (const auto& flow : flows)
            ds.samples.push_back(format == flowio::SampleFormat::flat
                                     ? flowio::encode_flat(flow)
                                     : flowio::encode_timeseries(flow));
        std::printf("%s: %zu packets, %zu flows, %zu skipped frames\n", pcap_path.c_str(),
                    cap.packets.size(), flows.size(), cap.skipped);
    }
    ds.split_tags.assign(ds.samples.size(), flowio::Split::train);
    ds = flowio::split_dataset(std::move(ds), test_frac, val_frac, g.seed);

    if (out.empty()) out = out_path(g, "flows.fts");
    flowio::write_flowset(ds, out);
    print_class_counts(ds);
    if (total_skipped > 0) std::printf("skipped %zu non-IPv4/TCP/UDP frames\n", total_skipped);

    write_manifest(g, "preprocess",
                   {{"labels", labels_path},
                    {"format", format_name},
                    {"test_frac", test_frac},
                    {"val_frac", val_frac},
                    {"strict", strict}},
                   pcaps, {out});
}

void cmd_synth(const GlobalOpts& g, int classes, int flows_per_class,
               const std::string& format_name, std::string out, double test_frac,
               double val_frac) {
    const auto format = parse_format(format_name);
    auto ds = flowio::synth_dataset(classes, flows_per_class, format, g.seed);
    ds = flowio::split_dataset(std::move(ds), test_frac, val_frac, g.seed);
    if (out.empty()) out = out_path(g, "synth.fts");
    flowio::write_flowset(ds, out);
    print_class_counts(ds);
    write_manifest(g, "synth",
                   {{"classes", classes},
                    {"flows_per_class", flows_per_class},
                    {"format", format_name},
                    {"test_frac", test_frac},
                    {"val_frac", val_frac}},
                   {}, {out});
}

void cmd_preset(const GlobalOpts& g, const std::string& name, int classes,
                const std::string& out) {
    const auto spec = spec_for_preset(name, classes);
    const auto report = hwcost::cost_report(spec);
    std::printf("preset %s: %lld params, %lld flops, %lld max tensor\n", name.c_str(),
                static_cast<long long>(report.params), static_cast<long long>(report.flops),
                static_cast<long long>(report.max_tensor));
    std::printf("%s\n", report.to_json().dump(2).c_str());
    if (!out.empty()) {
        write_file(out, tensornn::arch_to_json(spec).dump(2) + "\n");
        write_manifest(g, "preset", {{"name", name}, {"classes", classes}}, {}, {out});
    }
}

struct TrainOpts {
    int epochs = 30;
    double lr = 0.004;
    int batch = 1024;
    int plateau_patience = 3;
    double plateau_decay = 0.5;
    int early_stop = 6;
};

void add_train_opts(CLI::App* cmd, TrainOpts& t) {
    cmd->add_option("--epochs", t.epochs, "max training epochs");
    cmd->add_option("--lr", t.lr, "initial learning rate");
    cmd->add_option("--batch", t.batch, "mini-batch size");
    cmd->add_option("--plateau-patience", t.plateau_patience, "epochs before lr decay");
    cmd->add_option("--plateau-decay", t.plateau_decay, "lr decay factor");
    cmd->add_option("--early-stop", t.early_stop, "epochs before early stopping");
}

tensornn::TrainConfig to_train_config(const TrainOpts& t, uint64_t seed) {
    tensornn::TrainConfig cfg;
    cfg.max_epochs = t.epochs;
    cfg.lr0 = t.lr;
    cfg.batch_size = t.batch;
    cfg.plateau = {t.plateau_patience, t.plateau_decay};
    cfg.early_stop_patience = t.early_stop;
    cfg.seed = seed;
    return cfg;
}

void cmd_train(const GlobalOpts& g, const std::string& flowset, const std::string& spec_path,
               const std::string& preset, const TrainOpts& topts) {
    const auto ds = flowio::read_flowset(flowset);
    const auto spec = load_spec(spec_path, preset, static_cast<int>(ds.num_classes()));
    auto net = tensornn::build<float>(spec, mix_seed(g.seed, 0xb11d));
    auto [model, hist] = tensornn::train(std::move(net), ds, to_train_config(topts, g.seed));

    const auto ckpt = out_path(g, "model.tnn");
    tensornn::save_checkpoint(model, ckpt);
    const auto hist_path = out_path(g, "history.json");
    write_file(hist_path, hist.to_json().dump(2) + "\n");

    const double val = hist.best_epoch >= 0 ? hist.val_accuracy[hist.best_epoch] : 0.0;
    const double test = tensornn::evaluate(model, ds, flowio::Split::test);
    std::printf("best val accuracy %.4f (epoch %d), test accuracy %.4f\n", val, hist.best_epoch,
                test);
    write_manifest(g, "train",
                   {{"flowset", flowset},
                    {"spec", spec_path},
                    {"preset", preset},
                    {"epochs", topts.epochs},
                    {"lr", topts.lr},
                    {"batch", topts.batch}},
                   {flowset}, {ckpt, hist_path});
}

void cmd_search(const GlobalOpts& g, const std::string& flowset, int generations, int children,
                int64_t max_params, int64_t max_flops, int64_t max_tensor,
                const std::string& seed_spec_path, int max_blocks, const TrainOpts& topts) {
    const auto ds = flowio::read_flowset(flowset);

    nas::SearchConfig cfg;
    cfg.generations = generations;
    cfg.children = children;
    cfg.thresholds = {max_params, max_flops, max_tensor};
    cfg.space.max_blocks = max_blocks;
    cfg.train = to_train_config(topts, g.seed);
    cfg.seed = g.seed;
    cfg.threads = g.threads;

    tensornn::ArchSpec a0;
    if (!seed_spec_path.empty()) {
        const auto bytes = read_file(seed_spec_path);
        a0 = tensornn::arch_from_json(json::parse(bytes.begin(), bytes.end()));
    } else {
        Rng rng(mix_seed(g.seed, 0xa0));
        a0 = nas::random_feasible_seed(
            cfg.space, cfg.thresholds,
            {static_cast<int>(ds.dim0), static_cast<int>(ds.dim1)},
            static_cast<int>(ds.num_classes()), rng, cfg.mutation_attempt_cap);
    }

    const auto result = nas::search(a0, ds, cfg);

    const auto spec_out = out_path(g, "best_spec.json");
    write_file(spec_out, tensornn::arch_to_json(result.best_spec).dump(2) + "\n");
    const auto model_out = out_path(g, "best_model.tnn");
    tensornn::save_checkpoint(result.best_model, model_out);
    const auto log_out = out_path(g, "search_log.jsonl");
    write_file(log_out, result.log.to_jsonl());

    const auto cost = hwcost::cost_report(result.best_spec);
    std::printf("best val accuracy %.4f, %lld params, %lld flops, %lld max tensor\n",
                result.best_val, static_cast<long long>(cost.params),
                static_cast<long long>(cost.flops), static_cast<long long>(cost.max_tensor));
    std::printf("search log hash %s\n", hex64(result.log.hash()).c_str());
    write_manifest(g, "search",
                   {{"flowset", flowset},
                    {"generations", generations},
                    {"children", children},
                    {"max_params", max_params},
                    {"max_flops", max_flops},
                    {"max_tensor", max_tensor},
                    {"seed_spec", seed_spec_path},
                    {"epochs", topts.epochs}},
                   {flowset}, {spec_out, model_out, log_out});
}

void cmd_attack(const GlobalOpts& g, const std::string& flowset, const std::string& model_path,
                std::vector<double> grid, int pgd_iters, std::string name) {
    const auto ds = flowio::read_flowset(flowset);
    const auto net = tensornn::load_checkpoint(model_path);
    if (grid.empty()) grid = attacks::default_eps_grid();
    if (name.empty()) name = fs::path(model_path).stem().string();

    const auto report = attacks::sweep(net, ds, grid, pgd_iters, g.seed);
    const auto json_out = out_path(g, "robustness.json");
    write_file(json_out, report.to_json().dump(2) + "\n");
    const auto csv_out = out_path(g, "robustness.csv");
    write_file(csv_out, report.to_csv(name));

    std::printf("clean accuracy %.2f%%\n", report.clean_accuracy * 100.0);
    std::printf("%s", report.to_csv(name).c_str());
    write_manifest(g, "attack",
                   {{"flowset", flowset},
                    {"model", model_path},
                    {"eps_grid", grid},
                    {"pgd_iters", pgd_iters}},
                   {flowset, model_path}, {json_out, csv_out});
}

void cmd_finetune(const GlobalOpts& g, const std::string& flowset, const std::string& model_path,
                  double eps, double adv_fraction, const TrainOpts& topts) {
    const auto ds = flowio::read_flowset(flowset);
    auto net = tensornn::load_checkpoint(model_path);

    advtrain::AdvTrainConfig cfg;
    cfg.base = to_train_config(topts, g.seed);
    cfg.fgsm_eps = static_cast<float>(eps);
    cfg.adv_fraction = adv_fraction;

    auto [model, hist] = advtrain::finetune(std::move(net), ds, cfg);
    const auto ckpt = out_path(g, "model_adv.tnn");
    tensornn::save_checkpoint(model, ckpt);
    const auto hist_path = out_path(g, "finetune_history.json");
    write_file(hist_path, hist.to_json().dump(2) + "\n");

    const double test = tensornn::evaluate(model, ds, flowio::Split::test);
    std::printf("fine-tuned for %zu epochs, clean test accuracy %.4f\n",
                hist.val_accuracy.size(), test);
    write_manifest(g, "finetune",
                   {{"flowset", flowset},
                    {"model", model_path},
                    {"eps", eps},
                    {"adv_fraction", adv_fraction},
                    {"epochs", topts.epochs},
                    {"lr", topts.lr}},
                   {flowset, model_path}, {ckpt, hist_path});
}

void cmd_report(const GlobalOpts& g, const std::string& before_path,
                const std::string& after_path, const std::string& spec_path,
                const std::string& model_path, std::string name) {
    const auto before_bytes = read_file(before_path);
    const auto before =
        attacks::RobustnessReport::from_json(json::parse(before_bytes.begin(), before_bytes.end()));
    const auto after_bytes = read_file(after_path);
    const auto after =
        attacks::RobustnessReport::from_json(json::parse(after_bytes.begin(), after_bytes.end()));
    if (name.empty()) name = "model";

    const auto delta = advtrain::compare(before, after);
    const auto before_csv = out_path(g, "before.csv");
    write_file(before_csv, before.to_csv(name));
    const auto after_csv = out_path(g, "after.csv");
    write_file(after_csv, after.to_csv(name));
    const auto delta_csv = out_path(g, "delta.csv");
    write_file(delta_csv, delta.to_csv(name));
    std::printf("%s", delta.to_csv(name).c_str());
    std::printf("clean accuracy delta %+.2f points\n", delta.clean_delta * 100.0);

    std::vector<std::string> outputs{before_csv, after_csv, delta_csv};
    std::vector<std::string> inputs{before_path, after_path};
    if (!spec_path.empty() || !model_path.empty()) {
        tensornn::ArchSpec spec;
        if (!model_path.empty()) {
            spec = tensornn::load_checkpoint(model_path).spec;
            inputs.push_back(model_path);
        } else {
            const auto bytes = read_file(spec_path);
            spec = tensornn::arch_from_json(json::parse(bytes.begin(), bytes.end()));
            inputs.push_back(spec_path);
        }
        const auto cost = hwcost::cost_report(spec);
        const json complexity{{"model", name},
                              {"params", cost.params},
                              {"flops", cost.flops},
                              {"max_tensor", cost.max_tensor},
                              {"clean_accuracy_before", before.clean_accuracy},
                              {"clean_accuracy_after", after.clean_accuracy}};
        const auto cx_path = out_path(g, "complexity.json");
        write_file(cx_path, complexity.dump(2) + "\n");
        outputs.push_back(cx_path);
        std::printf("complexity: %lld params, %lld flops, %lld max tensor\n",
                    static_cast<long long>(cost.params), static_cast<long long>(cost.flops),
                    static_cast<long long>(cost.max_tensor));
    }
    write_manifest(g, "report", {{"before", before_path}, {"after", after_path}}, inputs, outputs);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"flow-tensor traffic classification: dataset tooling, hardware-aware "
                 "architecture search, FGSM/PGD evaluation, adversarial fine-tuning"};
    app.set_version_flag("--version", std::string("tcnas ") + kVersion);
    app.require_subcommand(1);

    GlobalOpts g;
    if (g.threads < 1) g.threads = 1;
    app.add_option("--seed", g.seed, "base seed for every stochastic component")
        ->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads for candidate training")
        ->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "directory for outputs and manifests")
        ->capture_default_str();

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "PCAPs + labels manifest -> FLOWSET");
    std::string labels_path, format_name = "flat", out_file;
    std::vector<std::string> pcaps;
    double test_frac = 0.2, val_frac = 0.2;
    bool strict = true;
    pre->add_option("--labels", labels_path, "labels manifest: <path>\\t<class> per line")
        ->required();
    pre->add_option("pcaps", pcaps, "pcap files (default: every manifest entry)");
    pre->add_option("--format", format_name, "flat | ts")->capture_default_str();
    pre->add_option("--out", out_file, "output FLOWSET path");
    pre->add_option("--test-frac", test_frac, "test fraction")->capture_default_str();
    pre->add_option("--val-frac", val_frac, "validation fraction of the training pool")
        ->capture_default_str();
    pre->add_flag("--strict,!--no-strict", strict, "fail on unlabeled flows");
    pre->callback([&] {
        cmd_preprocess(g, labels_path, pcaps, format_name, out_file, test_frac, val_frac, strict);
    });

    // synth
    auto* syn = app.add_subcommand("synth", "deterministic synthetic benchmark -> FLOWSET");
    int classes = 4, flows_per_class = 2000;
    syn->add_option("--classes", classes, "number of classes")->capture_default_str();
    syn->add_option("--flows-per-class", flows_per_class, "flows per class")
        ->capture_default_str();
    syn->add_option("--format", format_name, "flat | ts")->capture_default_str();
    syn->add_option("--out", out_file, "output FLOWSET path");
    syn->add_option("--test-frac", test_frac, "test fraction")->capture_default_str();
    syn->add_option("--val-frac", val_frac, "validation fraction of the training pool")
        ->capture_default_str();
    syn->callback(
        [&] { cmd_synth(g, classes, flows_per_class, format_name, out_file, test_frac, val_frac); });

    // preset
    auto* prs = app.add_subcommand("preset", "emit a reference architecture and its costs");
    std::string preset_name;
    int preset_classes = 20;
    prs->add_option("--name", preset_name, "flat | ts")->required();
    prs->add_option("--classes", preset_classes, "classifier outputs")->capture_default_str();
    prs->add_option("--out", out_file, "write the spec JSON here");
    prs->callback([&] { cmd_preset(g, preset_name, preset_classes, out_file); });

    // train
    auto* trn = app.add_subcommand("train", "train one architecture on a FLOWSET");
    std::string flowset_path, spec_path, preset_opt;
    TrainOpts topts;
    trn->add_option("--flowset", flowset_path, "input FLOWSET")->required();
    trn->add_option("--spec", spec_path, "architecture JSON");
    trn->add_option("--preset", preset_opt, "flat | ts");
    add_train_opts(trn, topts);
    trn->callback([&] { cmd_train(g, flowset_path, spec_path, preset_opt, topts); });

    // search
    auto* sea = app.add_subcommand("search", "evolutionary hardware-aware architecture search");
    int generations = 100, children = 15, max_blocks = 8;
    int64_t max_params = 70'000, max_flops = 3'000'000, max_tensor = 6'000;
    std::string seed_spec_path;
    sea->add_option("--flowset", flowset_path, "input FLOWSET")->required();
    sea->add_option("--generations", generations, "generations")->capture_default_str();
    sea->add_option("--children", children, "candidates per generation")->capture_default_str();
    sea->add_option("--max-params", max_params, "parameter threshold (flash)")
        ->capture_default_str();
    sea->add_option("--max-flops", max_flops, "FLOPs threshold")->capture_default_str();
    sea->add_option("--max-tensor", max_tensor, "max intermediate tensor threshold (RAM)")
        ->capture_default_str();
    sea->add_option("--seed-spec", seed_spec_path, "initial architecture JSON (default: random)");
    sea->add_option("--max-blocks", max_blocks, "block-count upper bound")->capture_default_str();
    add_train_opts(sea, topts);
    sea->callback([&] {
        cmd_search(g, flowset_path, generations, children, max_params, max_flops, max_tensor,
                   seed_spec_path, max_blocks, topts);
    });

    // attack
    auto* atk = app.add_subcommand("attack", "FGSM/PGD robustness sweep over an eps grid");
    std::string model_path, model_name;
    std::vector<double> eps_grid;
    int pgd_iters = 10;
    atk->add_option("--flowset", flowset_path, "input FLOWSET")->required();
    atk->add_option("--model", model_path, "TNN1 checkpoint")->required();
    atk->add_option("--eps", eps_grid, "eps grid (default 0.01 0.03 0.05 0.07 0.10 0.15 0.20)");
    atk->add_option("--pgd-iters", pgd_iters, "PGD iterations (step = eps/iters)")
        ->capture_default_str();
    atk->add_option("--name", model_name, "model label in tables");
    atk->callback([&] { cmd_attack(g, flowset_path, model_path, eps_grid, pgd_iters, model_name); });

    // finetune
    auto* fin = app.add_subcommand("finetune", "batch-level adversarial fine-tuning with FGSM");
    double ft_eps = 0.1, adv_fraction = 0.5;
    fin->add_option("--flowset", flowset_path, "input FLOWSET")->required();
    fin->add_option("--model", model_path, "TNN1 checkpoint to harden")->required();
    fin->add_option("--eps", ft_eps, "FGSM budget for training batches")->capture_default_str();
    fin->add_option("--adv-fraction", adv_fraction, "perturbed fraction of each batch")
        ->capture_default_str();
    TrainOpts ft_topts;
    ft_topts.epochs = 100;
    ft_topts.lr = 0.0004;
    add_train_opts(fin, ft_topts);
    fin->callback(
        [&] { cmd_finetune(g, flowset_path, model_path, ft_eps, adv_fraction, ft_topts); });

    // report
    auto* rep = app.add_subcommand("report", "before/after tables, deltas, complexity row");
    std::string before_path, after_path;
    rep->add_option("--before", before_path, "robustness JSON before fine-tuning")->required();
    rep->add_option("--after", after_path, "robustness JSON after fine-tuning")->required();
    rep->add_option("--spec", spec_path, "architecture JSON for the complexity row");
    rep->add_option("--model", model_path, "checkpoint for the complexity row");
    rep->add_option("--name", model_name, "model label in tables");
    rep->callback(
        [&] { cmd_report(g, before_path, after_path, spec_path, model_path, model_name); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: [Internal] " << e.what() << "\n";
        return 1;
    }
    return 0;
}
