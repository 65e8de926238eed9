// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: simulate | train | eval | ablate | gradcheck |
// dump-affinity | dump-implicit-tracks.

#include "uncertrack/config.hpp"
#include "uncertrack/diagnostics.hpp"
#include "uncertrack/errors.hpp"
#include "uncertrack/evaluation.hpp"
#include "uncertrack/optim.hpp"
#include "uncertrack/training.hpp"
#include "uncertrack/version.hpp"
#include "uncertrack/weights_io.hpp"
#include "uncertrack/world_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace uncertrack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("-c,--config", opts.config_path, "key=value config file");
    cmd->add_option("--set", opts.overrides, "override a config key (key=value); repeatable");
    cmd->add_option("--seed", opts.seed, "run seed");
    cmd->add_option("--threads", opts.threads, "worker threads (results do not depend on it)");
}

RunConfig resolve_config(const CommonOptions& opts) {
    RunConfig config = opts.config_path.empty() ? RunConfig{} : load_config(opts.config_path);
    for (const auto& o : opts.overrides) {
        apply_override(config, o);
    }
    if (opts.seed) {
        config.train.seed = *opts.seed;
    }
    if (opts.threads) {
        config.train.threads = *opts.threads;
        config.eval.threads = *opts.threads;
    }
    return config;
}

class Manifest {
public:
    Manifest(std::string command, const CommonOptions& opts, const RunConfig& config)
        : start_(std::chrono::steady_clock::now()) {
        json_["command"] = std::move(command);
        json_["config_path"] = opts.config_path;
        json_["seed"] = config.train.seed;
        json_["tool_version"] = kVersion;
        json_["inputs"] = nlohmann::ordered_json::array();
        json_["outputs"] = nlohmann::ordered_json::array();
        std::ostringstream cfg;
        write_config(cfg, config);
        json_["config"] = cfg.str();
    }
    void input(const std::string& p) { json_["inputs"].push_back(p); }
    void output(const std::string& p) { json_["outputs"].push_back(p); }
    void write(const fs::path& primary_output) {
        json_["duration_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        const fs::path path = primary_output.string() + ".manifest.json";
        std::ofstream out(path);
        if (!out) {
            throw FileError("cannot write " + path.string());
        }
        out << json_.dump(2) << '\n';
    }

private:
    nlohmann::ordered_json json_;
    std::chrono::steady_clock::time_point start_;
};

void ensure_parent(const fs::path& p) {
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
}

ModelParams load_model(const RunConfig& config, const std::string& weights_path) {
    ModelParams model = make_model_layout(config.train.model_config());
    assign_weights(model.blocks, read_weights(weights_path));
    return model;
}

std::vector<fs::path> to_paths(const std::vector<std::string>& in) { return {in.begin(), in.end()}; }

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    CommonOptions common;
    std::string out;
    std::size_t count = 1;
    bool no_ground_truth = false;
};

int cmd_simulate(const SimulateArgs& a) {
    RunConfig config = resolve_config(a.common);
    Manifest manifest("simulate", a.common, config);
    if (a.count == 1) {
        const auto log = sim::simulate_world(config.world, config.noise, config.train.seed);
        ensure_parent(a.out);
        sim::save_world(a.out, log, !a.no_ground_truth);
        manifest.output(a.out);
        manifest.write(a.out);
        std::cout << "wrote " << a.out << " (" << log.tracks.size() << " agents, " << log.num_frames()
                  << " frames)\n";
        return kExitOk;
    }
    fs::create_directories(a.out);
    for (std::size_t i = 0; i < a.count; ++i) {
        const auto log = sim::simulate_world(config.world, config.noise, config.train.seed + i);
        std::ostringstream name;
        name << "world_" << std::setw(4) << std::setfill('0') << i << ".jsonl";
        const fs::path p = fs::path(a.out) / name.str();
        sim::save_world(p, log, !a.no_ground_truth);
        manifest.output(p.string());
    }
    manifest.write(fs::path(a.out) / "worlds");
    std::cout << "wrote " << a.count << " worlds to " << a.out << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    CommonOptions common;
    std::vector<std::string> worlds;
    std::string out;
    std::string loss_csv;
    std::string variant;
    bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
    RunConfig config = resolve_config(a.common);
    if (!a.variant.empty()) {
        eval::apply_variant(config.train, eval::parse_variant(a.variant));
    }
    const auto worlds = sim::load_worlds(to_paths(a.worlds));
    Manifest manifest("train", a.common, config);
    for (const auto& w : a.worlds) {
        manifest.input(w);
    }
    const auto result = train(config.train, worlds, [&](const EpochStats& e) {
        if (!a.quiet) {
            std::cerr << "epoch " << e.epoch << " l_traj=" << e.l_traj << " l_aff=" << e.l_aff
                      << " lambda=" << e.lambda << " lr=" << e.lr << '\n';
        }
    });
    ensure_parent(a.out);
    save_weights(a.out, result.model.blocks);
    const std::string csv = a.loss_csv.empty() ? a.out + ".loss.csv" : a.loss_csv;
    std::ofstream out(csv);
    if (!out) {
        throw FileError("cannot write " + csv);
    }
    write_loss_csv(out, result.curve);
    manifest.output(a.out);
    manifest.output(csv);
    manifest.write(a.out);
    std::cout << "wrote " << a.out << " and " << csv << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    CommonOptions common;
    std::string weights;
    std::vector<std::string> worlds;
    std::string variant;
    std::string out;
    bool samples = false;
};

int cmd_eval(const EvalArgs& a) {
    RunConfig config = resolve_config(a.common);
    if (!a.variant.empty()) {
        eval::apply_variant(config.train, eval::parse_variant(a.variant));
    }
    const ModelParams model = load_model(config, a.weights);
    const auto worlds = sim::load_worlds(to_paths(a.worlds));
    eval::EvalReport report = eval::evaluate(model, worlds, config.eval);
    report.variant = a.variant.empty() ? "model" : a.variant;
    eval::write_report_table(std::cout, std::span(&report, 1));
    if (!a.out.empty()) {
        Manifest manifest("eval", a.common, config);
        manifest.input(a.weights);
        for (const auto& w : a.worlds) {
            manifest.input(w);
        }
        ensure_parent(a.out);
        std::ofstream out(a.out);
        if (!out) {
            throw FileError("cannot write " + a.out);
        }
        out << report.to_json(a.samples).dump(2) << '\n';
        std::ofstream table(a.out + ".txt");
        eval::write_report_table(table, std::span(&report, 1));
        manifest.output(a.out);
        manifest.output(a.out + ".txt");
        manifest.write(a.out);
    }
    return kExitOk;
}

// ---------------------------------------------------------------- ablate

struct AblateArgs {
    CommonOptions common;
    std::vector<std::string> train_worlds;
    std::vector<std::string> eval_worlds;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::vector<std::string> variants{"baseline", "asu", "msa", "full"};
    std::string out;
};

int cmd_ablate(const AblateArgs& a) {
    RunConfig config = resolve_config(a.common);
    const auto train_worlds = sim::load_worlds(to_paths(a.train_worlds));
    const auto eval_worlds = sim::load_worlds(to_paths(a.eval_worlds));
    std::vector<eval::Variant> variants;
    for (const auto& v : a.variants) {
        variants.push_back(eval::parse_variant(v));
    }
    Manifest manifest("ablate", a.common, config);
    const auto report = eval::ablation_run(config.train, train_worlds, eval_worlds, variants, a.seeds, config.eval,
                                           [](eval::Variant v, std::uint64_t seed, const eval::EvalReport& r) {
                                               std::cerr << eval::variant_name(v) << " seed " << seed << ": fde "
                                                         << (r.fde_cm ? *r.fde_cm : -1.0) << " nl_fde "
                                                         << (r.nl_fde_cm ? *r.nl_fde_cm : -1.0) << '\n';
                                           });
    eval::write_ablation_table(std::cout, report);
    if (!a.out.empty()) {
        ensure_parent(a.out);
        std::ofstream out(a.out);
        if (!out) {
            throw FileError("cannot write " + a.out);
        }
        out << report.to_json().dump(2) << '\n';
        std::ofstream table(a.out + ".txt");
        eval::write_ablation_table(table, report);
        manifest.output(a.out);
        manifest.write(a.out);
    }
    return kExitOk;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckArgs {
    CommonOptions common;
    long long samples = 200;
    double eps = 1e-4;
    double threshold = 1e-4;
    std::string corrupt_block;
    bool verbose = false;
};

int cmd_gradcheck(const GradcheckArgs& a) {
    if (a.samples <= 0) {
        throw PreconditionError("gradcheck: samples must be > 0");
    }
    RunConfig config = resolve_config(a.common);
    // A 3-agent, 5-frame batch.
    sim::WorldConfig world = config.world;
    world.num_agents = 3;
    world.area = 15.0;
    world.num_frames = std::max(world.num_frames, world.min_lifespan);
    const auto log = sim::simulate_world(world, config.noise, config.train.seed);
    SequenceOptions seq_opts = config.train.sequence_options();
    seq_opts.t_obs = 5;
    std::vector<Sequence> batch;
    const auto starts = training_starts(log, seq_opts);
    for (std::size_t i = 0; i < 2 && i < starts.size(); ++i) {
        batch.push_back(extract_sequence(log, starts[i * (starts.size() / 2)], seq_opts));
    }
    ModelParams model = make_model(config.train.model_config(), derive_seed(config.train.seed, "init"));
    const forecast::IdentitySocial social;
    std::optional<std::size_t> corrupt;
    if (!a.corrupt_block.empty()) {
        for (std::size_t b = 0; b < model.blocks.size(); ++b) {
            if (model.blocks[b].name == a.corrupt_block) {
                corrupt = b;
            }
        }
        if (!corrupt) {
            throw ConfigError("no parameter block named '" + a.corrupt_block + "'");
        }
    }
    const LossFn loss = [&](bool with_grad) {
        const double value = batch_loss(model, social, batch, 0.5, with_grad).total;
        if (with_grad && corrupt) {
            for (auto& g : model.blocks[*corrupt].grads) {
                g.map() *= 1.5;
            }
        }
        return value;
    };
    const auto report = grad_check(loss, model.blocks, static_cast<std::size_t>(a.samples), a.eps, config.train.seed);
    std::set<std::string> covered;
    for (const auto& e : report.entries) {
        covered.insert(e.block);
    }
    std::cout << "gradcheck: " << report.entries.size() << " parameters across " << covered.size()
              << " blocks, max relative error " << report.max_error << " (" << report.skipped.size()
              << " draws at non-differentiable points replaced)\n";
    if (a.verbose) {
        for (const auto& e : report.entries) {
            std::cout << "  " << e.block << "[" << e.tensor << "][" << e.index << "] analytic " << e.analytic
                      << " numeric " << e.numeric << " error " << e.error << '\n';
        }
        for (const auto& e : report.skipped) {
            std::cout << "  replaced " << e.block << "[" << e.tensor << "][" << e.index << "] analytic " << e.analytic
                      << " numeric " << e.numeric << '\n';
        }
    }
    const auto failures = report.failures(a.threshold);
    if (failures.empty()) {
        std::cout << "PASS\n";
        return kExitOk;
    }
    std::cout << "FAIL\n";
    for (const auto& f : failures) {
        std::cout << "  " << f.block << "[" << f.tensor << "][" << f.index << "] analytic " << f.analytic
                  << " numeric " << f.numeric << " error " << f.error << '\n';
    }
    return kExitNumerical;
}

// ---------------------------------------------------------------- dumps

struct DumpArgs {
    CommonOptions common;
    std::string weights;
    std::string world;
    int start = 0;
    std::string out;
    std::string variant;
};

template <typename Writer>
int cmd_dump(const std::string& name, const DumpArgs& a, Writer writer) {
    RunConfig config = resolve_config(a.common);
    if (!a.variant.empty()) {
        eval::apply_variant(config.train, eval::parse_variant(a.variant));
    }
    const ModelParams model = load_model(config, a.weights);
    const auto log = sim::load_world(a.world);
    if (a.out.empty()) {
        writer(std::cout, model, log, a.start, config.train.sequence_options());
        return kExitOk;
    }
    Manifest manifest(name, a.common, config);
    manifest.input(a.weights);
    manifest.input(a.world);
    ensure_parent(a.out);
    std::ofstream out(a.out);
    if (!out) {
        throw FileError("cannot write " + a.out);
    }
    writer(out, model, log, a.start, config.train.sequence_options());
    manifest.output(a.out);
    manifest.write(a.out);
    return kExitOk;
}

void add_dump(CLI::App* cmd, DumpArgs& a) {
    add_common(cmd, a.common);
    cmd->add_option("-w,--weights", a.weights, "weights file")->required();
    cmd->add_option("--world", a.world, "world JSONL file")->required();
    cmd->add_option("--start", a.start, "first observed frame");
    cmd->add_option("--variant", a.variant, "baseline | asu | msa | full");
    cmd->add_option("-o,--out", a.out, "output JSONL (stdout if omitted)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uncertrack: trajectory forecasting from detections"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic world as JSONL");
    add_common(simulate, sim_args.common);
    simulate->add_option("-o,--out", sim_args.out, "output file (or directory with --count > 1)")->required();
    simulate->add_option("--count", sim_args.count, "number of worlds (seeds seed, seed+1, ...)");
    simulate->add_flag("--no-ground-truth", sim_args.no_ground_truth, "omit agent tracks and detection ids");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train a model on world files");
    add_common(train_cmd, train_args.common);
    train_cmd->add_option("--worlds", train_args.worlds, "world files or directories")->required();
    train_cmd->add_option("-o,--out", train_args.out, "weights file")->required();
    train_cmd->add_option("--loss-csv", train_args.loss_csv, "loss curve CSV (default <out>.loss.csv)");
    train_cmd->add_option("--variant", train_args.variant, "baseline | asu | msa | full");
    train_cmd->add_flag("-q,--quiet", train_args.quiet, "no per-epoch progress");

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate fde@3s and nl_fde@3s");
    add_common(eval_cmd, eval_args.common);
    eval_cmd->add_option("-w,--weights", eval_args.weights, "weights file")->required();
    eval_cmd->add_option("--worlds", eval_args.worlds, "world files or directories")->required();
    eval_cmd->add_option("--variant", eval_args.variant, "baseline | asu | msa | full");
    eval_cmd->add_option("-o,--out", eval_args.out, "JSON report (text table beside it)");
    eval_cmd->add_flag("--samples", eval_args.samples, "include per-sample errors in the JSON report");

    AblateArgs ablate_args;
    auto* ablate = app.add_subcommand("ablate", "train and evaluate variants over seeds");
    add_common(ablate, ablate_args.common);
    ablate->add_option("--train-worlds", ablate_args.train_worlds, "training world files or directories")
        ->required();
    ablate->add_option("--eval-worlds", ablate_args.eval_worlds, "evaluation world files or directories")
        ->required();
    ablate->add_option("--seeds", ablate_args.seeds, "training seeds");
    ablate->add_option("--variants", ablate_args.variants, "variants to train");
    ablate->add_option("-o,--out", ablate_args.out, "JSON report (text table beside it)");

    GradcheckArgs gc_args;
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the full loss");
    add_common(gradcheck, gc_args.common);
    gradcheck->add_option("--samples", gc_args.samples, "parameters to check");
    gradcheck->add_option("--eps", gc_args.eps, "finite-difference step");
    gradcheck->add_option("--threshold", gc_args.threshold, "maximum relative error");
    gradcheck->add_flag("-v,--verbose", gc_args.verbose, "list every checked and replaced parameter");
    gradcheck->add_option("--corrupt-block", gc_args.corrupt_block, "test fixture: scale one block's gradient")
        ->group("");

    DumpArgs aff_args;
    auto* dump_aff = app.add_subcommand("dump-affinity", "per-pair affinity scores and labels as JSONL");
    add_dump(dump_aff, aff_args);
    DumpArgs tracks_args;
    auto* dump_tracks = app.add_subcommand("dump-implicit-tracks", "highest-weight candidate chains as JSONL");
    add_dump(dump_tracks, tracks_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*simulate) {
            return cmd_simulate(sim_args);
        }
        if (*train_cmd) {
            return cmd_train(train_args);
        }
        if (*eval_cmd) {
            return cmd_eval(eval_args);
        }
        if (*ablate) {
            return cmd_ablate(ablate_args);
        }
        if (*gradcheck) {
            return cmd_gradcheck(gc_args);
        }
        if (*dump_aff) {
            return cmd_dump("dump-affinity", aff_args, diag::write_affinity_dump);
        }
        if (*dump_tracks) {
            return cmd_dump("dump-implicit-tracks", tracks_args, diag::write_implicit_tracks);
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitConfig;
}
