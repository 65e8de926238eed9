// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "test_support.hpp"
#include "uncertrack/config.hpp"
#include "uncertrack/errors.hpp"
#include "uncertrack/evaluation.hpp"
#include "uncertrack/weights_io.hpp"
#include "uncertrack/world_io.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace uncertrack;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string output;
};

CliRun run_cli(const std::string& args) {
    const std::string cmd = std::string(UNCERTRACK_CLI) + " " + args + " 2>&1";
    CliRun r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        return r;
    }
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) {
        r.output.append(buf, n);
    }
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

class Cli : public ::testing::Test {
protected:
    fs::path dir;

    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / (std::string("uncertrack_cli_") + info->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string path(const std::string& name) const { return (dir / name).string(); }
};

const char* kSmallWorld = "--set num_frames=80 --set num_agents=4";

}  // namespace

TEST(Config, ParsesKeysAndComments) {
    RunConfig c;
    std::istringstream in("# world\nnum_agents = 7\n\nepochs=3  # short\nlambda_end = 0.25\n");
    parse_config(in, c);
    EXPECT_EQ(c.world.num_agents, 7u);
    EXPECT_EQ(c.train.epochs, 3u);
    EXPECT_DOUBLE_EQ(c.train.lambda_end, 0.25);
}

TEST(Config, UnknownKeyNamesKeyAndLine) {
    RunConfig c;
    std::istringstream in("epochs = 3\nnum_agnets = 4\n");
    try {
        parse_config(in, c, "run.cfg");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("num_agnets"), std::string::npos) << msg;
        EXPECT_NE(msg.find("run.cfg:2"), std::string::npos) << msg;
    }
}

TEST(Config, MalformedValueNamesKey) {
    RunConfig c;
    try {
        apply_override(c, "epochs=ten");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("epochs"), std::string::npos);
    }
    EXPECT_THROW(apply_override(c, "epochs"), ConfigError);
}

TEST(Config, WrittenConfigParsesBack) {
    RunConfig c;
    apply_override(c, "num_agents=9");
    apply_override(c, "pos_sigma=0.125");
    apply_override(c, "hidden_dim=16");
    std::ostringstream out;
    write_config(out, c);
    RunConfig back;
    std::istringstream in(out.str());
    parse_config(in, back);
    std::ostringstream again;
    write_config(again, back);
    EXPECT_EQ(out.str(), again.str());
    EXPECT_EQ(back.world.num_agents, 9u);
    EXPECT_EQ(back.noise.pos_sigma, 0.125);
    for (const auto& key : config_keys()) {
        EXPECT_NE(out.str().find(key + " ="), std::string::npos) << key;
    }
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run_cli("--help").code, 0);
    EXPECT_EQ(run_cli("no-such-command").code, 1);
    EXPECT_EQ(run_cli("simulate").code, 1);
    const CliRun ok = run_cli(std::string("gradcheck --samples 20 ") + kSmallWorld);
    EXPECT_EQ(ok.code, 0) << ok.output;
    const CliRun bad = run_cli(std::string("gradcheck --samples 60 --corrupt-block gru_mot ") + kSmallWorld);
    EXPECT_EQ(bad.code, 2) << bad.output;
}

TEST_F(Cli, CorruptedBlockIsNamed) {
    const CliRun r = run_cli(std::string("gradcheck --samples 60 --corrupt-block mlp_dec ") + kSmallWorld);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("FAIL"), std::string::npos);
    EXPECT_NE(r.output.find("mlp_dec["), std::string::npos) << r.output;
    EXPECT_EQ(run_cli("gradcheck --corrupt-block nothing").code, 1);
}

TEST_F(Cli, ZeroSamplesRejected) {
    const CliRun r = run_cli("gradcheck --samples 0");
    EXPECT_EQ(r.code, 1) << r.output;
}

TEST_F(Cli, BadConfigKeyReported) {
    std::ofstream(path("bad.cfg")) << "epochs = 2\nbogus_key = 1\n";
    const CliRun r = run_cli("simulate -c " + path("bad.cfg") + " -o " + path("w.jsonl"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find("bogus_key"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find(":2"), std::string::npos) << r.output;
    EXPECT_FALSE(fs::exists(path("w.jsonl")));
}

TEST_F(Cli, ZeroAgentsRejected) {
    const CliRun r = run_cli("simulate --set num_agents=0 -o " + path("w.jsonl"));
    EXPECT_EQ(r.code, 1) << r.output;
    EXPECT_NE(r.output.find("num_agents"), std::string::npos) << r.output;
}

TEST_F(Cli, MissingWorldsPathNamed) {
    const std::string missing = path("absent_dir");
    const CliRun r = run_cli("train --worlds " + missing + " -o " + path("m.bin"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find(missing), std::string::npos) << r.output;
}

TEST_F(Cli, SimulateMatchesLibrary) {
    const CliRun r = run_cli(std::string("simulate --seed 12 ") + kSmallWorld + " -o " + path("w.jsonl"));
    ASSERT_EQ(r.code, 0) << r.output;
    sim::WorldConfig wc;
    wc.num_frames = 80;
    wc.num_agents = 4;
    const auto expected = sim::simulate_world(wc, sim::NoiseConfig{}, 12);
    std::ostringstream want;
    sim::write_world_jsonl(want, expected);
    std::ifstream in(path("w.jsonl"));
    std::stringstream got;
    got << in.rdbuf();
    EXPECT_EQ(got.str(), want.str());
    EXPECT_TRUE(fs::exists(path("w.jsonl.manifest.json")));
}

TEST_F(Cli, StandStillModelMatchesIndependentRecomputation) {
    ASSERT_EQ(run_cli("simulate --seed 21 --count 2 -o " + path("worlds")).code, 0);
    ModelParams model = make_model_layout(TrainConfig::desk().model_config());
    save_weights(path("zero.bin"), model.blocks);
    const CliRun r = run_cli("eval -w " + path("zero.bin") + " --worlds " + path("worlds") + " -o " + path("r.json"));
    ASSERT_EQ(r.code, 0) << r.output;
    std::ifstream rin(path("r.json"));
    const auto report = nlohmann::json::parse(rin);

    // With all weights zero every forecast stays at the detection.
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& p : sim::expand_world_paths({path("worlds")})) {
        const auto log = sim::load_world(p);
        const int t_obs = 20;
        for (int start = 0; start + t_obs - 1 + 30 < log.num_frames(); start += 10) {
            const int t = start + t_obs - 1;
            std::vector<eval::GroundTruthAgent> agents;
            for (const auto& tr : log.tracks) {
                if (tr.alive(t) && tr.alive(t + 30)) {
                    agents.push_back({tr.agent_id, tr.at(t).pos});
                }
            }
            const auto dets = log.detections(t);
            // Independent greedy matching by ascending distance.
            std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
            for (std::size_t i = 0; i < dets.size(); ++i) {
                for (std::size_t j = 0; j < agents.size(); ++j) {
                    const double d = distance(dets[i].pos, agents[j].pos);
                    if (d <= 2.0) {
                        pairs.emplace_back(d, i, j);
                    }
                }
            }
            std::sort(pairs.begin(), pairs.end());
            std::vector<bool> det_used(dets.size());
            std::vector<bool> agent_used(agents.size());
            for (const auto& [d, i, j] : pairs) {
                if (det_used[i] || agent_used[j]) {
                    continue;
                }
                det_used[i] = agent_used[j] = true;
                sum += distance(dets[i].pos, log.find_agent(agents[j].agent_id)->at(t + 30).pos);
                ++count;
            }
        }
    }
    ASSERT_GT(count, 0u);
    EXPECT_EQ(report["num_matched"].get<std::size_t>(), count);
    EXPECT_NEAR(report["fde_cm"].get<double>(), 100.0 * sum / static_cast<double>(count), 1e-6);
}
