// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/world_io.hpp"

#include "uncertrack/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace uncertrack::sim {
namespace {

using json = nlohmann::ordered_json;

json vec(Vec2 v) { return json::array({v.x, v.y}); }

Vec2 to_vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

std::array<double, 3> to_size(const json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

}  // namespace

void write_world_jsonl(std::ostream& out, const WorldLog& log, bool include_ground_truth) {
    json header;
    header["type"] = "world";
    header["frame_rate"] = log.frame_rate;
    header["num_frames"] = log.num_frames();
    header["rng_seed"] = log.rng_seed;
    out << header.dump() << '\n';

    if (include_ground_truth) {
        for (const auto& t : log.tracks) {
            json a;
            a["type"] = "agent";
            a["agent_id"] = t.agent_id;
            a["motion"] = std::string(motion_name(t.motion));
            a["birth_frame"] = t.birth_frame;
            a["death_frame"] = t.death_frame;
            json states = json::array();
            for (const auto& s : t.states) {
                json js;
                js["pos"] = vec(s.pos);
                js["velo"] = vec(s.velo);
                js["heading"] = s.heading;
                js["size"] = s.size;
                states.push_back(std::move(js));
            }
            a["states"] = std::move(states);
            out << a.dump() << '\n';
        }
    }
    for (int f = 0; f < log.num_frames(); ++f) {
        json fr;
        fr["type"] = "frame";
        fr["frame"] = f;
        json dets = json::array();
        for (const auto& wd : log.frames[static_cast<std::size_t>(f)]) {
            json d;
            d["pos"] = vec(wd.det.pos);
            d["velo"] = vec(wd.det.velo);
            d["size"] = wd.det.size;
            d["heading"] = wd.det.heading;
            d["score"] = wd.det.score;
            if (include_ground_truth) {
                if (wd.is_false_positive()) {
                    d["true_id"] = "FP";
                } else {
                    d["true_id"] = wd.true_id;
                }
            }
            dets.push_back(std::move(d));
        }
        fr["detections"] = std::move(dets);
        out << fr.dump() << '\n';
    }
}

WorldLog read_world_jsonl(std::istream& in) {
    WorldLog log;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            const json j = json::parse(line);
            const std::string type = j.at("type").get<std::string>();
            if (type == "world") {
                log.frame_rate = j.at("frame_rate").get<double>();
                log.rng_seed = j.at("rng_seed").get<std::uint64_t>();
                log.frames.resize(j.at("num_frames").get<std::size_t>());
            } else if (type == "agent") {
                AgentTrack t;
                t.agent_id = j.at("agent_id").get<int>();
                t.motion = parse_motion(j.at("motion").get<std::string>());
                t.birth_frame = j.at("birth_frame").get<int>();
                t.death_frame = j.at("death_frame").get<int>();
                for (const auto& js : j.at("states")) {
                    AgentState s;
                    s.pos = to_vec(js.at("pos"));
                    s.velo = to_vec(js.at("velo"));
                    s.heading = js.at("heading").get<double>();
                    s.size = to_size(js.at("size"));
                    t.states.push_back(s);
                }
                log.tracks.push_back(std::move(t));
            } else if (type == "frame") {
                const auto f = j.at("frame").get<std::size_t>();
                if (f >= log.frames.size()) {
                    log.frames.resize(f + 1);
                }
                auto& frame = log.frames[f];
                frame.clear();
                for (const auto& jd : j.at("detections")) {
                    WorldDetection wd;
                    wd.det.pos = to_vec(jd.at("pos"));
                    wd.det.velo = to_vec(jd.at("velo"));
                    wd.det.size = to_size(jd.at("size"));
                    wd.det.heading = jd.at("heading").get<double>();
                    wd.det.score = jd.at("score").get<double>();
                    wd.det.frame = static_cast<int>(f);
                    wd.det.local_index = frame.size();
                    if (jd.contains("true_id") && jd["true_id"].is_number_integer()) {
                        wd.true_id = jd["true_id"].get<int>();
                    }
                    frame.push_back(wd);
                }
            } else {
                throw ConfigError("unknown line type '" + type + "'");
            }
        } catch (const json::exception& e) {
            throw ConfigError("world JSONL line " + std::to_string(line_no) + ": " + e.what());
        } catch (const ConfigError& e) {
            throw ConfigError("world JSONL line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return log;
}

void save_world(const std::filesystem::path& path, const WorldLog& log, bool include_ground_truth) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw FileError("cannot write world file: " + path.string());
    }
    write_world_jsonl(out, log, include_ground_truth);
}

WorldLog load_world(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw FileError("file not found: " + path.string());
    }
    return read_world_jsonl(in);
}

std::vector<std::filesystem::path> expand_world_paths(const std::vector<std::filesystem::path>& inputs) {
    std::vector<std::filesystem::path> out;
    for (const auto& p : inputs) {
        if (!std::filesystem::exists(p)) {
            throw FileError("file not found: " + p.string());
        }
        if (std::filesystem::is_directory(p)) {
            std::vector<std::filesystem::path> files;
            for (const auto& entry : std::filesystem::directory_iterator(p)) {
                if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
                    files.push_back(entry.path());
                }
            }
            std::sort(files.begin(), files.end());
            out.insert(out.end(), files.begin(), files.end());
        } else {
            out.push_back(p);
        }
    }
    return out;
}

std::vector<WorldLog> load_worlds(const std::vector<std::filesystem::path>& inputs) {
    std::vector<WorldLog> worlds;
    for (const auto& p : expand_world_paths(inputs)) {
        worlds.push_back(load_world(p));
    }
    return worlds;
}

}  // namespace uncertrack::sim
