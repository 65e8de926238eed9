// Copyright (c) 2026 uncertrack contributors
// SPDX-License-Identifier: Apache-2.0

#include "uncertrack/config.hpp"

#include "uncertrack/errors.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace uncertrack {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("invalid value '" + text + "' for key '" + key + "'");
    }
    return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "on" || text == "yes") {
        return true;
    }
    if (text == "false" || text == "0" || text == "off" || text == "no") {
        return false;
    }
    throw ConfigError("invalid boolean '" + text + "' for key '" + key + "'");
}

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

struct Field {
    std::function<void(RunConfig&, const std::string& key, const std::string& value)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename T, typename Access>
Field number_field(Access access) {
    return {[access](RunConfig& c, const std::string& key, const std::string& v) {
                access(c) = parse_number<T>(key, v);
            },
            [access](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>) {
                    return format_double(access(const_cast<RunConfig&>(c)));
                } else {
                    return std::to_string(access(const_cast<RunConfig&>(c)));
                }
            }};
}

template <typename Access>
Field bool_field(Access access) {
    return {[access](RunConfig& c, const std::string& key, const std::string& v) { access(c) = parse_bool(key, v); },
            [access](const RunConfig& c) {
                return std::string(access(const_cast<RunConfig&>(c)) ? "true" : "false");
            }};
}

#define UT_NUM(T, key, member) \
    {key, number_field<T>([](RunConfig& c) -> T& { return c.member; })}
#define UT_BOOL(key, member) \
    {key, bool_field([](RunConfig& c) -> bool& { return c.member; })}

const std::map<std::string, Field>& fields() {
    static const std::map<std::string, Field> table = {
        UT_NUM(int, "num_agents", world.num_agents),
        UT_NUM(int, "num_frames", world.num_frames),
        UT_NUM(double, "frame_rate", world.frame_rate),
        UT_NUM(double, "area", world.area),
        UT_NUM(double, "speed_min", world.speed_min),
        UT_NUM(double, "speed_max", world.speed_max),
        UT_NUM(int, "min_lifespan", world.min_lifespan),
        UT_NUM(double, "mix_constant_velocity", world.motion_mix.constant_velocity),
        UT_NUM(double, "mix_constant_turn", world.motion_mix.constant_turn),
        UT_NUM(double, "mix_accelerating", world.motion_mix.accelerating),
        UT_NUM(double, "mix_stop_and_go", world.motion_mix.stop_and_go),

        UT_NUM(double, "pos_sigma", noise.pos_sigma),
        UT_NUM(double, "velo_sigma", noise.velo_sigma),
        UT_NUM(double, "heading_sigma", noise.heading_sigma),
        UT_NUM(double, "size_sigma", noise.size_sigma),
        UT_NUM(double, "miss_rate", noise.miss_rate),
        UT_NUM(double, "fp_rate", noise.fp_rate),
        UT_NUM(double, "fp_cluster_sigma", noise.fp_cluster_sigma),
        UT_NUM(double, "fp_velo_sigma", noise.fp_velo_sigma),
        UT_NUM(double, "score_tp_mean", noise.score_tp_mean),
        UT_NUM(double, "score_fp_mean", noise.score_fp_mean),
        UT_NUM(double, "score_sigma", noise.score_sigma),
        UT_NUM(double, "burst_prob", noise.burst_prob),
        UT_NUM(double, "burst_pos_factor", noise.burst_pos_factor),

        UT_NUM(std::size_t, "batch_sequences", train.batch_sequences),
        UT_NUM(std::size_t, "max_detections", train.max_detections),
        UT_NUM(int, "t_obs", train.t_obs),
        UT_NUM(std::size_t, "top_k", train.top_k),
        UT_NUM(double, "theta_d", train.theta_d),
        UT_NUM(std::size_t, "hidden_dim", train.hidden_dim),
        UT_NUM(std::size_t, "det_dim", train.det_dim),
        UT_NUM(std::size_t, "mov_dim", train.mov_dim),
        UT_NUM(std::size_t, "aff_mot_dim", train.aff_mot_dim),
        UT_NUM(std::size_t, "dec_hidden", train.dec_hidden),
        UT_NUM(double, "lr", train.lr),
        UT_NUM(double, "lr_decay", train.lr_decay),
        UT_NUM(int, "lr_decay_count", train.lr_decay_count),
        UT_NUM(int, "epochs", train.epochs),
        UT_NUM(double, "lambda_start", train.lambda_start),
        UT_NUM(double, "lambda_end", train.lambda_end),
        UT_NUM(std::uint64_t, "seed", train.seed),
        UT_BOOL("augmentation", train.augmentation),
        UT_BOOL("use_asu", train.use_asu),
        UT_BOOL("use_msa", train.use_msa),
        UT_BOOL("learned_init", train.learned_init),
        UT_BOOL("birth_update", train.birth_update),
        UT_BOOL("invariant_inputs", train.invariant_inputs),
        UT_NUM(std::size_t, "sequences_per_world", train.sequences_per_world),
        UT_NUM(std::size_t, "threads", train.threads),

        UT_NUM(double, "match_threshold", eval.match_threshold),
        UT_NUM(double, "nl_threshold", eval.nl_threshold),
        UT_NUM(int, "start_stride", eval.start_stride),
        {"target_recall",
         {[](RunConfig& c, const std::string& key, const std::string& v) {
              if (v == "none") {
                  c.eval.target_recall.reset();
              } else {
                  c.eval.target_recall = parse_number<double>(key, v);
              }
          },
          [](const RunConfig& c) {
              return c.eval.target_recall ? format_double(*c.eval.target_recall) : std::string("none");
          }}},
    };
    return table;
}

#undef UT_NUM
#undef UT_BOOL

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
    const auto it = fields().find(key);
    if (it == fields().end()) {
        throw ConfigError("unknown config key '" + key + "'");
    }
    it->second.set(config, key, value);
    // Sequence geometry is shared between training and evaluation.
    config.eval.t_obs = config.train.t_obs;
    config.eval.max_detections = config.train.max_detections;
}

void parse_config(std::istream& in, RunConfig& config, const std::string& source) {
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(number);
        if (eq == std::string::npos) {
            throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        try {
            apply_setting(config, key, trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw FileError("file not found: " + path.string());
    }
    RunConfig config;
    parse_config(in, config, path.string());
    return config;
}

void apply_override(RunConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("expected key=value, got '" + assignment + "'");
    }
    apply_setting(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, _] : fields()) {
        keys.push_back(k);
    }
    return keys;
}

void write_config(std::ostream& out, const RunConfig& config) {
    for (const auto& [k, f] : fields()) {
        out << k << " = " << f.get(config) << '\n';
    }
}

}  // namespace uncertrack
