#include "gauge/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gauge/csv.hpp"
#include "gauge/errors.hpp"

namespace gauge {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
    throw InvalidInput("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

double to_real(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
        bad_value(key, text, "a finite number");
    }
    return v;
}

int to_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    int v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        bad_value(key, text, "an integer");
    }
    return v;
}

bool to_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    bad_value(key, text, "true or false");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(text);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> to_real_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(to_real(key, item));
    if (out.empty()) bad_value(key, text, "a comma-separated list of numbers");
    return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& text) {
    std::vector<int> out;
    for (const auto& item : split_list(text)) out.push_back(to_int(key, item));
    if (out.empty()) bad_value(key, text, "a comma-separated list of integers");
    return out;
}

template <typename T>
std::string join(const std::vector<T>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_floating_point_v<T>) {
            out += format_number(values[i]);
        } else {
            out += std::to_string(values[i]);
        }
    }
    return out;
}

}  // namespace

Command parse_command(const std::string& name) {
    if (name == "quench") return Command::quench;
    if (name == "deviation") return Command::deviation;
    if (name == "sweep") return Command::sweep;
    if (name == "squiggle") return Command::squiggle;
    if (name == "chaos") return Command::chaos;
    throw InvalidInput("unknown command '" + name + "'");
}

std::string command_name(Command c) {
    switch (c) {
        case Command::quench: return "quench";
        case Command::deviation: return "deviation";
        case Command::sweep: return "sweep";
        case Command::squiggle: return "squiggle";
        case Command::chaos: return "chaos";
    }
    return "?";
}

XConvention parse_convention(const std::string& name) {
    if (name == "literal") return XConvention::literal;
    if (name == "normalized") return XConvention::normalized;
    throw InvalidInput("config key 'convention': expected literal or normalized, got '" + name + "'");
}

std::string convention_name(XConvention c) {
    return c == XConvention::literal ? "literal" : "normalized";
}

RunConfig default_config(Command command) {
    RunConfig c;
    c.command = command;
    c.length_list = {c.model.length};
    switch (command) {
        case Command::quench:
            c.gamma_list = {0.0};
            c.output_path = "quench.csv";
            break;
        case Command::deviation:
            c.gamma_list = {20.0};
            c.output_path = "deviation.csv";
            break;
        case Command::sweep:
            c.gamma_list = {8.0, 16.0, 32.0};
            c.length_list = {5, 6, 7};
            c.output_path = "sweep.csv";
            break;
        case Command::squiggle:
            c.gamma_list = {2.2, 2.3, 2.4, 2.5, 2.6};
            c.evolution.dt = 0.004;
            c.evolution.t_max = 60.0;
            c.output_path = "squiggle.csv";
            break;
        case Command::chaos:
            c.gamma_list = {0.0, 20.0};
            c.evolution.t_max = 30.0;
            c.output_path = "chaos.csv";
            break;
    }
    return c;
}

void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& value) {
    const std::string key = trim(raw_key);
    const std::string v = trim(value);
    if (key == "command") {
        c.command = parse_command(v);
    } else if (key == "length" || key == "L" || key == "length_list" || key == "L_list") {
        c.length_list = to_int_list(key, v);
        c.model.length = c.length_list.front();
    } else if (key == "coupling" || key == "J") {
        c.model.coupling = to_real(key, v);
    } else if (key == "hx") {
        c.model.hx = to_real(key, v);
    } else if (key == "hz") {
        c.model.hz = to_real(key, v);
    } else if (key == "gamma" || key == "gamma_list") {
        c.gamma_list = to_real_list(key, v);
        c.evolution.gamma = c.gamma_list.front();
    } else if (key == "dt") {
        c.evolution.dt = to_real(key, v);
    } else if (key == "t_max" || key == "tmax") {
        c.evolution.t_max = to_real(key, v);
    } else if (key == "sample_stride") {
        c.evolution.sample_stride = to_int(key, v);
    } else if (key == "convention" || key == "x_convention") {
        c.evolution.x_convention = parse_convention(v);
    } else if (key == "unitarize_every") {
        c.evolution.unitarize_every = to_int(key, v);
    } else if (key == "threads") {
        c.threads = to_int(key, v);
    } else if (key == "output" || key == "output_path" || key == "out") {
        if (v.empty()) bad_value(key, value, "a path");
        c.output_path = v;
    } else if (key == "t_eval") {
        c.t_eval = to_real(key, v);
    } else if (key == "window") {
        c.window = to_real(key, v);
    } else if (key == "tier") {
        if (v == "desk") {
            c.tier = Tier::desk;
        } else if (v == "full") {
            c.tier = Tier::full;
        } else {
            bad_value(key, value, "desk or full");
        }
    } else if (key == "initial") {
        if (v != "plusx" && v != "zero") bad_value(key, value, "plusx or zero");
        c.initial = v;
    } else if (key == "exact") {
        c.exact = to_bool(key, v);
    } else if (key == "input" || key == "input_path") {
        c.input_path = v;
    } else if (key == "onset_t_min") {
        c.onset_t_min = to_real(key, v);
    } else if (key == "onset_epsilon") {
        c.onset_epsilon = to_real(key, v);
    } else if (key == "dt_list") {
        c.dt_list = to_real_list(key, v);
    } else if (key == "sample_interval") {
        c.sample_interval = to_real(key, v);
    } else if (key == "growth_floor") {
        c.growth_floor = to_real(key, v);
    } else if (key == "growth_ceiling") {
        c.growth_ceiling = to_real(key, v);
    } else {
        throw InvalidInput("unknown config key '" + key + "'");
    }
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidInput("config line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw InvalidInput("config line " + std::to_string(line_no) + ": empty key");
        out.emplace_back(std::move(key), trim(line.substr(eq + 1)));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file '" + path + "'");
    return parse_config_text(in);
}

void validate(const RunConfig& c) {
    validate(c.model);
    if (c.gamma_list.empty()) throw InvalidInput("config key 'gamma': list is empty");
    if (c.length_list.empty()) throw InvalidInput("config key 'length': list is empty");
    for (int L : c.length_list) {
        if (L < 3) throw InvalidInput("config key 'length': every L must be >= 3");
    }
    if (c.threads < 1) throw InvalidInput("config key 'threads': must be >= 1");
    EvolutionConfig probe = c.evolution;
    probe.threads = c.threads;
    if (c.command == Command::sweep) probe.t_max = c.t_eval;
    validate(probe);
    if (c.command != Command::chaos) num_steps(probe);

    const bool single_length = c.command != Command::sweep;
    if (single_length && c.length_list.size() != 1) {
        throw InvalidInput("config key 'length': command " + command_name(c.command) +
                           " takes a single L");
    }
    if (c.command == Command::quench && c.gamma_list.size() != 1) {
        throw InvalidInput("config key 'gamma': quench takes a single gamma");
    }
    if (c.command == Command::sweep) {
        if (!(c.window >= 0.0) || c.window > c.t_eval) {
            throw InvalidInput("config key 'window': must lie in [0, t_eval]");
        }
        int cap = c.tier == Tier::desk ? 8 : 10;
        for (int L : c.length_list) {
            if (L > cap) {
                throw InvalidInput("config key 'length': L=" + std::to_string(L) + " exceeds the " +
                                   (c.tier == Tier::desk ? "desk" : "full") + " tier cap L=" +
                                   std::to_string(cap));
            }
        }
    }
    if (c.command == Command::squiggle && !(c.onset_epsilon > 0.0)) {
        throw InvalidInput("config key 'onset_epsilon': must be positive");
    }
    if (c.command == Command::chaos) {
        if (c.dt_list.empty()) throw InvalidInput("config key 'dt_list': list is empty");
        if (!(c.sample_interval > 0.0)) throw InvalidInput("config key 'sample_interval': must be positive");
        for (double dt : c.dt_list) {
            EvolutionConfig e = probe;
            e.dt = dt;
            const double ratio = c.sample_interval / dt;
            if (!(dt > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
                throw InvalidInput("config key 'dt_list': every dt must divide sample_interval");
            }
            num_steps(e);
        }
        if (!(c.growth_floor > 0.0) || !(c.growth_ceiling > c.growth_floor)) {
            throw InvalidInput("config key 'growth_floor': need 0 < floor < ceiling");
        }
    }
    if (c.exact && c.model.length > kMaxDenseLength) {
        throw InvalidInput("config key 'exact': dense reference limited to L <= " +
                           std::to_string(kMaxDenseLength));
    }
}

std::string to_text(const RunConfig& c) {
    std::ostringstream out;
    out << "command = " << command_name(c.command) << '\n'
        << "length = " << join(c.length_list) << '\n'
        << "coupling = " << format_number(c.model.coupling) << '\n'
        << "hx = " << format_number(c.model.hx) << '\n'
        << "hz = " << format_number(c.model.hz) << '\n'
        << "gamma = " << join(c.gamma_list) << '\n'
        << "dt = " << format_number(c.evolution.dt) << '\n'
        << "t_max = " << format_number(c.evolution.t_max) << '\n'
        << "sample_stride = " << c.evolution.sample_stride << '\n'
        << "convention = " << convention_name(c.evolution.x_convention) << '\n'
        << "unitarize_every = " << c.evolution.unitarize_every << '\n'
        << "threads = " << c.threads << '\n'
        << "output = " << c.output_path << '\n'
        << "t_eval = " << format_number(c.t_eval) << '\n'
        << "window = " << format_number(c.window) << '\n'
        << "tier = " << (c.tier == Tier::desk ? "desk" : "full") << '\n'
        << "initial = " << c.initial << '\n'
        << "exact = " << (c.exact ? "true" : "false") << '\n'
        << "onset_t_min = " << format_number(c.onset_t_min) << '\n'
        << "onset_epsilon = " << format_number(c.onset_epsilon) << '\n'
        << "dt_list = " << join(c.dt_list) << '\n'
        << "sample_interval = " << format_number(c.sample_interval) << '\n'
        << "growth_floor = " << format_number(c.growth_floor) << '\n'
        << "growth_ceiling = " << format_number(c.growth_ceiling) << '\n';
    if (!c.input_path.empty()) out << "input = " << c.input_path << '\n';
    return out.str();
}

}  // namespace gauge
