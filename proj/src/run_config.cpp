#include "bellsim/run_config.hpp"

#include <cctype>
#include <stdexcept>
#include <string>

namespace bellsim {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': cannot parse number '" + value +
                                    "'");
    }
    if (used != value.size())
        throw std::invalid_argument("config key '" + key + "': trailing characters in '" +
                                    value + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': cannot parse integer '" + value +
                                    "'");
    }
    if (used != value.size())
        throw std::invalid_argument("config key '" + key + "': trailing characters in '" +
                                    value + "'");
    return v;
}

}  // namespace

const char* subcommand_name(Subcommand c) {
    switch (c) {
        case Subcommand::protocol: return "protocol";
        case Subcommand::stats: return "stats";
        case Subcommand::mc: return "mc";
        case Subcommand::optimize: return "optimize";
        case Subcommand::levels: return "levels";
    }
    throw std::logic_error("unreachable subcommand");
}

DetectionModel RunConfig::detection_model() const {
    DetectionModel m;
    m.p_detect_stokes = p_detect;
    m.p_detect_as = p_detect_as;
    m.pulse_duration = pulse_ns * 1e-9;
    m.dark_rate = dark_rate_hz;
    m.p_dc = p_dc ? *p_dc : dark_rate_hz * (pulse_ns * 1e-9);
    m.rep_rate = rep_rate_hz;
    m.p_read = p_read;
    m.validate();
    return m;
}

std::map<std::string, std::string> parse_config_file(std::istream& in) {
    std::map<std::string, std::string> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": empty key or value");
        entries[key] = value;
    }
    return entries;
}

void apply_config_entries(RunConfig& config,
                          const std::map<std::string, std::string>& entries) {
    for (const auto& [key, value] : entries) {
        if (key == "lambda")
            config.lambda = parse_double(key, value);
        else if (key == "p_detect")
            config.p_detect = parse_double(key, value);
        else if (key == "p_detect_as")
            config.p_detect_as = parse_double(key, value);
        else if (key == "dark_rate_hz")
            config.dark_rate_hz = parse_double(key, value);
        else if (key == "pulse_ns")
            config.pulse_ns = parse_double(key, value);
        else if (key == "rep_rate_hz")
            config.rep_rate_hz = parse_double(key, value);
        else if (key == "p_read")
            config.p_read = parse_double(key, value);
        else if (key == "n_max")
            config.n_max = parse_int(key, value);
        else
            throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

}  // namespace bellsim
