#include "fedqa/config.hpp"

#include <fstream>

#include "fedqa/errors.hpp"

namespace fedqa {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        int v = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " expects an integer, got: " + value);
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " expects a number, got: " + value);
    }
}

}  // namespace

void AppConfig::set(const std::string& key, const std::string& value) {
    if (key == "listen") listen = value;
    else if (key == "store") store_path = value;
    else if (key == "backend") {
        if (value != "oracle" && value != "http") {
            throw ConfigError("backend must be oracle or http, got: " + value);
        }
        backend = value;
    }
    else if (key == "base_url") base_url = value;
    else if (key == "model") model = value;
    else if (key == "api_key_env") api_key_env = value;
    else if (key == "oracle_script") oracle_script = value;
    else if (key == "paths") paths = parse_int(key, value);
    else if (key == "exemplars") exemplars = parse_int(key, value);
    else if (key == "retrieve_limit") retrieve_limit = parse_int(key, value);
    else if (key == "synonymy_threshold") synonymy_threshold = parse_double(key, value);
    else if (key == "pseudo_label_threshold") pseudo_label_threshold = parse_double(key, value);
    else if (key == "cache_threshold") cache_threshold = parse_double(key, value);
    else if (key == "temperature") temperature = parse_double(key, value);
    else if (key == "max_tokens") max_tokens = parse_int(key, value);
    else if (key == "seed") seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "timeout_s") timeout_s = parse_int(key, value);
    else throw ConfigError("unknown config key: " + key);
}

AppConfig load_config_file(const std::filesystem::path& path, AppConfig base) {
    std::ifstream in(path);
    if (!in) throw FileMissing("cannot open config file: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              " is not key=value: " + t);
        }
        base.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return base;
}

}  // namespace fedqa
