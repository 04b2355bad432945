#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace fedqa {

// Runtime configuration shared by the gateway and the CLI. Defaults here,
// overridden by a key=value config file, overridden again by CLI flags.
struct AppConfig {
    std::string listen = "127.0.0.1:8080";
    std::string store_path = "fedqa_store.jsonl";
    std::string backend = "oracle";  // oracle | http
    std::string base_url;
    std::string model;
    std::string api_key_env = "FEDQA_API_KEY";
    std::string oracle_script;
    int paths = 5;        // sweet spot before accuracy falls off
    int exemplars = 4;
    int retrieve_limit = 16;
    double synonymy_threshold = 0.15;
    double pseudo_label_threshold = 0.6;
    double cache_threshold = 0.8;
    double temperature = 0.7;
    int max_tokens = 256;
    std::uint64_t seed = 0;
    int timeout_s = 120;

    // Applies one key=value pair; throws ConfigError on unknown keys or
    // unparsable values.
    void set(const std::string& key, const std::string& value);
};

// Parses a key=value file ('#' comments and blank lines allowed) on top of
// the given defaults.
AppConfig load_config_file(const std::filesystem::path& path,
                           AppConfig base = {});

}  // namespace fedqa
