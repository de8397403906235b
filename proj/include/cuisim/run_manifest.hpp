#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cuisim {

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Reproducibility record written by every CLI run.
class RunManifest {
public:
    RunManifest(std::string command, const nlohmann::json& effective_config);

    void add_input(const std::filesystem::path& path);
    void add_output(const std::filesystem::path& path);
    void set_counter(const std::string& name, std::size_t value);
    void set_status(int exit_code, const std::string& message = {});

    nlohmann::json to_json() const;
    void write(const std::filesystem::path& path) const;

private:
    std::string command_;
    std::string config_hash_;
    nlohmann::json config_;
    std::map<std::string, std::string> inputs_;
    std::vector<std::string> outputs_;
    std::map<std::string, std::size_t> counters_;
    std::string started_at_;
    int exit_code_ = 0;
    std::string message_;
};

}  // namespace cuisim
