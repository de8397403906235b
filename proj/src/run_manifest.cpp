#include "cuisim/run_manifest.hpp"

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "cuisim/types.hpp"

namespace cuisim {

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) { EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr); }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const char* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_, md.data(), &len);
        std::ostringstream out;
        for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
        return out.str();
    }

private:
    EVP_MD_CTX* ctx_;
};

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

}  // namespace

std::string sha256_hex(std::string_view data) {
    Sha256 h;
    h.update(data.data(), data.size());
    return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot read " + path.string());
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

RunManifest::RunManifest(std::string command, const nlohmann::json& effective_config)
    : command_(std::move(command)),
      config_hash_(sha256_hex(effective_config.dump())),
      config_(effective_config),
      started_at_(utc_now()) {}

void RunManifest::add_input(const std::filesystem::path& path) { inputs_[path.string()] = sha256_file(path); }

void RunManifest::add_output(const std::filesystem::path& path) { outputs_.push_back(path.string()); }

void RunManifest::set_counter(const std::string& name, std::size_t value) { counters_[name] = value; }

void RunManifest::set_status(int exit_code, const std::string& message) {
    exit_code_ = exit_code;
    message_ = message;
}

nlohmann::json RunManifest::to_json() const {
    return {{"command", command_},   {"config_sha256", config_hash_}, {"config", config_},
            {"inputs", inputs_},     {"outputs", outputs_},           {"counters", counters_},
            {"started_at", started_at_}, {"finished_at", utc_now()},  {"exit_code", exit_code_},
            {"message", message_}};
}

void RunManifest::write(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write " + path.string());
    out << to_json().dump(2) << '\n';
}

}  // namespace cuisim
