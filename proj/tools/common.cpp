#include "common.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "epw/errors.hpp"

namespace epwcli {

Json load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw epw::io_error("cannot open config file: " + path);
    try {
        Json doc;
        in >> doc;
        if (!doc.is_object()) throw epw::io_error("config must be a JSON object: " + path);
        return doc;
    } catch (const nlohmann::json::exception& e) {
        throw epw::io_error("bad config JSON " + path + ": " + e.what());
    }
}

Resolver::Resolver(const CLI::App& cmd, Json config) : cmd_(cmd), config_(std::move(config)) {}

bool Resolver::flag_given(const std::string& flag) const {
    const CLI::Option* opt = cmd_.get_option_no_throw("--" + flag);
    return opt != nullptr && opt->count() > 0;
}

std::uint64_t Resolver::seed(const std::string& flag, std::uint64_t current,
                             std::uint64_t fallback) {
    if (!flag_given(flag) && !config_.contains("seed")) {
        if (!env_seed(current)) current = fallback;
        consumed_.push_back("seed");
        resolved_["seed"] = current;
        return current;
    }
    return get<std::uint64_t>(flag, "seed", current);
}

void Resolver::finish() const {
    for (const auto& [key, value] : config_.items()) {
        (void)value;
        if (std::find(consumed_.begin(), consumed_.end(), key) == consumed_.end())
            throw CLI::ValidationError("unknown config key '" + key + "'");
    }
}

bool env_seed(std::uint64_t& out) {
    const char* raw = std::getenv("EP_WORKBENCH_SEED");
    if (raw == nullptr || *raw == '\0') return false;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw, &end, 10);
    if (end == raw || *end != '\0')
        throw CLI::ValidationError("EP_WORKBENCH_SEED must be an unsigned integer");
    out = v;
    return true;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw epw::io_error("cannot create directory " + dir + ": " + ec.message());
}

void write_json_file(const std::string& path, const Json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw epw::io_error("cannot open for writing: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw epw::io_error("write failed: " + path);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw epw::io_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw epw::io_error("write failed: " + path);
}

void write_resolved_config(const std::string& out_dir, const std::string& command,
                           const Json& resolved) {
    Json doc;
    doc["command"] = command;
    doc["config"] = resolved;
    write_json_file(out_dir + "/resolved_config.json", doc);
}

}  // namespace epwcli
