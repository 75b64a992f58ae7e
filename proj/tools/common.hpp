#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace epwcli {

using Json = nlohmann::ordered_json;

/// Parses a JSON config file. Throws epw::io_error when the file is missing
/// or not valid JSON.
Json load_config_file(const std::string& path);

/// Merges config-file values under flag overrides (a flag the user typed
/// always wins; otherwise the config value replaces the flag's default) and
/// records every resolved value for the run snapshot. Keys present in the
/// config but never consumed are rejected as a usage error when finish() runs.
class Resolver {
public:
    Resolver(const CLI::App& cmd, Json config);

    template <typename T>
    T get(const std::string& flag, const std::string& key, T current) {
        if (!flag_given(flag) && config_.contains(key)) {
            try {
                current = config_.at(key).get<T>();
            } catch (const nlohmann::json::exception&) {
                throw CLI::ValidationError("config key '" + key + "' has the wrong type");
            }
        }
        consumed_.push_back(key);
        resolved_[key] = current;
        return current;
    }

    /// Seed precedence: flag > config key "seed" > EP_WORKBENCH_SEED > fallback.
    std::uint64_t seed(const std::string& flag, std::uint64_t current, std::uint64_t fallback);

    /// Throws a usage error if the config holds keys no get() consumed.
    void finish() const;

    const Json& resolved() const { return resolved_; }

private:
    bool flag_given(const std::string& flag) const;

    const CLI::App& cmd_;
    Json config_;
    Json resolved_;
    std::vector<std::string> consumed_;
};

bool env_seed(std::uint64_t& out);

void ensure_dir(const std::string& dir);
void write_json_file(const std::string& path, const Json& doc);
void write_text_file(const std::string& path, const std::string& content);

/// Writes <out_dir>/resolved_config.json: the command name plus every value
/// the run actually used.
void write_resolved_config(const std::string& out_dir, const std::string& command,
                           const Json& resolved);

void register_simulate(CLI::App& app);
void register_gen_dataset(CLI::App& app);
void register_baseline_eval(CLI::App& app);
void register_fit_channel(CLI::App& app);
void register_egm(CLI::App& app);

}  // namespace epwcli
