#include "ssd/log.hpp"

#include <memory>
#include <string>

#include <nlohmann/json.hpp>
#include <spdlog/pattern_formatter.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace ssd::log {

namespace {

class JsonMessage final : public spdlog::custom_flag_formatter {
public:
    void format(const spdlog::details::log_msg& msg, const std::tm&, spdlog::memory_buf_t& dest) override {
        const std::string escaped = nlohmann::json(std::string(msg.payload.data(), msg.payload.size()))
                                        .dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
        dest.append(escaped.data(), escaped.data() + escaped.size());
    }
    std::unique_ptr<custom_flag_formatter> clone() const override { return std::make_unique<JsonMessage>(); }
};

std::shared_ptr<spdlog::logger>& logger() {
    static std::shared_ptr<spdlog::logger> instance = [] {
        auto l = std::make_shared<spdlog::logger>("ssd", std::make_shared<spdlog::sinks::stderr_sink_mt>());
        l->set_pattern("[%l] %v");
        l->set_level(spdlog::level::info);
        return l;
    }();
    return instance;
}

}  // namespace

void configure(Level level, bool json) {
    auto& l = logger();
    switch (level) {
        case Level::debug: l->set_level(spdlog::level::debug); break;
        case Level::info: l->set_level(spdlog::level::info); break;
        case Level::warn: l->set_level(spdlog::level::warn); break;
        case Level::error: l->set_level(spdlog::level::err); break;
        case Level::off: l->set_level(spdlog::level::off); break;
    }
    if (json) {
        auto formatter = std::make_unique<spdlog::pattern_formatter>();
        formatter->add_flag<JsonMessage>('*').set_pattern(R"({"ts":"%Y-%m-%dT%H:%M:%S.%e","level":"%l","msg":%*})");
        l->set_formatter(std::move(formatter));
    } else {
        l->set_pattern("[%l] %v");
    }
}

void debug(std::string_view msg) { logger()->debug("{}", msg); }
void info(std::string_view msg) { logger()->info("{}", msg); }
void warn(std::string_view msg) { logger()->warn("{}", msg); }
void error(std::string_view msg) { logger()->error("{}", msg); }

}  // namespace ssd::log
