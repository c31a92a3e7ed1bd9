#include "ssd/embeddings.hpp"
#include "ssd/error.hpp"

#include <cmath>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace ssd {

HttpBackend::HttpBackend(std::string url, HttpBackendOptions options) : url_(std::move(url)), options_(options) {
    const auto scheme_end = url_.find("://");
    if (scheme_end == std::string::npos) throw ValidationError("http backend url lacks a scheme: " + url_);
    const auto path_begin = url_.find('/', scheme_end + 3);
    scheme_host_port_ = url_.substr(0, path_begin);
    path_ = path_begin == std::string::npos ? std::string{} : url_.substr(path_begin);
    while (!path_.empty() && path_.back() == '/') path_.pop_back();
    path_ += "/embed";
}

std::vector<std::optional<std::vector<float>>> HttpBackend::embed(std::span<const EmbedRequest> batch) {
    nlohmann::json body;
    body["texts"] = nlohmann::json::array();
    body["spans"] = nlohmann::json::array();
    for (const auto& req : batch) {
        body["texts"].push_back(req.text);
        body["spans"].push_back({req.char_start, req.char_end});
    }

    httplib::Client client(scheme_host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res) throw BackendError("POST " + url_ + path_ + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
        throw BackendError("POST " + url_ + path_ + " returned HTTP " + std::to_string(res->status));
    }

    nlohmann::json reply;
    try {
        reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("embedding service sent invalid JSON: ") + e.what());
    }
    if (!reply.contains("dimension") || !reply.contains("vectors") || !reply["vectors"].is_array()) {
        throw BackendError("embedding service reply lacks 'dimension' or 'vectors'");
    }
    try {
        return decode_reply(reply, batch.size());
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("embedding service reply is malformed: ") + e.what());
    }
}

std::vector<std::optional<std::vector<float>>> HttpBackend::decode_reply(const nlohmann::json& reply,
                                                                         std::size_t expected) {
    const auto dimension = reply.at("dimension").get<std::size_t>();
    if (dimension == 0) throw BackendError("embedding service declared dimension 0");
    const auto& vectors = reply.at("vectors");
    if (vectors.size() != expected) {
        throw BackendError("embedding service returned " + std::to_string(vectors.size()) + " vectors for " +
                           std::to_string(expected) + " texts");
    }
    std::vector<std::optional<std::vector<float>>> out;
    out.reserve(expected);
    for (const auto& v : vectors) {
        if (v.is_null()) {
            out.emplace_back(std::nullopt);
            continue;
        }
        auto vec = v.get<std::vector<float>>();
        if (vec.size() != dimension) {
            throw BackendError("embedding service vector has dimension " + std::to_string(vec.size()) +
                               ", declared " + std::to_string(dimension));
        }
        for (float f : vec) {
            if (!std::isfinite(f)) throw BackendError("embedding service returned a non-finite value");
        }
        out.emplace_back(std::move(vec));
    }
    return out;
}

}  // namespace ssd
