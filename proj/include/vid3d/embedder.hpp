#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>

#include <Eigen/Core>

#include "vid3d/image.hpp"

namespace vid3d {

/// Maps an image to a unit-norm feature vector of fixed dimension.
/// Implementations must be deterministic per image and safe to call concurrently.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual Eigen::VectorXd embed(const Image& image) = 0;
    virtual int dimension() const = 0;
    virtual std::string id() const = 0;
};

/// Deterministic 256-d stand-in for an image encoder. Blocks, each
/// L2-normalized then weighted equally:
///   64  8x8 area-downsampled luminance
///   48  16-bin histogram per RGB channel
///   144 magnitudes of the lowest 12x12 DCT-II coefficients of 32x32 luminance
/// All features are nonnegative, so cosine similarities lie in [0, 1].
class SurrogateEmbedder final : public Embedder {
public:
    static constexpr int kDimension = 256;
    Eigen::VectorXd embed(const Image& image) override;
    int dimension() const override { return kDimension; }
    std::string id() const override { return "surrogate-v1"; }
};

std::unique_ptr<Embedder> surrogate_embedder();

struct RemoteEmbedderOptions {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{100};  // doubled after each failed attempt
    std::chrono::milliseconds timeout{30000};
    int expected_dimension = 512;  // 0 accepts any dimension
};

/// Client for the embedding service (POST {url}/embed). See
/// docs/embed_protocol.md for the wire format. Responses are cached by the
/// SHA-256 of the encoded PNG; at most 4 requests are in flight.
class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(std::string url, RemoteEmbedderOptions options = {});

    /// Throws EmbedConnectionError after `attempts` failed connections,
    /// EmbedResponseError for non-200 replies or malformed JSON, and
    /// EmbedDimensionError when the vector length is unexpected.
    Eigen::VectorXd embed(const Image& image) override;
    int dimension() const override { return dimension_.load(); }
    std::string id() const override { return "remote:" + url_; }

    /// GET {url}/health; returns the body on 200.
    std::string health();

    /// Number of HTTP requests issued (including retries).
    int network_calls() const { return calls_.load(); }

    static constexpr int kMaxInFlight = 4;

private:
    std::string post_embed(const std::string& body);

    std::string url_;
    std::string host_;
    std::string base_path_;
    RemoteEmbedderOptions options_;
    std::atomic<int> dimension_{0};
    std::atomic<int> calls_{0};
    std::counting_semaphore<kMaxInFlight> in_flight_{kMaxInFlight};
    std::mutex cache_mutex_;
    std::map<std::string, Eigen::VectorXd> cache_;
};

std::unique_ptr<Embedder> remote_embedder(const std::string& url, RemoteEmbedderOptions options = {});

/// Environment variable consulted by the CLI for the default endpoint.
inline constexpr const char* kEmbedUrlEnv = "VID3D_EMBED_URL";

std::string base64_encode(std::span<const std::uint8_t> bytes);

}  // namespace vid3d
