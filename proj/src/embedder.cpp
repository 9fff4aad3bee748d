#include "vid3d/embedder.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <numbers>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "vid3d/error.hpp"
#include "vid3d/hashing.hpp"

namespace vid3d {

namespace {

Image luminance(const Image& img) {
    Image out(img.width, img.height, 1);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        if (img.channels >= 3) {
            out.data[p] = 0.299f * img.data[p * img.channels] + 0.587f * img.data[p * img.channels + 1] +
                          0.114f * img.data[p * img.channels + 2];
        } else {
            out.data[p] = img.data[p * img.channels];
        }
    }
    return out;
}

void normalize_block(Eigen::Ref<Eigen::VectorXd> block) {
    const double n = block.norm();
    if (n > 0.0) block /= n;
}

}  // namespace

Eigen::VectorXd SurrogateEmbedder::embed(const Image& image) {
    if (image.width < 1 || image.height < 1) throw InvalidArgument("cannot embed an empty image");
    Eigen::VectorXd f = Eigen::VectorXd::Zero(kDimension);
    const Image lum = luminance(image);

    const Image thumb = resize_area(lum, 8, 8);
    for (int i = 0; i < 64; ++i) f[i] = thumb.data[i];

    const int nc = std::min(image.channels, 3);
    for (std::size_t p = 0; p < image.pixel_count(); ++p) {
        for (int c = 0; c < nc; ++c) {
            const float v = std::clamp(image.data[p * image.channels + c], 0.0f, 1.0f);
            const int bin = std::min(15, static_cast<int>(v * 16.0f));
            f[64 + c * 16 + bin] += 1.0;
        }
    }

    constexpr int kN = 32, kK = 12;
    const Image small = resize_area(lum, kN, kN);
    for (int u = 0; u < kK; ++u) {
        for (int v = 0; v < kK; ++v) {
            double acc = 0.0;
            for (int y = 0; y < kN; ++y) {
                const double cy = std::cos(std::numbers::pi * (y + 0.5) * u / kN);
                for (int x = 0; x < kN; ++x) {
                    acc += small.data[y * kN + x] * cy * std::cos(std::numbers::pi * (x + 0.5) * v / kN);
                }
            }
            const double su = u == 0 ? std::sqrt(1.0 / kN) : std::sqrt(2.0 / kN);
            const double sv = v == 0 ? std::sqrt(1.0 / kN) : std::sqrt(2.0 / kN);
            f[112 + u * kK + v] = std::abs(su * sv * acc);
        }
    }

    normalize_block(f.segment(0, 64));
    normalize_block(f.segment(64, 48));
    normalize_block(f.segment(112, 144));
    f.normalize();
    return f;
}

std::unique_ptr<Embedder> surrogate_embedder() { return std::make_unique<SurrogateEmbedder>(); }

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

RemoteEmbedder::RemoteEmbedder(std::string url, RemoteEmbedderOptions options)
    : url_(std::move(url)), options_(options) {
    static const std::regex re(R"(^(http://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url_, m, re)) {
        throw InvalidArgument("embedder url must look like http://host:port[/path], got '" + url_ + "'");
    }
    host_ = m[1].str();
    base_path_ = m[2].matched ? m[2].str() : std::string{};
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
    if (options_.attempts < 1) throw InvalidArgument("remote embedder needs at least one attempt");
}

std::string RemoteEmbedder::post_embed(const std::string& body) {
    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<kMaxInFlight>& s;
        ~Release() { s.release(); }
    } release{in_flight_};

    auto backoff = options_.initial_backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= options_.attempts; ++attempt) {
        httplib::Client cli(host_);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
        cli.set_connection_timeout(std::max<long>(1, static_cast<long>(secs.count())), 0);
        cli.set_read_timeout(std::max<long>(1, static_cast<long>(secs.count())), 0);
        ++calls_;
        auto res = cli.Post(base_path_ + "/embed", body, "application/json");
        if (res && res->status == 200) return res->body;
        if (res && res->status != 503 && res->status < 500) {
            throw EmbedResponseError("embed service replied HTTP " + std::to_string(res->status) + ": " + res->body);
        }
        last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
        if (attempt < options_.attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw EmbedConnectionError("embed service at " + url_ + " unreachable after " +
                               std::to_string(options_.attempts) + " attempts (" + last_error + ")");
}

Eigen::VectorXd RemoteEmbedder::embed(const Image& image) {
    const auto png = encode_png(image);
    const std::string key = sha256_hex(png);
    {
        std::lock_guard lock(cache_mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const nlohmann::json request{{"image", base64_encode(png)}, {"content_hash", key}};
    const std::string reply = post_embed(request.dump());

    Eigen::VectorXd v;
    try {
        const auto j = nlohmann::json::parse(reply);
        const auto values = j.at("embedding").get<std::vector<double>>();
        const int dim = j.value("dim", static_cast<int>(values.size()));
        if (dim != static_cast<int>(values.size())) {
            throw EmbedDimensionError("embed service declared dim " + std::to_string(dim) + " but sent " +
                                      std::to_string(values.size()) + " values");
        }
        v = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    } catch (const nlohmann::json::exception& e) {
        throw EmbedResponseError(std::string("malformed embed response: ") + e.what());
    }
    if (options_.expected_dimension > 0 && v.size() != options_.expected_dimension) {
        throw EmbedDimensionError("embedding has dimension " + std::to_string(v.size()) + ", expected " +
                                  std::to_string(options_.expected_dimension));
    }
    if (!v.allFinite() || v.norm() == 0.0) throw EmbedResponseError("embedding is zero or non-finite");
    v.normalize();
    dimension_ = static_cast<int>(v.size());

    std::lock_guard lock(cache_mutex_);
    return cache_.emplace(key, std::move(v)).first->second;
}

std::string RemoteEmbedder::health() {
    httplib::Client cli(host_);
    ++calls_;
    auto res = cli.Get(base_path_ + "/health");
    if (!res) throw EmbedConnectionError("embed service at " + url_ + " unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200) throw EmbedResponseError("health check returned HTTP " + std::to_string(res->status));
    return res->body;
}

std::unique_ptr<Embedder> remote_embedder(const std::string& url, RemoteEmbedderOptions options) {
    return std::make_unique<RemoteEmbedder>(url, options);
}

}  // namespace vid3d
